"""Brute-force ground truth and the 1/d exploration for hypergraph LPs."""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, lcm

from . import connectivity as conn
from .exactlp import (
    CoveringLP, Tight, VertexSolution, certify_vertex, cutting_plane_solve, solve_square,
)
from .instances import (
    format_rational, generate, instance_to_dict,
)
from .reductions import elem_solution_cost
from .requirements import PairwiseMax, is_trivial, residual
from .rounding import TheoremViolated

MAX_BRUTE_EDGES = 20
MAX_BRUTE_N = 10
MAX_VERTEX_VARS = 12


class LimitExceeded(ValueError):
    pass


class InfeasibleOracle(ValueError):
    pass


def _cut_constraints(n, members, f):
    """(crossing mask over object ids, requirement) for every S containing
    vertex 0 with f(S) > 0; complements are equivalent for symmetric f."""
    out = []
    for S in range(1, 1 << n):
        if not S & 1 or S == (1 << n) - 1:
            continue
        need = f.eval_mask(S)
        if need <= 0:
            continue
        mask = 0
        for i, ms in enumerate(members):
            inside = sum(1 for a in ms if S >> a & 1)
            if 0 < inside < len(ms):
                mask |= 1 << i
        out.append((mask, need))
    out.sort(key=lambda c: -c[1])
    return out


def brute_force_opt(instance, variant: str | None = None):
    """Minimum-cost feasible subset by exhaustion.

    EC and hyper feasibility is the cut condition over all 2^n sets, which
    equals the per-pair max-flow test by Menger; the winning set is then
    re-checked with max-flow.  Elem feasibility is judged by split-graph
    flows directly.  Ties go to the lexicographically smallest id tuple.
    Returns ``(cost, witness)``.
    """
    variant = variant or instance.kind
    if variant == "hyper":
        ground = instance.hypergraph
    else:
        ground = instance.graph
    m, n = ground.num_edges, ground.n
    if m > MAX_BRUTE_EDGES:
        raise LimitExceeded(f"{m} edges > {MAX_BRUTE_EDGES}")
    if variant != "elem" and n > MAX_BRUTE_N:
        raise LimitExceeded(f"n = {n} > {MAX_BRUTE_N}")
    reqs = instance.requirements

    if variant == "elem":
        def cost_of(sub):
            return elem_solution_cost(instance, _ids(sub))

        def feasible(sub):
            ids = _ids(sub)
            return all(conn.element_connectivity(instance, ids, u, v) >= r
                       for (u, v), r in reqs.items())
    else:
        cons = _cut_constraints(n, [ground.members(e) for e in range(m)], PairwiseMax(reqs, n))

        def cost_of(sub):
            return sum((ground.cost(e) for e in _ids(sub)), Fraction(0))

        def feasible(sub):
            return all((sub & mask).bit_count() >= need for mask, need in cons)

    costs = [cost_of(s) for s in range(1 << m)] if variant == "elem" else _subset_costs(ground, m)
    order = sorted(range(1 << m), key=costs.__getitem__)
    best = None
    for sub in order:
        if best is not None and costs[sub] > costs[best[0]]:
            break
        if feasible(sub):
            if best is None:
                best = [sub]
            else:
                best.append(sub)
    if best is None:
        raise InfeasibleOracle("no feasible subset")
    witness = min((_ids(s) for s in best), key=lambda ids: sorted(ids))
    if variant == "ec":
        assert all(conn.edge_connectivity(ground, witness, u, v) >= r for (u, v), r in reqs.items())
    elif variant == "hyper":
        assert all(conn.hyperedge_connectivity(ground, witness, u, v) >= r
                   for (u, v), r in reqs.items())
    return costs[best[0]], frozenset(witness)


def _subset_costs(ground, m):
    cs = [ground.cost(e) for e in range(m)]
    scale = lcm(*(c.denominator for c in cs)) if cs else 1
    ints = [int(c * scale) for c in cs]
    table = [0] * (1 << m)
    for s in range(1, 1 << m):
        low = (s & -s).bit_length() - 1
        table[s] = table[s & (s - 1)] + ints[low]
    return [Fraction(v, scale) for v in table]


def _ids(sub: int) -> list:
    return [i for i in range(sub.bit_length()) if sub >> i & 1]


def enumerate_vertices(lp: CoveringLP, max_vars: int = MAX_VERTEX_VARS,
                       max_bases: int = 2_000_000) -> list:
    """Every vertex of the polytope, each with one basis certificate, found by
    solving every square subsystem of rows and bounds."""
    m = len(lp.variables)
    if m > max_vars:
        raise LimitExceeded(f"{m} variables > {max_vars}")
    col = {e: j for j, e in enumerate(lp.variables)}
    cons = []
    for row in lp.rows:
        vec = [0] * m
        for e in row.edges:
            vec[col[e]] = 1
        cons.append((vec, row.rhs, Tight("cut", row.tag)))
    for e in lp.variables:
        vec = [0] * m
        vec[col[e]] = 1
        cons.append((vec, 0, Tight("lower", e)))
        cons.append((vec, 1, Tight("upper", e)))
    if comb(len(cons), m) > max_bases:
        raise LimitExceeded(f"C({len(cons)}, {m}) candidate bases")

    found = {}
    for pick in combinations(range(len(cons)), m):
        y = solve_square([cons[i][0] for i in pick], [cons[i][1] for i in pick])
        if y is None:
            continue
        if any(not 0 <= v <= 1 for v in y):
            continue
        x = {e: y[col[e]] for e in lp.variables}
        if any(sum(x[e] for e in row.edges) < row.rhs for row in lp.rows):
            continue
        key = tuple(y)
        if key not in found:
            obj = sum((lp.costs[e] * x[e] for e in lp.variables), Fraction(0))
            tight = tuple(r.tag for r in lp.rows if sum(x[e] for e in r.edges) == r.rhs)
            found[key] = VertexSolution(x, obj, tight, tuple(cons[i][2] for i in pick), lp)
    return list(found.values())


# ---------------------------------------------------------------- 1/d exploration

@dataclass
class ExplorationRecord:
    trial: int
    seed: int
    d: int
    max_coordinate: Fraction
    vertex: VertexSolution
    fractional: dict
    instance: dict = field(default_factory=dict)

    @property
    def below_1_over_d(self) -> bool:
        return self.max_coordinate < Fraction(1, self.d)

    def to_dict(self) -> dict:
        return {
            "trial": self.trial, "seed": self.seed, "d": self.d,
            "max_coordinate": format_rational(self.max_coordinate),
            "below_1_over_d": self.below_1_over_d,
            "x": {str(e): format_rational(v) for e, v in sorted(self.vertex.x.items())},
            "fractional": sorted(self.fractional),
            "basis": [[t.kind, sorted(t.key) if t.kind == "cut" else t.key]
                      for t in self.vertex.basis_certificate],
            "instance": self.instance,
        }


def _trial_instance(d, seed, trial):
    rng = random.Random(seed * 1_000_003 + trial)
    n = rng.randint(max(d, 3), 7)
    m = rng.randint(3, 8)
    return generate("hyper", n=n, m=m, d=d, rmax=rng.randint(1, 2), pairs=rng.randint(2, n),
                    cost_range=(1, 10), seed=rng.getrandbits(63))


def explore_problem1(d: int, trials: int, seed: int = 0) -> dict:
    """Look for hypergraph LP vertices of degree d whose fractional part has
    every coordinate below 1/d.

    Each trial draws a random feasible hypergraph instance and walks the
    rounding loop: solve to a vertex, record the max coordinate of its
    fractional part, fix coordinates >= 1/d (or the largest one), drop
    zeros, recurse on the residual.  For d = 2 a flag contradicts the
    half-integrality theorem and raises.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    threshold = Fraction(1, d)
    records = []
    for t in range(trials):
        inst = _trial_instance(d, seed, t)
        h = inst.hypergraph
        g = PairwiseMax(inst.requirements, h.n)
        remaining = set(range(h.num_edges))
        while not is_trivial(g):
            sol, _ = cutting_plane_solve(h, g, h.costs(), variables=remaining)
            problem = certify_vertex(sol)
            assert problem is None, problem
            frac = {e: v for e, v in sol.x.items() if 0 < v < 1}
            if frac:
                rec = ExplorationRecord(t, seed, d, max(frac.values()), sol, frac)
                if rec.below_1_over_d:
                    rec.instance = instance_to_dict(inst)
                    if d == 2:
                        raise TheoremViolated("degree-2 vertex below 1/2", rec.to_dict())
                records.append(rec)
            fix = {e for e, v in sol.x.items() if v >= threshold}
            if not fix:
                fix = {max(sol.x, key=lambda e: (sol.x[e], -e))}
            drop = {e for e, v in sol.x.items() if v == 0}
            remaining -= fix | drop
            g = residual(g, h, fix)
    hist = Counter(format_rational(r.max_coordinate) for r in records)
    flagged = [r for r in records if r.below_1_over_d]
    return {
        "d": d, "trials": trials, "seed": seed,
        "vertices": len(records),
        "min_max_coordinate": format_rational(min((r.max_coordinate for r in records),
                                                  default=Fraction(1))),
        "histogram": dict(sorted(hist.items(), key=lambda kv: Fraction(kv[0]))),
        "candidates": [r.to_dict() for r in flagged],
    }
