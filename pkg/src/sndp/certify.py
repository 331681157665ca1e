"""Structural certification of fully fractional vertex solutions.

For a vertex x of the covering LP with every coordinate in (0, 1) this
module finds a laminar family of tight sets whose cut rows determine x,
and checks the bookkeeping of the half-integrality counting argument on
it: edge classes per internal set, alpha/beta/gamma counts, the tightness
identity at every internal node, and the unique-child endpoint bound.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Optional

from .exactlp import RowSpace, Tight, VertexSolution, solve_square
from .instances import format_rational, mask_vertices, vertex_mask
from .requirements import RequirementFn, residual

MAX_ENUM_N = 12
HALF = Fraction(1, 2)


class NotAVertex(ValueError):
    pass


class NotFullyFractional(ValueError):
    pass


def _cut_value(ends, x, mask) -> Fraction:
    total = Fraction(0)
    for e, members in ends.items():
        inside = sum(1 for a in members if mask >> a & 1)
        if 0 < inside < len(members):
            total += x[e]
    return total


def _crossing(A: int, B: int) -> bool:
    return bool(A & B) and bool(A & ~B) and bool(B & ~A)


def peel(sol: VertexSolution, f: RequirementFn, ground):
    """Restrict a vertex to its fractional coordinates.  Edges at 1 are fixed
    into the requirement, edges at 0 are deleted; the result is a fully
    fractional vertex of the reduced LP (possibly empty)."""
    ones = [e for e, v in sol.x.items() if v == 1]
    x = {e: v for e, v in sol.x.items() if 0 < v < 1}
    g = residual(f, ground, ones)
    obj = sum((ground.cost(e) * v for e, v in x.items()), Fraction(0))
    return VertexSolution(x, obj, (), ()), g


@dataclass(frozen=True)
class LaminarFamily:
    sets: tuple  # (mask, f_value), children before parents is not assumed
    parent: tuple  # index of the minimal strict superset, or None
    n: int

    def __len__(self):
        return len(self.sets)

    def vertex_set(self, i) -> frozenset:
        return mask_vertices(self.sets[i][0])

    def children(self, i) -> list:
        return [j for j, p in enumerate(self.parent) if p == i]

    def roots(self) -> list:
        return [j for j, p in enumerate(self.parent) if p is None]

    def alpha(self, i) -> int:
        S = self.sets[i][0]
        return sum(1 for T, _ in self.sets if T & ~S == 0)


def build_forest(sets, n) -> LaminarFamily:
    sets = list(sets)
    for i, (A, _) in enumerate(sets):
        for B, _ in sets[i + 1:]:
            if _crossing(A, B):
                raise ValueError(f"not laminar: {sorted(mask_vertices(A))} crosses "
                                 f"{sorted(mask_vertices(B))}")
    parent = []
    for i, (A, _) in enumerate(sets):
        best = None
        for j, (B, _) in enumerate(sets):
            if j != i and A & ~B == 0 and A != B:
                if best is None or bin(B).count("1") < bin(sets[best][0]).count("1"):
                    best = j
        parent.append(best)
    return LaminarFamily(tuple(sets), tuple(parent), n)


def uncross(A: int, B: int, x, f: RequirementFn, ends) -> tuple:
    """Replace crossing tight sets by a tight pair, preferring (A&B, A|B)."""
    def tight(S):
        return _cut_value(ends, x, S) == f.eval_mask(S)
    if tight(A & B) and tight(A | B):
        return A & B, A | B
    if tight(A & ~B) and tight(B & ~A):
        return A & ~B, B & ~A
    raise NotAVertex(f"uncrossing failed for {sorted(mask_vertices(A))}, "
                     f"{sorted(mask_vertices(B))}: requirement not skew-supermodular?")


def tight_sets(sol: VertexSolution, f: RequirementFn, ground) -> list:
    """All proper nonempty S with x(delta(S)) = f(S) > 0, as masks."""
    if ground.n > MAX_ENUM_N:
        raise ValueError(f"tight-set enumeration limited to n <= {MAX_ENUM_N}")
    ends = {e: ground.members(e) for e in sol.x}
    out = []
    for mask in range(1, (1 << ground.n) - 1):
        need = f.eval_mask(mask)
        if need > 0 and _cut_value(ends, sol.x, mask) == need:
            out.append(mask)
    return out


def extract_laminar_basis(sol: VertexSolution, f: RequirementFn, ground,
                          candidates=None) -> LaminarFamily:
    """Laminar family of tight sets with independent cut rows that pin x down.

    Candidates (all tight sets by default) are scanned by increasing size.
    A set is kept if it crosses nothing already kept and adds rank.  A set
    that would add rank but crosses a kept set is uncrossed against it and
    the two resulting tight sets are queued.  Pass ``candidates`` to certify
    from a partial list of tight sets (e.g. the oracle's rows when n is too
    large to enumerate).
    """
    x = sol.x
    edges = sorted(x)
    if any(not 0 < v < 1 for v in x.values()):
        raise NotFullyFractional("solution has coordinates at 0 or 1")
    ends = {e: ground.members(e) for e in edges}
    col = {e: j for j, e in enumerate(edges)}
    m = len(edges)

    def row(mask):
        vec = [0] * m
        for e, members in ends.items():
            inside = sum(1 for a in members if mask >> a & 1)
            if 0 < inside < len(members):
                vec[col[e]] = 1
        return vec

    if candidates is None:
        candidates = tight_sets(sol, f, ground)
    heap = [(bin(S).count("1"), S) for S in candidates]
    heapq.heapify(heap)
    seen = set(candidates)
    space = RowSpace(m)
    kept: list = []
    while heap and space.rank < m:
        _, S = heapq.heappop(heap)
        vec = row(S)
        if not any(space.reduce(vec)):
            continue
        other = next((A for A in kept if _crossing(A, S)), None)
        if other is None:
            space.add(vec)
            kept.append(S)
            continue
        for T in uncross(S, other, x, f, ends):
            if T not in seen and T and T != (1 << ground.n) - 1:
                seen.add(T)
                heapq.heappush(heap, (bin(T).count("1"), T))
    if space.rank < m:
        raise NotAVertex(f"only {space.rank} independent tight sets for {m} edges")

    fam = build_forest([(S, f.eval_mask(S)) for S in kept], ground.n)
    A = [row(S) for S, _ in fam.sets]
    y = solve_square(A, [v for _, v in fam.sets])
    if y != [x[e] for e in edges]:
        raise NotAVertex("laminar system does not reproduce x")
    return fam


def laminar_certificate(fam: LaminarFamily) -> tuple:
    return tuple(Tight("cut", fam.vertex_set(i)) for i in range(len(fam)))


# ---------------------------------------------------------------- counting checks

@dataclass(frozen=True)
class EdgePartition:
    cc: frozenset
    cp: frozenset
    po: frozenset
    co: frozenset
    alpha: int
    beta: int

    @property
    def gamma(self) -> int:
        return len(self.cc) + len(self.cp)


def _inside(members, mask):
    return all(mask >> a & 1 for a in members)


def edge_partition(fam: LaminarFamily, i: int, x, ground) -> EdgePartition:
    S = fam.sets[i][0]
    kids = [fam.sets[j][0] for j in fam.children(i)]

    def child_of(a):
        for k, C in enumerate(kids):
            if C >> a & 1:
                return k
        return None

    cc, cp, po, co = set(), set(), set(), set()
    beta = 0
    for e in x:
        a, b = ground.members(e)
        ina, inb = S >> a & 1, S >> b & 1
        if ina and inb:
            beta += 1
            ca, cb = child_of(a), child_of(b)
            if ca is not None and cb is not None and ca != cb:
                cc.add(e)
            elif (ca is None) != (cb is None):
                cp.add(e)
        elif ina or inb:
            inner = a if ina else b
            (co if child_of(inner) is not None else po).add(e)
    return EdgePartition(frozenset(cc), frozenset(cp), frozenset(po), frozenset(co),
                         fam.alpha(i), beta)


class CheckFailure(NamedTuple):
    check: str
    set: frozenset
    lhs: object
    rhs: object

    def __str__(self):
        return f"{self.check} fails at {sorted(self.set)}: {self.lhs} != {self.rhs}"


def check_counting_identity(fam: LaminarFamily, sol: VertexSolution, ground,
                            partition: Callable = edge_partition) -> Optional[CheckFailure]:
    """Per internal set S with children C_i:
    sum f(C_i) - f(S) = 2 x(E_cc) + x(E_cp) - x(E_po), and
    beta(S) = gamma(S) + sum beta(C_i); over roots, sum alpha(R) = |family|."""
    x = sol.x
    parts = {i: partition(fam, i, x, ground) for i in range(len(fam))}
    for i in range(len(fam)):
        kids = fam.children(i)
        if not kids:
            continue
        p = parts[i]
        lhs = sum(fam.sets[j][1] for j in kids) - fam.sets[i][1]
        rhs = (2 * sum((x[e] for e in p.cc), Fraction(0)) + sum((x[e] for e in p.cp), Fraction(0))
               - sum((x[e] for e in p.po), Fraction(0)))
        if lhs != rhs:
            return CheckFailure("eq3", fam.vertex_set(i), lhs, rhs)
        beta_rhs = p.gamma + sum(parts[j].beta for j in kids)
        if p.beta != beta_rhs:
            return CheckFailure("beta", fam.vertex_set(i), p.beta, beta_rhs)
    total = sum(fam.alpha(r) for r in fam.roots())
    if total != len(fam):
        return CheckFailure("alpha_root", frozenset(), total, len(fam))
    return None


def check_unique_child(fam: LaminarFamily, sol: VertexSolution, ground) -> Optional[CheckFailure]:
    """A set with exactly one child must own at least two edge endpoints."""
    for i in range(len(fam)):
        kids = fam.children(i)
        if len(kids) != 1:
            continue
        own = fam.sets[i][0] & ~fam.sets[kids[0]][0]
        count = sum(1 for e in sol.x for a in ground.members(e) if own >> a & 1)
        if count < 2:
            return CheckFailure("unique_child", fam.vertex_set(i), count, ">= 2")
    return None


def claim_report(fam: LaminarFamily, sol: VertexSolution, ground) -> list:
    """Diagnostic table of f(S) >= alpha(S) - beta(S); asserts nothing."""
    rows = []
    for i in range(len(fam)):
        S, fv = fam.sets[i]
        alpha = fam.alpha(i)
        beta = sum(1 for e in sol.x if _inside(ground.members(e), S))
        rows.append({"S": sorted(mask_vertices(S)), "f": fv, "alpha": alpha, "beta": beta,
                     "satisfied": fv >= alpha - beta})
    return rows


def check_half_edge(sol: VertexSolution) -> Optional[dict]:
    """None if some coordinate is >= 1/2, else a dump of the offending vertex."""
    if sol.max_coordinate() >= HALF:
        return None
    return {
        "max": format_rational(sol.max_coordinate()),
        "x": {str(e): format_rational(v) for e, v in sorted(sol.x.items())},
        "basis": [[t.kind, sorted(t.key) if t.kind == "cut" else t.key]
                  for t in sol.basis_certificate],
    }


# ---------------------------------------------------------------- whole-vertex report

@dataclass
class VertexCertificate:
    vertex_ok: bool
    half_edge_max: Fraction
    fractional_edges: int
    laminar_size: Optional[int] = None
    laminar_rank: Optional[int] = None
    eq3: Optional[bool] = None
    beta: Optional[bool] = None
    alpha_root: Optional[bool] = None
    unique_child: Optional[bool] = None
    claim_table: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    partial: bool = False

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "vertex_ok": self.vertex_ok,
            "half_edge": {"max": format_rational(self.half_edge_max),
                          "ok": self.half_edge_max >= HALF},
            "fractional_edges": self.fractional_edges,
            "laminar": {"size": self.laminar_size, "rank": self.laminar_rank,
                        "partial": self.partial},
            "identities": {"eq3": self.eq3, "beta": self.beta, "alpha_root": self.alpha_root},
            "unique_child": self.unique_child,
            "claim_table": self.claim_table,
            "failures": self.failures,
        }


def certify_iteration(sol: VertexSolution, f: RequirementFn, ground) -> VertexCertificate:
    """Full certification of one LP vertex from the rounding loop."""
    from .exactlp import certify_vertex

    problem = certify_vertex(sol)
    cert = VertexCertificate(problem is None, sol.max_coordinate(), 0)
    if problem:
        cert.failures.append(f"vertex: {problem}")
    if sol.max_coordinate() < HALF:
        cert.failures.append("half_edge")
    frac, g = peel(sol, f, ground)
    cert.fractional_edges = len(frac.x)
    if not frac.x:
        return cert
    if frac.max_coordinate() < HALF:
        cert.failures.append("half_edge (fractional part)")
    if any(len(ground.members(e)) != 2 for e in frac.x):
        return cert
    candidates = None
    if ground.n > MAX_ENUM_N:
        cert.partial = True
        ends = {e: ground.members(e) for e in frac.x}
        candidates = [m for m in (vertex_mask(t) for t in sol.tight_rows)
                      if g.eval_mask(m) > 0 and _cut_value(ends, frac.x, m) == g.eval_mask(m)]
    try:
        fam = extract_laminar_basis(frac, g, ground, candidates)
    except NotAVertex as exc:
        cert.failures.append(f"laminar: {exc}")
        return cert
    cert.laminar_size = len(fam)
    space = RowSpace(len(frac.x))
    for i in range(len(fam)):
        space.add(_row_of(fam.sets[i][0], frac.x, ground))
    cert.laminar_rank = space.rank
    if cert.laminar_rank != len(frac.x):
        cert.failures.append("laminar rank")
    bad = check_counting_identity(fam, frac, ground)
    cert.eq3 = cert.beta = cert.alpha_root = True
    if bad is not None:
        setattr(cert, bad.check, False)
        cert.failures.append(str(bad))
    bad = check_unique_child(fam, frac, ground)
    cert.unique_child = bad is None
    if bad is not None:
        cert.failures.append(str(bad))
    cert.claim_table = claim_report(fam, frac, ground)
    return cert


def _row_of(mask, x, ground):
    edges = sorted(x)
    out = []
    for e in edges:
        inside = sum(1 for a in ground.members(e) if mask >> a & 1)
        out.append(1 if 0 < inside < len(ground.members(e)) else 0)
    return out
