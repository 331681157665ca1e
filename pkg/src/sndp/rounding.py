"""Iterated rounding and the end-to-end EC / Elem / Hyper solvers."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from . import connectivity as conn
from .exactlp import VertexSolution, certify_vertex, cutting_plane_solve
from .instances import (
    ElemInstance, Graph, Hypergraph, PairRequirements, dplus, format_rational,
)
from .reductions import (
    elem_solution_cost, elem_to_hyper, hyper_from_bipartite_edges, hyper_to_graph_cover,
    hyper_to_nw_elem, nw_elem_to_ew_elem, pull_back_elem,
)
from .requirements import PairwiseMax, RequirementFn, is_trivial, residual

log = logging.getLogger(__name__)
HALF = Fraction(1, 2)


class InfeasibleInstance(Exception):
    def __init__(self, pair, have, need):
        super().__init__(f"pair {pair} has connectivity {have} < requirement {need}")
        self.pair, self.have, self.need = pair, have, need


class TheoremViolated(AssertionError):
    """A vertex solution with every coordinate below 1/2; carries a dump."""

    def __init__(self, message, dump):
        super().__init__(message)
        self.dump = dump


@dataclass
class IterationRecord:
    lp_value: Fraction
    vertex: VertexSolution
    rounded: frozenset
    dropped: frozenset
    requirement: RequirementFn  # the residual requirement this LP covered
    rows_generated: int = 0

    @property
    def max_coord(self) -> Fraction:
        return self.vertex.max_coordinate()


@dataclass
class RoundingTrace:
    iterations: list = field(default_factory=list)
    initial_lp_value: Fraction = Fraction(0)
    final_edges: frozenset = frozenset()
    total_cost: Fraction = Fraction(0)


@dataclass(frozen=True)
class Guarantee:
    path: str  # "exact-2" | "halving-dplus" | "free"
    factor: Fraction


@dataclass
class SolveResult:
    edges: frozenset
    cost: Fraction
    lower_bound: Fraction
    trace: RoundingTrace
    guarantee: Guarantee
    ground: object = None  # the graph the rounding loop ran on
    feasibility_checked: bool = False

    def to_report(self) -> dict:
        return {
            "cost": format_rational(self.cost),
            "lp_lower_bound": format_rational(self.lower_bound),
            "edges": sorted(self.edges),
            "iterations": [
                {"lp_value": format_rational(it.lp_value), "rounded": sorted(it.rounded),
                 "dropped": sorted(it.dropped), "max_coord": format_rational(it.max_coord)}
                for it in self.trace.iterations
            ],
            "guarantee": {"factor": format_rational(self.guarantee.factor),
                          "path": self.guarantee.path},
            "feasibility_checked": self.feasibility_checked,
        }


def jain_round(ground, f: RequirementFn, costs: Mapping, *,
               variables: Optional[Iterable[int]] = None, certify: bool = True):
    """Iterated rounding.  Each round solves the residual LP to a vertex over
    the surviving edges, drops edges at 0 and buys every edge at >= 1/2.

    Returns ``(edge set, RoundingTrace)``.  Raises ``TheoremViolated`` if a
    vertex has no coordinate >= 1/2.
    """
    remaining = set(range(ground.num_edges) if variables is None else variables)
    chosen: set = set()
    g = f
    tags: set = set()
    trace = RoundingTrace()
    first = True
    while not is_trivial(g):
        if not remaining:
            raise conn.FlowError("residual requirement left with no edges")
        sol, generated = cutting_plane_solve(ground, g, costs, variables=remaining,
                                             warm_tags=tags)
        tags.update(row.tag for row in sol.lp.rows)
        if first:
            trace.initial_lp_value = sol.objective_value
            first = False
        if certify:
            problem = certify_vertex(sol)
            if problem:
                raise AssertionError(f"solver returned a non-vertex: {problem}")
        if sol.max_coordinate() < HALF:
            raise TheoremViolated(
                f"vertex with max coordinate {sol.max_coordinate()} < 1/2",
                {"x": {e: str(v) for e, v in sol.x.items()},
                 "basis": [(t.kind, sorted(t.key) if t.kind == "cut" else t.key)
                           for t in sol.basis_certificate]})
        rounded = frozenset(e for e, v in sol.x.items() if v >= HALF)
        dropped = frozenset(e for e, v in sol.x.items() if v == 0)
        trace.iterations.append(IterationRecord(sol.objective_value, sol, rounded, dropped,
                                                g, generated))
        log.debug("lp %s, rounded %s, dropped %s", sol.objective_value, sorted(rounded),
                  sorted(dropped))
        chosen |= rounded
        remaining -= rounded | dropped
        g = residual(g, ground, rounded)
    trace.final_edges = frozenset(chosen)
    trace.total_cost = sum((Fraction(costs[e]) for e in chosen), Fraction(0))
    if trace.total_cost > 2 * trace.initial_lp_value:
        raise TheoremViolated("cost exceeds twice the LP value",
                              {"cost": str(trace.total_cost),
                               "lp": str(trace.initial_lp_value)})
    return trace.final_edges, trace


def _check_pairs(reqs: PairRequirements, connectivity):
    for pair, r in reqs.items():
        have = connectivity(*pair)
        if have < r:
            raise InfeasibleInstance(pair, have, r)


def _empty(ground=None) -> SolveResult:
    return SolveResult(frozenset(), Fraction(0), Fraction(0), RoundingTrace(),
                       Guarantee("exact-2", Fraction(2)), ground, True)


def solve_ecsndp(g: Graph, reqs: PairRequirements, *, certify: bool = True) -> SolveResult:
    everything = range(g.num_edges)
    _check_pairs(reqs, lambda u, v: conn.edge_connectivity(g, everything, u, v))
    if reqs.rmax == 0:
        return _empty(g)
    edges, trace = jain_round(g, PairwiseMax(reqs, g.n), g.costs(), certify=certify)
    _check_pairs(reqs, lambda u, v: conn.edge_connectivity(g, edges, u, v))
    return SolveResult(edges, trace.total_cost, trace.initial_lp_value, trace,
                       Guarantee("exact-2", Fraction(2)), g, True)


def solve_elemsndp(inst: ElemInstance, *, certify: bool = True) -> SolveResult:
    """Element connectivity via the hypergraph route: each non-terminal becomes
    a hyperedge costing its weight, the hypergraph is solved, and the chosen
    hyperedges are pulled back to original edges."""
    everything = range(inst.graph.num_edges)
    _check_pairs(inst.requirements,
                 lambda u, v: conn.element_connectivity(inst, everything, u, v))
    if inst.requirements.rmax == 0:
        return _empty()
    h, hreqs, rmap = elem_to_hyper(inst)
    res = solve_hypersndp(h, hreqs, certify=certify)
    edges = frozenset(pull_back_elem(inst, rmap, res.edges))
    _check_pairs(inst.requirements, lambda u, v: conn.element_connectivity(inst, edges, u, v))
    return SolveResult(edges, elem_solution_cost(inst, edges), res.lower_bound, res.trace,
                       res.guarantee, res.ground, True)


def hyper_lp_value(h: Hypergraph, reqs: PairRequirements) -> Fraction:
    sol, _ = cutting_plane_solve(h, PairwiseMax(reqs, h.n), h.costs())
    return sol.objective_value


def solve_hypersndp(h: Hypergraph, reqs: PairRequirements, *, certify: bool = True) -> SolveResult:
    """Exact factor 2 when every costed hyperedge has size 2; otherwise the
    bipartite node-weighted route with weight halving, factor d+."""
    everything = range(h.num_edges)
    _check_pairs(reqs, lambda u, v: conn.hyperedge_connectivity(h, everything, u, v))
    if reqs.rmax == 0:
        return _empty()
    dp = dplus(h)
    if dp == 0:
        return SolveResult(frozenset(everything), Fraction(0), Fraction(0), RoundingTrace(),
                           Guarantee("free", Fraction(1)), None, True)
    if dp == 2:
        graph, g, gmap = hyper_to_graph_cover(h, reqs)
        chosen, trace = jain_round(graph, g, graph.costs(), certify=certify)
        back = {j: i for i, j in gmap.edges.items()}
        edges = frozenset({back[j] for j in chosen} | set(gmap.preincluded))
        lower = trace.initial_lp_value
        guarantee = Guarantee("exact-2", Fraction(2))
        ground = graph
    else:
        bip, _ = hyper_to_nw_elem(h, reqs)
        ew, _, loss = nw_elem_to_ew_elem(bip)
        res = solve_elemsndp(ew, certify=certify)
        edges = frozenset(hyper_from_bipartite_edges(h, bip, res.edges))
        trace = res.trace
        lower = hyper_lp_value(h, reqs)
        guarantee = Guarantee("halving-dplus", 2 * loss)
        ground = res.ground
    _check_pairs(reqs, lambda u, v: conn.hyperedge_connectivity(h, edges, u, v))
    cost = sum((h.cost(e) for e in edges), Fraction(0))
    return SolveResult(edges, cost, lower, trace, guarantee, ground, True)


def solve(instance, *, certify: bool = True) -> SolveResult:
    kind = instance.kind
    if kind == "ec":
        return solve_ecsndp(instance.graph, instance.requirements, certify=certify)
    if kind == "elem":
        return solve_elemsndp(instance, certify=certify)
    return solve_hypersndp(instance.hypergraph, instance.requirements, certify=certify)
