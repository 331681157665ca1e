"""Transformations between the edge, element and hypergraph variants.

Every reduction returns a ``ReductionMap`` that records where each costed
object went, so solutions can be pulled back to the source instance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .instances import (
    Edge, ElemInstance, Graph, Hyperedge, Hypergraph, PairRequirements, format_rational,
)
from .requirements import PairwiseMax, residual


class ReductionError(ValueError):
    pass


@dataclass(frozen=True)
class ReductionMap:
    direction: str
    edges: dict = field(default_factory=dict)     # source edge/hyperedge id -> target id
    nodes: dict = field(default_factory=dict)     # source vertex -> target vertex or hyperedge id
    dummies: dict = field(default_factory=dict)   # (non-terminal, edge id) -> dummy vertex
    preincluded: tuple = ()                       # target-free objects always in the solution
    source_costs: dict = field(default_factory=dict)
    target_costs: dict = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "edges": {str(k): v for k, v in self.edges.items()},
            "nodes": {str(k): v for k, v in self.nodes.items()},
            "dummies": [{"node": a, "edge": b, "dummy": d} for (a, b), d in self.dummies.items()],
            "preincluded": list(self.preincluded),
            "source_costs": {str(k): format_rational(v) for k, v in self.source_costs.items()},
            "target_costs": {str(k): format_rational(v) for k, v in self.target_costs.items()},
            "note": self.note,
        }


def elem_to_hyper(inst: ElemInstance):
    """Replace every non-terminal v by a hyperedge over fresh dummy vertices,
    one dummy per edge incident to v.

    New vertex ids: terminals in increasing order, then dummies in
    (non-terminal, edge id) order.  Hyperedge ``i < m`` is original edge
    ``i`` with its cost; hyperedge ids ``>= m`` are the non-terminal
    hyperedges, costing the node weight (0 when unweighted).  A non-terminal
    of degree <= 1 gets no hyperedge since it can carry no path.
    """
    g = inst.graph
    for v in inst.node_weights:
        if v in inst.terminals:
            raise ReductionError(f"weight on terminal {v}")
    new_id = {t: i for i, t in enumerate(sorted(inst.terminals))}
    dummies = {}
    nxt = len(new_id)
    for v in sorted(inst.nonterminals):
        for e in inst.incident(v):
            dummies[(v, e)] = nxt
            nxt += 1

    def end(a, e):
        return new_id[a] if a in new_id else dummies[(a, e)]

    hyper = [Hyperedge(frozenset((end(e.u, i), end(e.v, i))), e.cost)
             for i, e in enumerate(g.edges)]
    edges = {i: i for i in range(g.num_edges)}
    nodes = dict(new_id)
    for v in sorted(inst.nonterminals):
        ds = [dummies[(v, e)] for e in inst.incident(v)]
        if len(ds) >= 2:
            nodes[v] = len(hyper)
            hyper.append(Hyperedge(frozenset(ds), inst.node_weights.get(v, Fraction(0))))
    h = Hypergraph(nxt, hyper)
    reqs = PairRequirements({(new_id[u], new_id[v]): r for (u, v), r in inst.requirements.items()})
    src = g.costs()
    src.update({("node", v): w for v, w in inst.node_weights.items()})
    rmap = ReductionMap("elem->hyper", edges, nodes, dummies, (), src, h.costs(),
                        "non-terminal v becomes hyperedge nodes[v]; terminals keep order")
    return h, reqs, rmap


def hyper_to_graph_cover(h: Hypergraph, reqs: PairRequirements):
    """Pre-include every hyperedge of size > 2 (all must be free) and cover the
    residual requirement g = f - |delta_E'| by the graph of size-2 hyperedges.

    ``rmap.edges`` maps each size-2 hyperedge id to its graph edge id.
    """
    big = [i for i, e in enumerate(h.hyperedges) if len(e.vertices) > 2]
    for i in big:
        if h.hyperedges[i].cost > 0:
            raise ReductionError(
                f"hyperedge {i} has size {len(h.hyperedges[i].vertices)} and positive cost")
    small = [i for i, e in enumerate(h.hyperedges) if len(e.vertices) == 2]
    graph = Graph(h.n, [Edge(*h.members(i), h.cost(i)) for i in small])
    g = residual(PairwiseMax(reqs, h.n), h, big)
    rmap = ReductionMap("hyper->graph-cover", {i: j for j, i in enumerate(small)}, {}, {},
                        tuple(big), h.costs(), graph.costs(),
                        "size > 2 hyperedges are free and pre-included")
    return graph, g, rmap


def hyper_to_nw_elem(h: Hypergraph, reqs: PairRequirements):
    """Bipartite incidence representation: vertex z_e = n + i for hyperedge i,
    joined by free edges to its members; z_e weighs c_e; V are terminals."""
    n = h.n
    edges = []
    weights = {}
    for i, e in enumerate(h.hyperedges):
        z = n + i
        weights[z] = e.cost
        for a in sorted(e.vertices):
            edges.append(Edge(a, z, Fraction(0)))
    inst = ElemInstance(Graph(n + h.num_edges, edges), frozenset(range(n)), reqs, weights)
    rmap = ReductionMap("hyper->nw-elem", {}, {i: n + i for i in range(h.num_edges)}, {}, (),
                        h.costs(), {("node", z): w for z, w in weights.items()},
                        "hyperedge i becomes non-terminal n + i")
    return inst, rmap


def nw_elem_to_ew_elem(inst: ElemInstance):
    """Move each non-terminal weight w onto its incident edges as w/2 each.

    Returns ``(instance, map, loss_factor)`` with loss_factor the largest
    degree of a weighted non-terminal over 2 (1 if nothing is weighted).
    Weighted non-terminals of degree <= 1 cannot carry a path; their weight
    is dropped with a warning.
    """
    g = inst.graph
    extra = {i: Fraction(0) for i in range(g.num_edges)}
    degrees = []
    for z, w in inst.node_weights.items():
        if w == 0:
            continue
        inc = inst.incident(z)
        if len(inc) <= 1:
            warnings.warn(f"non-terminal {z} has degree {len(inc)}; weight dropped")
            continue
        degrees.append(len(inc))
        for e in inc:
            extra[e] += w / 2
    edges = [Edge(e.u, e.v, e.cost + extra[i]) for i, e in enumerate(g.edges)]
    out = ElemInstance(Graph(g.n, edges), inst.terminals, inst.requirements, {})
    loss = max(Fraction(max(degrees), 2), Fraction(1)) if degrees else Fraction(1)
    rmap = ReductionMap("nw-elem->ew-elem", {i: i for i in range(g.num_edges)}, {}, {}, (),
                        elem_cost_table(inst), out.graph.costs(),
                        "per-solution cost is only bounded when every weighted non-terminal "
                        "in use keeps >= 2 selected edges; pullback prunes the rest")
    return out, rmap, loss


def elem_cost_table(inst: ElemInstance) -> dict:
    table = inst.graph.costs()
    table.update({("node", v): w for v, w in inst.node_weights.items()})
    return table


def elem_solution_cost(inst: ElemInstance, edges: Iterable[int]) -> Fraction:
    """Edge costs plus the weight of every non-terminal touched by a chosen edge."""
    edges = set(edges)
    total = sum((inst.graph.edges[e].cost for e in edges), Fraction(0))
    for v, w in inst.node_weights.items():
        if any(e in edges for e in inst.incident(v)):
            total += w
    return total


def prune_weighted_dead_ends(inst: ElemInstance, edges: Iterable[int]) -> set:
    """Drop edges reaching a weighted non-terminal that keeps fewer than two
    selected edges; such a node cannot lie on any path."""
    edges = set(edges)
    changed = True
    while changed:
        changed = False
        for v, w in inst.node_weights.items():
            if w == 0:
                continue
            used = [e for e in inst.incident(v) if e in edges]
            if len(used) == 1:
                edges.discard(used[0])
                changed = True
    return edges


def pull_back_elem(inst: ElemInstance, rmap: ReductionMap, hyper_edges: Iterable[int]) -> set:
    """Original edges of an elem_to_hyper solution.

    An edge survives only if every non-terminal endpoint has its hyperedge
    in the solution; otherwise it ends at an isolated dummy and carries no
    path.  Weighted dead ends are then pruned.
    """
    hyper_edges = set(hyper_edges)
    m = inst.graph.num_edges
    keep = set()
    for e in hyper_edges:
        if e >= m:
            continue
        ends = inst.graph.members(e)
        if all(v in inst.terminals or rmap.nodes.get(v) in hyper_edges for v in ends):
            keep.add(e)
    return prune_weighted_dead_ends(inst, keep)


def hyper_from_bipartite_edges(h: Hypergraph, bip: ElemInstance, edges: Iterable[int]) -> set:
    """Hyperedges whose node z_e keeps at least two selected incident edges."""
    edges = set(edges)
    chosen = set()
    for i in range(h.num_edges):
        if sum(1 for e in bip.incident(h.n + i) if e in edges) >= 2:
            chosen.add(i)
    return chosen


def harmonic(k: int) -> Fraction:
    return sum((Fraction(1, i) for i in range(1, k + 1)), Fraction(0))


def zhao_bound(dplus: int, rmax: int) -> Fraction:
    """dplus times the rmax-th harmonic number, exactly."""
    if dplus < 1 or rmax < 1:
        raise ValueError("need dplus >= 1 and rmax >= 1")
    return dplus * harmonic(rmax)

