"""Exact max-flow / min-cut and the connectivity notions built on it.

Capacities may be ints or Fractions; arithmetic stays exact.  Infinite
capacity is written ``None`` on an arc and realized as one more than the
sum of all finite capacities.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .instances import ElemInstance, Graph, Hypergraph, PairRequirements, mask_vertices


@dataclass(frozen=True)
class CapacitatedNetwork:
    """Directed network.  ``node_capacities`` are realized by node splitting:
    node ``v`` becomes ``v`` (in) and ``n + v`` (out) joined by an arc of
    the given capacity; the cut certificate then refers to split ids."""

    n: int
    arcs: tuple
    source: int
    sink: int
    node_capacities: Mapping = field(default_factory=dict)


@dataclass(frozen=True)
class CutCertificate:
    side: frozenset
    value: object


class FlowError(ValueError):
    pass


def _split(net: CapacitatedNetwork):
    if not net.node_capacities:
        return net.n, list(net.arcs), net.source, net.sink
    n = net.n
    caps = net.node_capacities
    out_id = {v: (n + v if v in caps else v) for v in range(n)}
    arcs = [(out_id[t], h, c) for t, h, c in net.arcs]
    arcs += [(v, n + v, c) for v, c in caps.items()]
    return 2 * n, arcs, net.source, out_id[net.sink] if net.sink in caps else net.sink


def max_flow_min_cut(net: CapacitatedNetwork):
    """Shortest-augmenting-path max flow.  Returns ``(value, CutCertificate)``;
    the cut is the set of nodes reachable from the source in the final
    residual network, and its capacity is asserted equal to the flow."""
    if net.source == net.sink:
        raise FlowError("source equals sink")
    n, arcs, s, t = _split(net)
    finite = [c for _, _, c in arcs if c is not None]
    if any(c < 0 for c in finite):
        raise FlowError("negative capacity")
    inf = 1 + sum(finite)
    arcs = [(a, b, inf if c is None else c) for a, b, c in arcs]

    adj = [[] for _ in range(n)]
    head, cap = [], []
    for a, b, c in arcs:
        adj[a].append(len(head)); head.append(b); cap.append(c)
        adj[b].append(len(head)); head.append(a); cap.append(0)

    value = 0
    while True:
        pred = [-1] * n
        pred[s] = -2
        queue = deque([s])
        while queue and pred[t] == -1:
            a = queue.popleft()
            for k in adj[a]:
                b = head[k]
                if pred[b] == -1 and cap[k] > 0:
                    pred[b] = k
                    queue.append(b)
        if pred[t] == -1:
            break
        path = []
        b = t
        while b != s:
            k = pred[b]
            path.append(k)
            b = head[k ^ 1]
        push = min(cap[k] for k in path)
        for k in path:
            cap[k] -= push
            cap[k ^ 1] += push
        value += push

    side = frozenset(v for v in range(n) if pred[v] != -1)
    cut_value = sum((c for a, b, c in arcs if a in side and b not in side), 0)
    assert cut_value == value, "max-flow/min-cut duality violated"
    return value, CutCertificate(side, value)


def _members_network(n, weighted_members, s, t) -> CapacitatedNetwork:
    """Network whose s-t min cut is min over S of the weight of members crossing S.

    Pairs become two opposite arcs; larger hyperedges get an in/out node pair
    with the weight on the connecting arc and infinite arcs to the members.
    """
    arcs = []
    extra = n
    for members, w in weighted_members:
        if w == 0:
            continue
        if len(members) == 2:
            a, b = members
            arcs += [(a, b, w), (b, a, w)]
        else:
            e_in, e_out = extra, extra + 1
            extra += 2
            arcs.append((e_in, e_out, w))
            for a in members:
                arcs += [(a, e_in, None), (e_out, a, None)]
    return CapacitatedNetwork(extra, tuple(arcs), s, t)


def cut_capacity(n: int, weighted_members, s: int, t: int):
    value, cut = max_flow_min_cut(_members_network(n, weighted_members, s, t))
    return value, frozenset(v for v in cut.side if v < n)


def edge_connectivity(g: Graph, F: Iterable[int], u: int, v: int) -> int:
    return cut_capacity(g.n, [(g.members(e), 1) for e in F], u, v)[0]


def element_connectivity(inst: ElemInstance, F: Iterable[int], u: int, v: int) -> int:
    """Max number of u-v paths in (V, F) sharing no edge and no non-terminal."""
    if u not in inst.terminals or v not in inst.terminals:
        raise FlowError(f"{u if u not in inst.terminals else v} is not a terminal")
    if u == v:
        raise FlowError("source equals sink")
    g = inst.graph
    n = g.n
    split = inst.nonterminals
    # non-terminal w: in-node w, out-node n + w
    out = {w: (n + w if w in split else w) for w in range(n)}
    arcs = []
    for e in F:
        a, b = g.members(e)
        arcs += [(out[a], b, 1), (out[b], a, 1)]
    arcs += [(w, n + w, 1) for w in split]
    value, _ = max_flow_min_cut(CapacitatedNetwork(2 * n, tuple(arcs), u, v))
    return value


def hyperedge_connectivity(h: Hypergraph, F: Iterable[int], u: int, v: int) -> int:
    """min over u-v separating S of the number of hyperedges of F crossing S.

    Computed on the direct hyperedge network (one capacity-1 arc per
    hyperedge), which is independent of the bipartite element route.
    """
    if u == v:
        raise FlowError("source equals sink")
    return cut_capacity(h.n, [(h.members(e), 1) for e in F], u, v)[0]


def crossing_count(members_list, mask: int) -> int:
    count = 0
    for members in members_list:
        inside = sum(1 for a in members if mask >> a & 1)
        if 0 < inside < len(members):
            count += 1
    return count


def _violations(ground, x, fixed_members, reqs):
    from .requirements import PairwiseMax

    n = ground.n
    weighted = [(ground.members(e), Fraction(val)) for e, val in x.items()]
    weighted += [(tuple(m), 1) for m in fixed_members]
    f = PairwiseMax(reqs, n)
    for (u, v), r in reqs.items():
        value, side = cut_capacity(n, weighted, u, v)
        if value < r:
            mask = sum(1 << w for w in side)
            deficit = f.eval_mask(mask) - value
            yield side, Fraction(deficit)


def find_violated_cut(ground, x: Mapping[int, Fraction], fixed: Iterable[int],
                      reqs: PairRequirements, *, fixed_members=()) -> Optional[tuple]:
    """First set S, over pairs in lexicographic order, whose cut under x plus
    the fixed edges (capacity 1 each) falls short of max r(uv) over pairs
    split by S.  Returns ``(S, deficit)`` or ``None``.

    ``fixed_members`` adds fixed hyperedges given by vertex tuples, for
    fixed sets that live on a different ground (e.g. pre-included
    zero-cost hyperedges when covering by a graph).
    """
    members = [ground.members(e) for e in fixed] + list(fixed_members)
    return next(_violations(ground, x, members, reqs), None)


def all_violated_cuts(ground, x, fixed_members, reqs) -> list:
    """Every per-pair violated cut, in the same pair order."""
    return list(_violations(ground, x, list(fixed_members), reqs))


def exhaustive_violated_cut(ground, x, fixed_members, f) -> Optional[tuple]:
    """Brute-force separation over all 2^n - 2 proper subsets (small n only)."""
    members = [(ground.members(e), Fraction(val)) for e, val in x.items()]
    fixed = list(fixed_members)
    for mask in range(1, (1 << ground.n) - 1):
        need = f.eval_mask(mask)
        if need <= 0:
            continue
        have = sum((w for m, w in members if _crosses(m, mask)), Fraction(0))
        have += crossing_count(fixed, mask)
        if have < need:
            return mask_vertices(mask), need - have
    return None


def _crosses(members, mask) -> bool:
    inside = sum(1 for a in members if mask >> a & 1)
    return 0 < inside < len(members)
