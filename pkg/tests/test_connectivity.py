import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from sndp import connectivity as conn
from sndp.connectivity import CapacitatedNetwork, FlowError, max_flow_min_cut
from sndp.instances import (
    ElemInstance, Hyperedge, Hypergraph, PairRequirements, generate, vertex_mask,
)
from sndp.reductions import elem_to_hyper
from sndp.requirements import PairwiseMax

from conftest import graph

HALF = Fraction(1, 2)


def undirected(pairs, cap):
    return tuple(arc for u, v in pairs for arc in ((u, v, cap), (v, u, cap)))


def brute_min_cut(n, members, u, v):
    """Min over S containing u but not v of the number of member sets split by S."""
    best = None
    for mask in range(1 << n):
        if mask >> u & 1 and not mask >> v & 1:
            k = sum(1 for ms in members if 0 < sum(mask >> a & 1 for a in ms) < len(ms))
            best = k if best is None else min(best, k)
    return best


def test_single_arc():
    value, cut = max_flow_min_cut(CapacitatedNetwork(2, ((0, 1, Fraction(7, 2)),), 0, 1))
    assert value == Fraction(7, 2)
    assert cut.side == frozenset({0}) and cut.value == value


def test_two_parallel_paths():
    net = CapacitatedNetwork(4, ((0, 1, 1), (1, 3, 1), (0, 2, 1), (2, 3, 1)), 0, 3)
    assert max_flow_min_cut(net)[0] == 2


def test_half_capacity_four_cycle():
    arcs = undirected([(0, 1), (1, 2), (2, 3), (3, 0)], HALF)
    value, cut = max_flow_min_cut(CapacitatedNetwork(4, arcs, 0, 2))
    assert value == 1
    assert cut.side == frozenset({0})
    crossing = [a for a in arcs if a[0] in cut.side and a[1] not in cut.side]
    assert len(crossing) == 2 and all(c == HALF for _, _, c in crossing)


def test_source_equals_sink_rejected():
    with pytest.raises(FlowError):
        max_flow_min_cut(CapacitatedNetwork(2, ((0, 1, 1),), 0, 0))


def test_node_capacity_by_splitting():
    # two paths through the same middle vertex of capacity 1
    arcs = ((0, 1, 5), (1, 2, 5), (0, 1, 5))
    net = CapacitatedNetwork(3, arcs, 0, 2, {1: 1})
    assert max_flow_min_cut(net)[0] == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_flow_equals_exhaustive_cut(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 6)
    arcs = tuple((a, b, Fraction(rng.randint(0, 6), rng.randint(1, 3)))
                 for a, b in (rng.sample(range(n), 2) for _ in range(rng.randint(1, 10))))
    value, cut = max_flow_min_cut(CapacitatedNetwork(n, arcs, 0, n - 1))
    best = min(sum((c for a, b, c in arcs if m >> a & 1 and not m >> b & 1), Fraction(0))
               for m in range(1 << n) if m & 1 and not m >> (n - 1) & 1)
    assert value == best == cut.value


def test_element_connectivity_examples():
    path = ElemInstance(graph(3, [(0, 1), (1, 2)]), frozenset({0, 2}), PairRequirements())
    assert conn.element_connectivity(path, range(2), 0, 2) == 1
    # t0, t1 joined through non-terminals 2 and 3
    two = ElemInstance(graph(4, [(0, 2), (2, 1), (0, 3), (3, 1)]), frozenset({0, 1}),
                       PairRequirements())
    assert conn.element_connectivity(two, range(4), 0, 1) == 2
    # t1 - t3 - t2 plus a direct t1 - t2 edge, all terminals
    tri = ElemInstance(graph(3, [(0, 2), (2, 1), (0, 1)]), frozenset({0, 1, 2}),
                       PairRequirements())
    assert conn.element_connectivity(tri, range(3), 0, 1) == 2


def test_shared_non_terminal_counts_once():
    bowtie = ElemInstance(graph(3, [(0, 2), (2, 1), (0, 2), (2, 1)]), frozenset({0, 1}),
                          PairRequirements())
    assert conn.element_connectivity(bowtie, range(4), 0, 1) == 1


def test_element_connectivity_rejects_non_terminal():
    inst = ElemInstance(graph(3, [(0, 1), (1, 2)]), frozenset({0, 2}), PairRequirements())
    with pytest.raises(FlowError, match="not a terminal"):
        conn.element_connectivity(inst, range(2), 0, 1)


def test_hyperedge_connectivity_examples():
    one = Hypergraph(3, [Hyperedge(frozenset({0, 1, 2}), Fraction(1))])
    assert conn.hyperedge_connectivity(one, [0], 0, 1) == 1
    twice = Hypergraph(2, [Hyperedge(frozenset({0, 1}), Fraction(1))] * 2)
    assert conn.hyperedge_connectivity(twice, [0, 1], 0, 1) == 2


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_hyperedge_connectivity_against_exhaustive_cuts(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 8)
    h = Hypergraph(n, [Hyperedge(frozenset(rng.sample(range(n), rng.randint(2, min(4, n)))), 1)
                       for _ in range(rng.randint(1, 6))])
    F = [i for i in range(h.num_edges) if rng.random() < 0.7]
    u, v = rng.sample(range(n), 2)
    expected = brute_min_cut(n, [h.members(i) for i in F], u, v)
    assert conn.hyperedge_connectivity(h, F, u, v) == expected


def test_element_connectivity_matches_after_elem_to_hyper():
    for seed in range(30):
        inst = generate("elem", n=6, m=8, terminals=3, seed=seed)
        h, _, rmap = elem_to_hyper(inst)
        m = inst.graph.num_edges
        extra = [i for i in range(m, h.num_edges)]
        for size in range(m + 1):
            for F in combinations(range(m), size):
                for a, b in combinations(sorted(inst.terminals), 2):
                    want = conn.element_connectivity(inst, F, a, b)
                    got = conn.hyperedge_connectivity(h, list(F) + extra,
                                                      rmap.nodes[a], rmap.nodes[b])
                    assert want == got


def test_violated_cut_on_partial_cycle(four_cycle):
    g = four_cycle.graph
    x = {0: HALF, 1: HALF, 2: Fraction(0), 3: HALF}
    S, deficit = conn.find_violated_cut(g, x, (), four_cycle.requirements)
    # verify the returned cut by direct evaluation
    mask = vertex_mask(S)
    have = sum((x[e] for e in range(4) if len({a for a in g.members(e) if mask >> a & 1}) == 1),
               Fraction(0))
    need = PairwiseMax(four_cycle.requirements, 4).eval_mask(mask)
    assert need - have == deficit == HALF
    # pairs are scanned in order, and the only 1/2-cut separating 0 from 1 is {0, 3}
    assert S == frozenset({0, 3})


def test_no_violation_on_spanning_tree(four_cycle):
    x = {0: Fraction(1), 1: Fraction(1), 2: Fraction(1), 3: Fraction(0)}
    assert conn.find_violated_cut(four_cycle.graph, x, (), four_cycle.requirements) is None


def test_empty_x_single_pair():
    g = graph(3, [(0, 1), (1, 2)])
    reqs = PairRequirements({(0, 2): 1})
    S, deficit = conn.find_violated_cut(g, {}, (), reqs)
    assert 0 in S and 2 not in S and deficit == 1


def test_fixed_edges_count_as_capacity_one(four_cycle):
    x = {1: HALF, 2: HALF, 3: HALF}
    reqs = PairRequirements({(0, 1): 1})
    assert conn.find_violated_cut(four_cycle.graph, x, [0], reqs) is None


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_separation_agrees_with_exhaustive_check(seed):
    rng = random.Random(seed)
    n = rng.randint(3, 7)
    inst = generate("ec", n=n, m=rng.randint(n, 2 * n), rmax=rng.randint(1, 3),
                    seed=rng.getrandbits(32))
    g = inst.graph
    x = {e: Fraction(rng.randint(0, 4), 4) for e in range(g.num_edges)}
    fast = conn.find_violated_cut(g, x, (), inst.requirements)
    slow = conn.exhaustive_violated_cut(g, x, (), PairwiseMax(inst.requirements, n))
    assert (fast is None) == (slow is None)
