from fractions import Fraction

import pytest

from sndp.certify import (
    EdgePartition, NotFullyFractional, build_forest, certify_iteration, check_counting_identity,
    check_half_edge, check_unique_child, claim_report, edge_partition, extract_laminar_basis,
    peel, tight_sets, uncross,
)
from sndp.corpus import ec_corpus
from sndp.exactlp import RowSpace, VertexSolution, certify_vertex, full_cut_lp, solve_to_vertex
from sndp.instances import PairRequirements, mask_vertices, vertex_mask
from sndp.requirements import PairwiseMax
from sndp.rounding import solve

from conftest import graph

HALF = Fraction(1, 2)


def lp_vertex(inst):
    g = inst.graph
    f = PairwiseMax(inst.requirements, g.n)
    return solve_to_vertex(full_cut_lp(g, f, g.costs())), f


def rank_of(fam, x, ground):
    space = RowSpace(len(x))
    for S, _ in fam.sets:
        space.add([1 if len({a for a in ground.members(e) if S >> a & 1}) == 1 else 0
                   for e in sorted(x)])
    return space.rank


def test_triangle_family_is_three_singletons(triangle):
    sol, f = lp_vertex(triangle)
    fam = extract_laminar_basis(sol, f, triangle.graph)
    assert sorted(fam.vertex_set(i) for i in range(3)) == [{0}, {1}, {2}]
    assert rank_of(fam, sol.x, triangle.graph) == 3


def test_four_cycle_family_needs_a_pair(four_cycle):
    sol, f = lp_vertex(four_cycle)
    g = four_cycle.graph
    assert set(sol.x.values()) == {HALF}
    # the four singleton rows alone have rank 3
    singles = build_forest([(1 << v, 1) for v in range(4)], 4)
    assert rank_of(singles, sol.x, g) == 3
    fam = extract_laminar_basis(sol, f, g)
    assert len(fam) == 4 and rank_of(fam, sol.x, g) == 4
    assert any(len(fam.vertex_set(i)) == 2 for i in range(4))


def test_forced_edge_is_not_fully_fractional():
    g = graph(2, [(0, 1)])
    f = PairwiseMax(PairRequirements({(0, 1): 1}), 2)
    sol = solve_to_vertex(full_cut_lp(g, f, g.costs()))
    with pytest.raises(NotFullyFractional):
        extract_laminar_basis(sol, f, g)
    frac, _ = peel(sol, f, g)
    assert frac.x == {}


def test_half_edge(triangle, four_cycle):
    for inst in (triangle, four_cycle):
        sol, _ = lp_vertex(inst)
        assert check_half_edge(sol) is None
        assert sol.max_coordinate() == HALF


def test_third_is_flagged_and_not_a_vertex(triangle):
    sol, _ = lp_vertex(triangle)
    x = {e: Fraction(1, 3) for e in range(3)}
    fake = VertexSolution(x, Fraction(1), (), sol.basis_certificate, sol.lp)
    dump = check_half_edge(fake)
    assert dump is not None and dump["max"] == "1/3"
    assert certify_vertex(fake) is not None


def families(limit=40):
    """Laminar families from the first rounding vertices of corpus instances."""
    out = []
    for _, inst in ec_corpus(seeds=range(1, 11)):
        res = solve(inst)
        for it in res.trace.iterations:
            frac, g = peel(it.vertex, it.requirement, res.ground)
            if frac.x:
                out.append((extract_laminar_basis(frac, g, res.ground), frac, res.ground, g))
        if len(out) >= limit:
            break
    return out


@pytest.fixture(scope="module")
def corpus_families():
    return families()


def test_corpus_families_pass_every_check(corpus_families):
    assert corpus_families
    for fam, frac, ground, g in corpus_families:
        assert len(fam) == len(frac.x) == rank_of(fam, frac.x, ground)
        for S, val in fam.sets:
            cut = sum((v for e, v in frac.x.items()
                       if len({a for a in ground.members(e) if S >> a & 1}) == 1), Fraction(0))
            assert cut == val == g.eval_mask(S)
        assert check_counting_identity(fam, frac, ground) is None
        assert check_unique_child(fam, frac, ground) is None


def test_misclassified_co_edge_breaks_the_identity(corpus_families):
    def shifted(fam, i, x, ground):
        p = edge_partition(fam, i, x, ground)
        if not p.co:
            return p
        e = min(p.co)
        return EdgePartition(p.cc, p.cp, p.po | {e}, p.co - {e}, p.alpha, p.beta)

    tried = 0
    for fam, frac, ground, _ in corpus_families:
        has_co = any(fam.children(i) and edge_partition(fam, i, frac.x, ground).co
                     for i in range(len(fam)))
        if has_co:
            bad = check_counting_identity(fam, frac, ground, partition=shifted)
            assert bad is not None and bad.check == "eq3"
            tried += 1
    assert tried > 0


def test_identity_arithmetic_by_hand(corpus_families):
    """Sum of child cuts minus parent cut, recomputed edge by edge."""
    for fam, frac, ground, _ in corpus_families:
        for i in range(len(fam)):
            kids = fam.children(i)
            if not kids:
                continue
            S = fam.sets[i][0]

            def cut(T):
                return sum((v for e, v in frac.x.items()
                            if len({a for a in ground.members(e) if T >> a & 1}) == 1),
                           Fraction(0))
            p = edge_partition(fam, i, frac.x, ground)
            lhs = sum(cut(fam.sets[j][0]) for j in kids) - cut(S)
            rhs = 2 * sum(frac.x[e] for e in p.cc) + sum(frac.x[e] for e in p.cp) \
                - sum(frac.x[e] for e in p.po)
            assert lhs == rhs


def test_singleton_family_is_vacuous(triangle):
    sol, _ = lp_vertex(triangle)
    fam = build_forest([(1 << v, 1) for v in range(3)], 3)
    assert check_counting_identity(fam, sol, triangle.graph) is None
    assert check_unique_child(fam, sol, triangle.graph) is None
    assert [row["satisfied"] for row in claim_report(fam, sol, triangle.graph)] == [True] * 3


def test_unique_child_with_equal_cuts_fails():
    # S = C + {3}, with vertex 3 isolated, so delta(S) = delta(C)
    g = graph(4, [(0, 1), (1, 2), (0, 2)])
    x = {e: HALF for e in range(3)}
    C, S = vertex_mask({0, 1}), vertex_mask({0, 1, 3})
    fam = build_forest([(C, 1), (S, 1)], 4)
    bad = check_unique_child(fam, VertexSolution(x, Fraction(3, 2), (), ()), g)
    assert bad is not None and bad.set == {0, 1, 3}


def test_claim_table_on_the_four_cycle(four_cycle):
    g = four_cycle.graph
    x = {e: HALF for e in range(4)}
    sol = VertexSolution(x, Fraction(2), (), ())
    pair = vertex_mask({0, 1})
    fam = build_forest([(1, 1), (2, 1), (4, 1), (pair, 1)], 4)
    rows = {tuple(r["S"]): r for r in claim_report(fam, sol, g)}
    assert rows[(0, 1)] == {"S": [0, 1], "f": 1, "alpha": 3, "beta": 1, "satisfied": False}
    assert rows[(0,)]["satisfied"]


def test_laminar_construction_rejects_crossing_sets():
    with pytest.raises(ValueError, match="not laminar"):
        build_forest([(vertex_mask({0, 1}), 1), (vertex_mask({1, 2}), 1)], 3)


def test_uncrossing_prefers_intersection_and_union(four_cycle):
    g = four_cycle.graph
    x = {e: HALF for e in range(4)}
    f = PairwiseMax(four_cycle.requirements, 4)
    ends = {e: g.members(e) for e in x}
    A, B = vertex_mask({0, 1}), vertex_mask({1, 2})
    # {1} and {0,1,2} are both tight here
    assert uncross(A, B, x, f, ends) == (vertex_mask({1}), vertex_mask({0, 1, 2}))


def test_tight_sets_of_the_triangle(triangle):
    sol, f = lp_vertex(triangle)
    found = {frozenset(mask_vertices(m)) for m in tight_sets(sol, f, triangle.graph)}
    assert found == {frozenset(s) for s in ({0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2})}


def test_certificate_report(four_cycle):
    res = solve(four_cycle)
    it = res.trace.iterations[0]
    cert = certify_iteration(it.vertex, it.requirement, res.ground).to_dict()
    assert cert["vertex_ok"] and cert["half_edge"] == {"max": "1/2", "ok": True}
    assert cert["laminar"]["size"] == cert["laminar"]["rank"] == 4
    assert cert["identities"] == {"eq3": True, "beta": True, "alpha_root": True}
    assert cert["unique_child"] is True and cert["failures"] == []
