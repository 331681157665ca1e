from fractions import Fraction

import pytest

from sndp.instances import EcInstance, Edge, ElemInstance, Graph, PairRequirements


def graph(n, pairs, cost=1):
    return Graph(n, [Edge(u, v, Fraction(cost)) for u, v in pairs])


def all_pairs(vertices, r=1):
    vs = sorted(vertices)
    return PairRequirements({(a, b): r for i, a in enumerate(vs) for b in vs[i + 1:]})


@pytest.fixture
def triangle():
    return EcInstance(graph(3, [(0, 1), (1, 2), (0, 2)]), all_pairs(range(3)))


@pytest.fixture
def four_cycle():
    return EcInstance(graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)]), all_pairs(range(4)))


@pytest.fixture
def star():
    """Non-terminal 0 joined to terminals 1, 2, 3."""
    return ElemInstance(graph(4, [(0, 1), (0, 2), (0, 3)]), frozenset({1, 2, 3}),
                        all_pairs({1, 2, 3}))
