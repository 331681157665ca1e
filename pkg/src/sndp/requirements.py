"""Requirement functions f: 2^V -> Z and brute-force property checkers.

Sets are handled as bitmasks internally (bit v set iff v in S); the
public ``__call__`` accepts any iterable of vertices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional

from .connectivity import crossing_count, cut_capacity
from .instances import PairRequirements, mask_vertices, vertex_mask

MAX_TABLE_N = 16
MAX_CHECK_N = 8


class RequirementFn:
    n: int

    def eval_mask(self, mask: int) -> int:
        raise NotImplementedError

    def __call__(self, S: Iterable[int]) -> int:
        return self.eval_mask(vertex_mask(S))

    def table(self) -> list:
        return [self.eval_mask(m) for m in range(1 << self.n)]


@dataclass(frozen=True)
class PairwiseMax(RequirementFn):
    """f(S) = max r(uv) over pairs with exactly one end in S (0 if none)."""

    reqs: PairRequirements
    n: int

    def eval_mask(self, mask: int) -> int:
        best = 0
        for (u, v), r in self.reqs.values.items():
            if r > best and (mask >> u & 1) != (mask >> v & 1):
                best = r
        return best


@dataclass(frozen=True)
class ExplicitTable(RequirementFn):
    """Arbitrary set function given by a table; absent sets map to 0."""

    n: int
    values: tuple  # sorted (mask, value) pairs

    def __post_init__(self):
        if self.n > MAX_TABLE_N:
            raise ValueError(f"explicit tables limited to n <= {MAX_TABLE_N}")
        object.__setattr__(self, "_lookup", dict(self.values))

    @classmethod
    def from_sets(cls, n: int, mapping) -> "ExplicitTable":
        return cls(n, tuple(sorted((vertex_mask(S), int(v)) for S, v in mapping.items())))

    def eval_mask(self, mask: int) -> int:
        return self._lookup.get(mask, 0)


@dataclass(frozen=True)
class Residual(RequirementFn):
    """g(S) = base(S) - |delta_fixed(S)|.

    ``fixed`` is a multiset of member tuples (the vertex sets of the fixed
    edges or hyperedges) rather than edge ids, so residuals taken over
    different grounds still merge into a single layer.
    """

    base: RequirementFn
    fixed: tuple

    @property
    def n(self) -> int:
        return self.base.n

    def eval_mask(self, mask: int) -> int:
        return self.base.eval_mask(mask) - crossing_count(self.fixed, mask)


def residual(f: RequirementFn, ground, fixed: Iterable[int] = (), *, members=()) -> Residual:
    added = tuple(ground.members(e) for e in fixed) + tuple(tuple(m) for m in members)
    if isinstance(f, Residual):
        return Residual(f.base, f.fixed + added)
    return Residual(f, added)


def cut_function(ground, F: Iterable[int]) -> ExplicitTable:
    members = [ground.members(e) for e in F]
    n = ground.n
    return ExplicitTable(n, tuple((m, crossing_count(members, m)) for m in range(1 << n)))


def is_trivial(f: RequirementFn) -> bool:
    """True iff f(S) <= 0 for every proper nonempty S."""
    if isinstance(f, PairwiseMax):
        return f.reqs.rmax == 0
    if isinstance(f, Residual) and isinstance(f.base, PairwiseMax):
        # g <= 0 everywhere iff the fixed family alone meets every pair's requirement
        weighted = [(m, 1) for m in f.fixed]
        return all(cut_capacity(f.n, weighted, u, v)[0] >= r for (u, v), r in f.base.reqs.items())
    if f.n > MAX_TABLE_N:
        raise ValueError(f"enumeration limited to n <= {MAX_TABLE_N}")
    full = (1 << f.n) - 1
    return all(f.eval_mask(m) <= 0 for m in range(1, full))


class Counterexample(NamedTuple):
    property: str
    A: frozenset
    B: frozenset

    def __str__(self):
        return f"{self.property} fails for A={sorted(self.A)}, B={sorted(self.B)}"


def _check_n(n):
    if n > MAX_CHECK_N:
        raise ValueError(f"exhaustive checks limited to n <= {MAX_CHECK_N}")


def check_skew_supermodular(f: RequirementFn) -> Optional[Counterexample]:
    """Return the first (A, B) violating both skew-supermodular inequalities, or None."""
    _check_n(f.n)
    t = f.table()
    size = 1 << f.n
    for a in range(size):
        fa = t[a]
        for b in range(size):
            lhs = fa + t[b]
            if lhs <= t[a & b] + t[a | b] or lhs <= t[a & ~b] + t[b & ~a]:
                continue
            return Counterexample("skew-supermodularity", mask_vertices(a), mask_vertices(b))
    return None


def check_symmetric_submodular_fn(h: RequirementFn) -> Optional[Counterexample]:
    """Symmetry, submodularity and posi-modularity of h, exhaustively."""
    _check_n(h.n)
    t = h.table()
    size = 1 << h.n
    full = size - 1
    for a in range(size):
        if t[a] != t[full ^ a]:
            return Counterexample("symmetry", mask_vertices(a), mask_vertices(full ^ a))
    for a in range(size):
        for b in range(size):
            if t[a] + t[b] < t[a | b] + t[a & b]:
                return Counterexample("submodularity", mask_vertices(a), mask_vertices(b))
            if t[a] + t[b] < t[a & ~b] + t[b & ~a]:
                return Counterexample("posi-modularity", mask_vertices(a), mask_vertices(b))
    return None


def check_symmetric_submodular(ground, F: Iterable[int]) -> Optional[Counterexample]:
    _check_n(ground.n)
    return check_symmetric_submodular_fn(cut_function(ground, F))
