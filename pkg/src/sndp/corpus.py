"""The fixed EC-SNDP corpus used by the acceptance suite and ``sndp bench``.

Every seed in 1..100 yields one instance per profile.  All profiles stay
within n <= 10, m <= 20, rmax <= 3 and integer costs in 1..10; they differ
in how often the LP optimum is fractional (uniform requirements with
narrow cost ranges are fractional far more often than random ones).
"""

from __future__ import annotations

from .instances import generate

SEEDS = range(1, 101)


def _all_pairs(n):
    return n * (n - 1) // 2


PROFILES = {
    "random": lambda s: dict(n=4 + s % 7, m=min(20, 4 + s % 7 + 2 + s % 9), rmax=1 + s % 3,
                             pairs=4 + s % 7 if s % 2 == 0 else _all_pairs(4 + s % 7),
                             cost_range=(1, 10)),
    "tree": lambda s: dict(n=5 + s % 6, m=min(20, 2 * (5 + s % 6) - s % 3), rmax=1,
                           pairs=_all_pairs(5 + s % 6), cost_range=(1, 3)),
    "tree-wide": lambda s: dict(n=4 + s % 7, m=min(20, 4 + s % 7 + 3 + s % 4), rmax=1,
                                pairs=_all_pairs(4 + s % 7), cost_range=(1, 10)),
    "tree-dense": lambda s: dict(n=6 + s % 5, m=20, rmax=1, pairs=_all_pairs(6 + s % 5),
                                 cost_range=(1, 10)),
    "uniform3": lambda s: dict(n=4 + s % 7, m=min(20, 2 * (4 + s % 7)), rmax=3,
                               pairs=_all_pairs(4 + s % 7), cost_range=(1, 1)),
}


def ec_corpus(seeds=SEEDS, profiles=None):
    """Yield ``(name, instance)`` pairs deterministically."""
    for name in profiles or PROFILES:
        for s in seeds:
            yield f"{name}-{s:03d}", generate("ec", seed=s, **PROFILES[name](s))


def elem_corpus(seeds=SEEDS):
    """Unweighted element-connectivity instances, one per seed, n <= 9, m <= 14."""
    for s in seeds:
        n = 5 + s % 5
        yield f"elem-{s:03d}", generate("elem", n=n, m=n + 1 + s % 6, rmax=1 + s % 2,
                                        terminals=3 + s % (n - 2), pairs=3 + s % 4, seed=s)
