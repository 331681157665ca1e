"""Problem data: graphs, hypergraphs, requirements, element instances.

Instances are immutable.  Costs and weights are ``fractions.Fraction``;
in JSON they are written as integers or ``"p/q"`` strings so that no
floating point ever enters the pipeline.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Union

Rational = Fraction


class SchemaError(ValueError):
    """Raised for malformed instance files; the message starts with a field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{message} at {path}" if path else message)
        self.path = path


def parse_rational(value, path: str = "") -> Fraction:
    if isinstance(value, bool):
        raise SchemaError(path, "expected integer or 'p/q' string")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            if "/" in value:
                p, q = value.split("/")
                return Fraction(int(p), int(q))
            return Fraction(int(value))
        except (ValueError, ZeroDivisionError):
            raise SchemaError(path, f"bad rational {value!r}") from None
    raise SchemaError(path, "expected integer or 'p/q' string")


def format_rational(q: Fraction) -> Union[int, str]:
    """Integers stay integers; everything else becomes ``"p/q"``."""
    q = Fraction(q)
    if q.denominator == 1:
        return q.numerator
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    cost: Fraction = Fraction(1)


@dataclass(frozen=True)
class Hyperedge:
    vertices: frozenset
    cost: Fraction = Fraction(1)


@dataclass(frozen=True)
class Graph:
    """Undirected multigraph.  Edge ids are list positions."""

    n: int
    edges: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        for i, e in enumerate(self.edges):
            if not (0 <= e.u < self.n and 0 <= e.v < self.n):
                raise SchemaError(f"edges[{i}]", "vertex out of range")
            if e.u == e.v:
                raise SchemaError(f"edges[{i}]", "self-loop")
            if e.cost < 0:
                raise SchemaError(f"edges[{i}].cost", "negative cost")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def members(self, eid: int) -> tuple:
        e = self.edges[eid]
        return (e.u, e.v)

    def cost(self, eid: int) -> Fraction:
        return self.edges[eid].cost

    def costs(self) -> dict:
        return {i: e.cost for i, e in enumerate(self.edges)}


@dataclass(frozen=True)
class Hypergraph:
    """Hyperedges are vertex sets of size >= 2; a graph is the degree-2 case."""

    n: int
    hyperedges: tuple = ()

    def __post_init__(self):
        hs = []
        for i, h in enumerate(self.hyperedges):
            vs = frozenset(h.vertices)
            if len(vs) < 2:
                raise SchemaError(f"hyperedges[{i}].vertices", "hyperedge of size < 2")
            if any(not 0 <= v < self.n for v in vs):
                raise SchemaError(f"hyperedges[{i}].vertices", "vertex out of range")
            if h.cost < 0:
                raise SchemaError(f"hyperedges[{i}].cost", "negative cost")
            hs.append(Hyperedge(vs, Fraction(h.cost)))
        object.__setattr__(self, "hyperedges", tuple(hs))

    @property
    def num_edges(self) -> int:
        return len(self.hyperedges)

    @property
    def degree(self) -> int:
        return max((len(h.vertices) for h in self.hyperedges), default=0)

    def members(self, eid: int) -> tuple:
        return tuple(sorted(self.hyperedges[eid].vertices))

    def cost(self, eid: int) -> Fraction:
        return self.hyperedges[eid].cost

    def costs(self) -> dict:
        return {i: h.cost for i, h in enumerate(self.hyperedges)}


Ground = Union[Graph, Hypergraph]


def dplus(h: Hypergraph) -> int:
    """Largest size of a hyperedge with non-zero cost (0 if every hyperedge is free)."""
    return max((len(e.vertices) for e in h.hyperedges if e.cost > 0), default=0)


@dataclass(frozen=True)
class PairRequirements:
    """Symmetric r(uv); pairs not listed have requirement 0."""

    values: Mapping = field(default_factory=dict)

    def __post_init__(self):
        norm = {}
        for (u, v), r in dict(self.values).items():
            if u == v:
                raise SchemaError("requirements", "requirement on a vertex with itself")
            if r < 0:
                raise SchemaError("requirements", "negative requirement")
            if r > 0:
                key = (min(u, v), max(u, v))
                norm[key] = max(norm.get(key, 0), int(r))
        object.__setattr__(self, "values", dict(sorted(norm.items())))

    def __getitem__(self, pair) -> int:
        u, v = pair
        return self.values.get((min(u, v), max(u, v)), 0)

    def __len__(self) -> int:
        return len(self.values)

    def items(self):
        return self.values.items()

    def vertices(self) -> set:
        return {w for pair in self.values for w in pair}

    @property
    def rmax(self) -> int:
        return max(self.values.values(), default=0)

    def __eq__(self, other):
        return isinstance(other, PairRequirements) and self.values == other.values

    def __hash__(self):
        return hash(tuple(self.values.items()))


@dataclass(frozen=True)
class EcInstance:
    graph: Graph
    requirements: PairRequirements
    kind = "ec"


@dataclass(frozen=True)
class HyperInstance:
    hypergraph: Hypergraph
    requirements: PairRequirements
    kind = "hyper"


@dataclass(frozen=True)
class ElemInstance:
    graph: Graph
    terminals: frozenset
    requirements: PairRequirements
    node_weights: Mapping = field(default_factory=dict)
    kind = "elem"

    def __post_init__(self):
        object.__setattr__(self, "terminals", frozenset(self.terminals))
        object.__setattr__(
            self, "node_weights",
            {int(k): Fraction(w) for k, w in sorted(dict(self.node_weights).items())},
        )
        if any(not 0 <= t < self.graph.n for t in self.terminals):
            raise SchemaError("terminals", "vertex out of range")
        for w in self.requirements.vertices():
            if w not in self.terminals:
                raise SchemaError("requirements", f"requirement on non-terminal {w}")
        for v, w in self.node_weights.items():
            if v in self.terminals:
                raise SchemaError(f"node_weights.{v}", "weight on a terminal")
            if w < 0:
                raise SchemaError(f"node_weights.{v}", "negative cost")

    @property
    def nonterminals(self) -> frozenset:
        return frozenset(range(self.graph.n)) - self.terminals

    def incident(self, v: int) -> list:
        return [i for i, e in enumerate(self.graph.edges) if v in (e.u, e.v)]

    def max_weighted_degree(self) -> int:
        """Delta: largest degree of a non-terminal carrying non-zero weight."""
        return max((len(self.incident(v)) for v, w in self.node_weights.items() if w > 0),
                   default=0)


Instance = Union[EcInstance, ElemInstance, HyperInstance]


# ---------------------------------------------------------------- JSON I/O

def _expect(obj, key, typ, path):
    if key not in obj:
        raise SchemaError(f"{path}{key}", "missing field")
    val = obj[key]
    if typ is int and (isinstance(val, bool) or not isinstance(val, int)):
        raise SchemaError(f"{path}{key}", "expected integer")
    if typ is list and not isinstance(val, list):
        raise SchemaError(f"{path}{key}", "expected list")
    return val


def _parse_requirements(doc, n, terminals=None) -> PairRequirements:
    vals = {}
    for i, item in enumerate(doc.get("requirements", [])):
        p = f"requirements[{i}]."
        u, v, r = (_expect(item, k, int, p) for k in ("u", "v", "r"))
        if r < 0:
            raise SchemaError(p + "r", "negative requirement")
        if u == v:
            raise SchemaError(p + "v", "requirement on a vertex with itself")
        for k, w in (("u", u), ("v", v)):
            if not 0 <= w < n:
                raise SchemaError(p + k, "vertex out of range")
            if terminals is not None and w not in terminals:
                raise SchemaError(p + k, f"requirement on non-terminal {w}")
        key = (min(u, v), max(u, v))
        vals[key] = max(vals.get(key, 0), r)
    return PairRequirements(vals)


def _parse_edges(doc, n) -> Graph:
    edges = []
    for i, item in enumerate(_expect(doc, "edges", list, "")):
        p = f"edges[{i}]."
        u, v = _expect(item, "u", int, p), _expect(item, "v", int, p)
        cost = parse_rational(_expect(item, "cost", None, p), p + "cost")
        if cost < 0:
            raise SchemaError(p + "cost", "negative cost")
        edges.append(Edge(u, v, cost))
    return Graph(n, edges)


def instance_from_dict(doc) -> Instance:
    if not isinstance(doc, dict):
        raise SchemaError("", "instance must be a JSON object")
    kind = doc.get("kind")
    if kind not in ("ec", "elem", "hyper"):
        raise SchemaError("kind", f"unknown kind {kind!r}")
    n = _expect(doc, "n", int, "")
    if n < 1:
        raise SchemaError("n", "need at least one vertex")
    if kind == "ec":
        return EcInstance(_parse_edges(doc, n), _parse_requirements(doc, n))
    if kind == "elem":
        graph = _parse_edges(doc, n)
        terminals = _expect(doc, "terminals", list, "")
        reqs = _parse_requirements(doc, n, set(terminals))
        weights = {}
        for k, w in doc.get("node_weights", {}).items():
            try:
                key = int(k)
            except ValueError:
                raise SchemaError(f"node_weights.{k}", "key must be a vertex id") from None
            weights[key] = parse_rational(w, f"node_weights.{k}")
        return ElemInstance(graph, frozenset(terminals), reqs, weights)
    hs = []
    for i, item in enumerate(_expect(doc, "hyperedges", list, "")):
        p = f"hyperedges[{i}]."
        verts = _expect(item, "vertices", list, p)
        cost = parse_rational(_expect(item, "cost", None, p), p + "cost")
        if cost < 0:
            raise SchemaError(p + "cost", "negative cost")
        if len(set(verts)) < 2:
            raise SchemaError(p + "vertices", "hyperedge of size < 2")
        hs.append(Hyperedge(frozenset(verts), cost))
    return HyperInstance(Hypergraph(n, hs), _parse_requirements(doc, n))


def parse_instance(text: Union[str, bytes]) -> Instance:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc}") from None
    return instance_from_dict(doc)


def instance_to_dict(inst: Instance) -> dict:
    reqs = [{"u": u, "v": v, "r": r} for (u, v), r in inst.requirements.items()]
    if isinstance(inst, HyperInstance):
        h = inst.hypergraph
        return {
            "kind": "hyper", "n": h.n,
            "hyperedges": [{"vertices": sorted(e.vertices), "cost": format_rational(e.cost)}
                           for e in h.hyperedges],
            "requirements": reqs,
        }
    g = inst.graph
    doc = {
        "kind": inst.kind, "n": g.n,
        "edges": [{"u": e.u, "v": e.v, "cost": format_rational(e.cost)} for e in g.edges],
    }
    if isinstance(inst, ElemInstance):
        doc["terminals"] = sorted(inst.terminals)
        doc["node_weights"] = {str(v): format_rational(w) for v, w in inst.node_weights.items()}
    doc["requirements"] = reqs
    return doc


def serialize_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1) + "\n"


# ---------------------------------------------------------------- generators

class GenerationError(ValueError):
    pass


def _random_connected_multigraph(rng, n, m, lo, hi) -> list:
    if m < n - 1:
        raise GenerationError(f"{m} edges cannot connect {n} vertices")
    order = list(range(n))
    rng.shuffle(order)
    pairs = [(order[i], order[rng.randrange(i)]) for i in range(1, n)]
    all_pairs = list(combinations(range(n), 2))
    while len(pairs) < m:
        # prefer simple edges while any remain
        unused = [p for p in all_pairs if p not in pairs and p[::-1] not in pairs]
        pairs.append(rng.choice(unused) if unused else rng.choice(all_pairs))
    return [Edge(u, v, Fraction(rng.randint(lo, hi))) for u, v in pairs]


def _capped_requirements(rng, vertices, count, rmax, connectivity) -> PairRequirements:
    pairs = list(combinations(sorted(vertices), 2))
    rng.shuffle(pairs)
    vals = {}
    for u, v in pairs[:count]:
        r = min(rng.randint(1, rmax), connectivity(u, v))
        if r > 0:
            vals[(u, v)] = r
    return PairRequirements(vals)


def generate(kind: str, *, n: int, m: int, rmax: int = 1, d: int = 3,
             cost_range=(1, 10), pairs: int | None = None, terminals: int | None = None,
             seed: int = 0, attempts: int = 50) -> Instance:
    """Seeded random instance whose full ground set is feasible.

    ``m`` is the edge count (hyperedge count for ``hyper``).  Requirements
    are drawn from ``1..rmax`` and capped at the full-graph connectivity
    of the pair, measured by max-flow, so every instance is feasible.
    Generation is a pure function of the arguments.
    """
    from . import connectivity as conn

    if n < 2 or m < 1 or rmax < 1:
        raise GenerationError("need n >= 2, m >= 1, rmax >= 1")
    lo, hi = cost_range
    rng = random.Random(seed)
    pairs = n if pairs is None else pairs

    for _ in range(attempts):
        if kind == "ec":
            g = Graph(n, _random_connected_multigraph(rng, n, m, lo, hi))
            reqs = _capped_requirements(
                rng, range(n), pairs, rmax,
                lambda u, v: conn.edge_connectivity(g, range(g.num_edges), u, v))
            inst = EcInstance(g, reqs)
        elif kind == "elem":
            k = terminals if terminals is not None else max(2, (n + 1) // 2)
            if not 2 <= k <= n:
                raise GenerationError("need 2 <= terminals <= n")
            g = Graph(n, _random_connected_multigraph(rng, n, m, lo, hi))
            terms = frozenset(rng.sample(range(n), k))
            probe = ElemInstance(g, terms, PairRequirements())
            reqs = _capped_requirements(
                rng, terms, pairs, rmax,
                lambda u, v: conn.element_connectivity(probe, range(g.num_edges), u, v))
            inst = ElemInstance(g, terms, reqs)
        elif kind == "hyper":
            if d < 2 or d > n:
                raise GenerationError("need 2 <= d <= n")
            hs = []
            for i in range(m):
                size = d if i == 0 else rng.randint(2, d)
                hs.append(Hyperedge(frozenset(rng.sample(range(n), size)),
                                    Fraction(rng.randint(lo, hi))))
            h = Hypergraph(n, hs)
            reqs = _capped_requirements(
                rng, range(n), pairs, rmax,
                lambda u, v: conn.hyperedge_connectivity(h, range(h.num_edges), u, v))
            inst = HyperInstance(h, reqs)
        else:
            raise GenerationError(f"unknown kind {kind!r}")
        if inst.requirements.rmax > 0:
            return inst
    raise GenerationError(f"no instance with a positive requirement after {attempts} attempts")


def vertex_mask(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def mask_vertices(mask: int) -> frozenset:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return frozenset(out)
