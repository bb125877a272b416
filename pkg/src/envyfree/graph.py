"""Bipartite graphs, matchings and the basic envy predicates.

Vertices are dense integer indices on each side: ``X = range(x_count)`` and
``Y = range(y_count)``. All iteration happens in ascending index order so
every algorithm built on these types is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping

from .errors import InputError
from .rationals import format_rational, parse_rational

Edge = tuple[int, int]


@dataclass(frozen=True)
class BipartiteGraph:
    """Immutable bipartite graph ``(X ∪ Y, E)``.

    ``adjacency[x]`` is the strictly increasing tuple of Y-neighbours of ``x``.
    Isolated vertices on either side are allowed.
    """

    x_count: int
    y_count: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.x_count < 0 or self.y_count < 0:
            raise InputError("vertex counts must be non-negative")
        if len(self.adjacency) != self.x_count:
            raise InputError(
                f"adjacency has {len(self.adjacency)} rows, expected {self.x_count}"
            )
        for x, row in enumerate(self.adjacency):
            prev = -1
            for y in row:
                if not 0 <= y < self.y_count:
                    raise InputError(f"edge ({x},{y}) leaves Y = [0,{self.y_count})")
                if y <= prev:
                    raise InputError(f"adjacency of x={x} is not strictly increasing")
                prev = y

    @classmethod
    def from_edges(cls, x_count: int, y_count: int, edges: Iterable[Edge]) -> "BipartiteGraph":
        rows: list[set[int]] = [set() for _ in range(max(x_count, 0))]
        for x, y in edges:
            if not 0 <= x < x_count:
                raise InputError(f"edge ({x},{y}) leaves X = [0,{x_count})")
            rows[x].add(y)
        return cls(x_count, y_count, tuple(tuple(sorted(r)) for r in rows))

    @classmethod
    def complete(cls, x_count: int, y_count: int) -> "BipartiteGraph":
        row = tuple(range(y_count))
        return cls(x_count, y_count, tuple(row for _ in range(x_count)))

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges())

    @cached_property
    def y_adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Reverse adjacency: X-neighbours of every ``y``, ascending."""
        rows: list[list[int]] = [[] for _ in range(self.y_count)]
        for x, row in enumerate(self.adjacency):
            for y in row:
                rows[y].append(x)
        return tuple(tuple(r) for r in rows)

    @property
    def edge_count(self) -> int:
        return sum(len(r) for r in self.adjacency)

    def edges(self) -> Iterator[Edge]:
        for x, row in enumerate(self.adjacency):
            for y in row:
                yield (x, y)

    def has_edge(self, x: int, y: int) -> bool:
        return (x, y) in self.edge_set

    def induced(self, xs: Iterable[int], ys: Iterable[int]) -> tuple["BipartiteGraph", list[int], list[int]]:
        """Subgraph ``G[xs, ys]`` re-indexed densely.

        Returns the subgraph plus the maps from new to old indices on each
        side. Relative order of vertices is preserved.
        """
        x_map = sorted(set(xs))
        y_map = sorted(set(ys))
        y_new = {y: j for j, y in enumerate(y_map)}
        adjacency = tuple(
            tuple(y_new[y] for y in self.adjacency[x] if y in y_new) for x in x_map
        )
        return BipartiteGraph(len(x_map), len(y_map), adjacency), x_map, y_map


@dataclass(frozen=True)
class Matching:
    """A set of vertex-disjoint ``(x, y)`` pairs.

    Disjointness is checked on construction; membership in a particular
    graph is checked by :func:`validate_matching`.
    """

    pairs: frozenset[Edge] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset((int(x), int(y)) for x, y in self.pairs))
        xs = [x for x, _ in self.pairs]
        ys = [y for _, y in self.pairs]
        if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
            raise InputError("matching pairs are not vertex-disjoint")

    @classmethod
    def from_mates(cls, mate_x: Mapping[int, int]) -> "Matching":
        return cls(frozenset(mate_x.items()))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Edge]:
        return iter(sorted(self.pairs))

    def __contains__(self, pair) -> bool:
        return tuple(pair) in self.pairs

    @property
    def x_matched(self) -> frozenset[int]:
        return frozenset(x for x, _ in self.pairs)

    @property
    def y_matched(self) -> frozenset[int]:
        return frozenset(y for _, y in self.pairs)

    def mate_x(self) -> dict[int, int]:
        return dict(self.pairs)

    def mate_y(self) -> dict[int, int]:
        return {y: x for x, y in self.pairs}

    def to_list(self) -> list[list[int]]:
        return [[x, y] for x, y in sorted(self.pairs)]


@dataclass(frozen=True)
class WeightedBipartiteGraph:
    """A bipartite graph with an exact non-negative weight on every edge."""

    graph: BipartiteGraph
    weights: Mapping[Edge, Fraction]

    def __post_init__(self):
        weights = {(int(x), int(y)): Fraction(w) for (x, y), w in self.weights.items()}
        if set(weights) != self.graph.edge_set:
            missing = sorted(self.graph.edge_set - set(weights))
            extra = sorted(set(weights) - self.graph.edge_set)
            raise InputError(f"weights must cover exactly the edges (missing {missing[:5]}, extra {extra[:5]})")
        for e, w in weights.items():
            if w < 0:
                raise InputError(f"negative weight {w} on edge {e}")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_matrix(cls, matrix) -> "WeightedBipartiteGraph":
        """Complete bipartite graph from a dense row-per-x weight matrix."""
        x_count = len(matrix)
        y_count = len(matrix[0]) if x_count else 0
        graph = BipartiteGraph.complete(x_count, y_count)
        weights = {(x, y): Fraction(matrix[x][y]) for x in range(x_count) for y in range(y_count)}
        return cls(graph, weights)

    def weight_of(self, matching: Matching) -> Fraction:
        return sum((self.weights[p] for p in matching.pairs), Fraction(0))

    def induced(self, xs, ys) -> tuple["WeightedBipartiteGraph", list[int], list[int]]:
        sub, x_map, y_map = self.graph.induced(xs, ys)
        weights = {(i, j): self.weights[(x_map[i], y_map[j])] for i, j in sub.edges()}
        return WeightedBipartiteGraph(sub, weights), x_map, y_map


def validate_matching(graph: BipartiteGraph, m: Matching) -> None:
    for x, y in m.pairs:
        if not (0 <= x < graph.x_count and 0 <= y < graph.y_count) or not graph.has_edge(x, y):
            raise InputError(f"pair ({x},{y}) is not an edge of the graph")


def neighbors(graph: BipartiteGraph, x_subset: Iterable[int]) -> frozenset[int]:
    """Neighbourhood ``N_G(X')`` of a subset of X."""
    out: set[int] = set()
    for x in x_subset:
        if not 0 <= x < graph.x_count:
            raise InputError(f"x-index {x} out of range [0,{graph.x_count})")
        out.update(graph.adjacency[x])
    return frozenset(out)


def is_envy_free(graph: BipartiteGraph, m: Matching) -> bool:
    """True iff no unmatched x is adjacent to a matched y."""
    validate_matching(graph, m)
    matched_x = m.x_matched
    matched_y = m.y_matched
    for x in range(graph.x_count):
        if x in matched_x:
            continue
        if any(y in matched_y for y in graph.adjacency[x]):
            return False
    return True


def is_y_path_saturated(graph: BipartiteGraph) -> bool:
    """True iff the graph has the layered odd-path-like structure.

    By uniqueness of the structural partition this is equivalent to the
    decomposition having empty ``x_l`` and ``y_l``.
    """
    from .efm import decompose

    dec = decompose(graph)
    return not dec.x_l and not dec.y_l


# --- JSON ------------------------------------------------------------------


def _int_field(data: Mapping, key: str) -> int:
    value = data.get(key)
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise InputError(f"'{key}' must be a non-negative integer")
    return value


def graph_from_json(data) -> BipartiteGraph | WeightedBipartiteGraph:
    """Parse ``{"x_count", "y_count", "edges", "weights"?}``.

    Returns a :class:`WeightedBipartiteGraph` when ``weights`` is present.
    """
    if not isinstance(data, Mapping):
        raise InputError("graph instance must be a JSON object")
    x_count = _int_field(data, "x_count")
    y_count = _int_field(data, "y_count")
    edges = []
    for item in data.get("edges", []):
        if not (isinstance(item, list) and len(item) == 2 and all(type(v) is int for v in item)):
            raise InputError(f"edge must be [x, y] integers, got {item!r}")
        edges.append((item[0], item[1]))
    if len(set(edges)) != len(edges):
        raise InputError("duplicate edge in 'edges'")
    graph = BipartiteGraph.from_edges(x_count, y_count, edges)
    if "weights" not in data:
        return graph
    weights = {}
    for item in data["weights"]:
        if not (isinstance(item, list) and len(item) == 3):
            raise InputError(f"weight entry must be [x, y, \"p/q\"], got {item!r}")
        x, y, w = item
        if isinstance(w, float):
            raise InputError(f"weight {w!r} is a binary float; write it as a string")
        weights[(x, y)] = parse_rational(w)
    return WeightedBipartiteGraph(graph, weights)


def graph_to_json(g: BipartiteGraph | WeightedBipartiteGraph) -> dict:
    graph = g.graph if isinstance(g, WeightedBipartiteGraph) else g
    out = {
        "x_count": graph.x_count,
        "y_count": graph.y_count,
        "edges": [[x, y] for x, y in graph.edges()],
    }
    if isinstance(g, WeightedBipartiteGraph):
        out["weights"] = [[x, y, format_rational(g.weights[(x, y)])] for x, y in graph.edges()]
    return out
