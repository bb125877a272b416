"""Envy-free matchings via the alternating-sequence decomposition.

Given a maximum matching ``M``, grow the layered sequence
``X_0 - Y_1 - X_1 - ... - Y_k - X_k`` from the X-vertices that ``M`` leaves
unmatched: ``Y_i`` is the set of new Y-vertices reachable from ``X_{i-1}``
over non-matching edges, and ``X_i`` is their set of partners under ``M``.
Everything the sequence touches is the "bad" part ``(x_s, y_s)``; the rest
``(x_l, y_l)`` is saturated on the X side by ``M`` and contains every
envy-free matching of the graph. The partition does not depend on which
maximum matching is used.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple

import networkx as nx

from .errors import InputError, InvariantError
from .graph import BipartiteGraph, Matching, WeightedBipartiteGraph, neighbors, validate_matching
from .matching import extreme_weight_max_cardinality_matching, max_cardinality_matching
from .rationals import common_denominator


@dataclass(frozen=True)
class EfmDecomposition:
    x_s: frozenset[int]
    x_l: frozenset[int]
    y_s: frozenset[int]
    y_l: frozenset[int]
    layers: tuple[frozenset[int], ...]  # X_0, Y_1, X_1, ..., Y_k, X_k
    base_matching: Matching

    @property
    def x_layers(self) -> tuple[frozenset[int], ...]:
        return self.layers[0::2]

    @property
    def y_layers(self) -> tuple[frozenset[int], ...]:
        return self.layers[1::2]

    def sub_matching(self) -> Matching:
        """``M[x_l, y_l]``: the part of the base matching inside the good region."""
        return Matching(frozenset((x, y) for x, y in self.base_matching.pairs if x in self.x_l))


def decompose(graph: BipartiteGraph, base: Matching | None = None) -> EfmDecomposition:
    """Structural partition of ``graph`` from a maximum matching.

    ``base`` may supply a specific maximum matching; it is validated and
    must have maximum cardinality.
    """
    if base is None:
        base = max_cardinality_matching(graph)
    else:
        validate_matching(graph, base)
        if len(base) != len(max_cardinality_matching(graph)):
            raise InputError("base matching is not of maximum cardinality")
    mate_x = base.mate_x()
    mate_y = base.mate_y()

    frontier = [x for x in range(graph.x_count) if x not in mate_x]
    layers: list[frozenset[int]] = []
    seen_y: set[int] = set()
    x_s: set[int] = set()
    while frontier:
        layers.append(frozenset(frontier))
        x_s.update(frontier)
        new_y: list[int] = []
        for x in frontier:
            own = mate_x.get(x)
            for y in graph.adjacency[x]:
                if y != own and y not in seen_y:
                    seen_y.add(y)
                    new_y.append(y)
        if not new_y:
            break
        layers.append(frozenset(new_y))
        frontier = []
        for y in new_y:
            x = mate_y.get(y)
            if x is None:
                # an augmenting path ends here, so the base is not maximum
                raise InvariantError(f"y={y} reached by the alternating sequence is unmatched")
            frontier.append(x)

    all_x = frozenset(range(graph.x_count))
    all_y = frozenset(range(graph.y_count))
    x_s_f = frozenset(x_s)
    y_s_f = frozenset(seen_y)
    return EfmDecomposition(
        x_s=x_s_f,
        x_l=all_x - x_s_f,
        y_s=y_s_f,
        y_l=all_y - y_s_f,
        layers=tuple(layers),
        base_matching=base,
    )


def max_cardinality_efm(graph: BipartiteGraph) -> Matching:
    """Envy-free matching of maximum cardinality; it saturates exactly ``x_l``."""
    return decompose(graph).sub_matching()


def _extreme_weight_efm(wg: WeightedBipartiteGraph, objective: str) -> Matching:
    dec = decompose(wg.graph)
    if not dec.x_l:
        return Matching()
    sub, x_map, y_map = wg.induced(dec.x_l, dec.y_l)
    local = extreme_weight_max_cardinality_matching(sub, objective)
    if len(local) != len(dec.x_l):
        raise InvariantError("good region is not saturated on the X side")
    return Matching(frozenset((x_map[i], y_map[j]) for i, j in local.pairs))


def min_weight_efm(wg: WeightedBipartiteGraph) -> Matching:
    """Maximum-cardinality envy-free matching of minimum total weight."""
    return _extreme_weight_efm(wg, "minimize")


def max_weight_efm(wg: WeightedBipartiteGraph) -> Matching:
    """Maximum-cardinality envy-free matching of maximum total weight."""
    return _extreme_weight_efm(wg, "maximize")


class EfmExistence(NamedTuple):
    nonempty: bool
    reason: str


def has_nonempty_efm(graph: BipartiteGraph) -> EfmExistence:
    """Whether a nonempty envy-free matching exists, with the deciding condition.

    Reasons, checked cheapest first: ``corollary-c`` (``|N(X)| >= |X| >= 1``),
    ``corollary-b`` (no matching saturates ``N(X)``), ``corollary-a``
    (``(X ∪ N(X))`` is not Y-path-saturated). A negative answer carries
    ``y-path-saturated``.
    """
    dec = decompose(graph)
    nonempty = bool(dec.x_l)
    if not nonempty:
        return EfmExistence(False, "y-path-saturated")
    n_x = neighbors(graph, range(graph.x_count))
    if len(n_x) >= graph.x_count >= 1:
        return EfmExistence(True, "corollary-c")
    if len(dec.base_matching) < len(n_x):
        return EfmExistence(True, "corollary-b")
    return EfmExistence(True, "corollary-a")


@dataclass(frozen=True)
class StarMatching:
    """Vertex-disjoint copies of ``K_{1,r}``: centres in X, leaves in Y."""

    r: int
    stars: tuple[tuple[int, frozenset[int]], ...]

    def __post_init__(self):
        if self.r < 1:
            raise InputError("r must be positive")
        centres = [c for c, _ in self.stars]
        if len(set(centres)) != len(centres):
            raise InputError("star centres must be distinct")
        seen: set[int] = set()
        for c, leaves in self.stars:
            if len(leaves) != self.r:
                raise InputError(f"star at x={c} has {len(leaves)} leaves, expected {self.r}")
            if seen & leaves:
                raise InputError("star leaf sets overlap")
            seen |= leaves

    def __len__(self) -> int:
        return len(self.stars)

    @property
    def centres(self) -> frozenset[int]:
        return frozenset(c for c, _ in self.stars)

    @property
    def leaves(self) -> frozenset[int]:
        return frozenset(y for _, ls in self.stars for y in ls)


def max_r_star_efm(graph: BipartiteGraph, r: int) -> StarMatching:
    """Maximum envy-free r-star matching via r copies of every X-vertex."""
    if r < 1:
        raise InputError("r must be a positive integer")
    copies = BipartiteGraph(
        graph.x_count * r,
        graph.y_count,
        tuple(graph.adjacency[x] for x in range(graph.x_count) for _ in range(r)),
    )
    efm = max_cardinality_efm(copies)
    leaves: dict[int, set[int]] = {}
    for xc, y in efm.pairs:
        leaves.setdefault(xc // r, set()).add(y)
    for x, ls in leaves.items():
        if len(ls) != r:
            raise InvariantError(f"copies of x={x} are only partly saturated ({len(ls)} of {r})")
    return StarMatching(r, tuple((x, frozenset(leaves[x])) for x in sorted(leaves)))


# --- symmetric envy on general graphs ----------------------------------------


@dataclass(frozen=True)
class SimpleGraph:
    """Undirected simple graph on vertices ``0..vertex_count-1``.

    ``weights`` (optional) maps each edge ``(u, v)`` with ``u < v`` to an
    exact non-negative number.
    """

    vertex_count: int
    edges: frozenset[tuple[int, int]]
    weights: Mapping[tuple[int, int], Fraction] | None = None

    def __post_init__(self):
        norm = set()
        for u, v in self.edges:
            if u == v:
                raise InputError(f"self-loop at {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise InputError(f"edge ({u},{v}) out of range")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))
        if self.weights is not None:
            w = {(min(u, v), max(u, v)): Fraction(x) for (u, v), x in self.weights.items()}
            if set(w) != norm:
                raise InputError("weights must cover exactly the edges")
            if any(x < 0 for x in w.values()):
                raise InputError("negative edge weight")
            object.__setattr__(self, "weights", w)

    @classmethod
    def from_edges(cls, vertex_count: int, edges: Iterable[tuple[int, int]], weights=None) -> "SimpleGraph":
        return cls(vertex_count, frozenset(tuple(e) for e in edges), weights)

    def components(self) -> list[list[int]]:
        g = nx.Graph()
        g.add_nodes_from(range(self.vertex_count))
        g.add_edges_from(self.edges)
        return sorted(sorted(c) for c in nx.connected_components(g))


def _min_weight_perfect_matching(graph: SimpleGraph, vertices: list[int]) -> set[tuple[int, int]] | None:
    if len(vertices) % 2:
        return None
    members = set(vertices)
    edges = sorted(e for e in graph.edges if e[0] in members)
    if graph.weights is None:
        ints = {e: 0 for e in edges}
    else:
        den = common_denominator(graph.weights[e] for e in edges)
        ints = {e: int(graph.weights[e] * den) for e in edges}
    # max-weight max-cardinality on (top + 1 - w) is min-weight among perfect ones
    top = max(ints.values(), default=0) + 1
    g = nx.Graph()
    g.add_nodes_from(vertices)
    for (u, v) in edges:
        g.add_edge(u, v, weight=top - ints[(u, v)])
    mate = nx.max_weight_matching(g, maxcardinality=True, weight="weight")
    pairs = {(min(u, v), max(u, v)) for u, v in mate}
    if 2 * len(pairs) != len(vertices):
        return None
    return pairs


def symmetric_efm(graph: SimpleGraph) -> frozenset[tuple[int, int]]:
    """Maximum (minimum-weight when weighted) symmetric-envy-free matching.

    The union, over connected components admitting a perfect matching, of a
    (minimum-weight) perfect matching of that component. Pairs are ``(u, v)``
    with ``u < v``.
    """
    out: set[tuple[int, int]] = set()
    for comp in graph.components():
        if len(comp) < 2:
            continue
        pm = _min_weight_perfect_matching(graph, comp)
        if pm is not None:
            out |= pm
    return frozenset(out)


def symmetric_efm_weight(graph: SimpleGraph, matching: Iterable[tuple[int, int]]) -> Fraction:
    if graph.weights is None:
        return Fraction(0)
    return sum((graph.weights[(min(u, v), max(u, v))] for u, v in matching), Fraction(0))
