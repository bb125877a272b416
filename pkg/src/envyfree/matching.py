"""Classical bipartite matching solvers.

``max_cardinality_matching`` is Hopcroft-Karp. The weighted solver is the
Hungarian method in its successive-shortest-path form: Dijkstra on reduced
costs with vertex potentials, one augmentation per phase, so it handles
unbalanced sides and partial (non-perfect) maximum matchings directly.
All weight arithmetic is on Python integers; rational inputs are scaled by
a common denominator first.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Literal

from .errors import InputError, InvariantError
from .graph import BipartiteGraph, Matching, WeightedBipartiteGraph
from .rationals import common_denominator

Objective = Literal["minimize", "maximize"]

_FREE = -1


def hopcroft_karp(graph: BipartiteGraph) -> list[int]:
    """Maximum matching as a ``mate_x`` list (``-1`` for unmatched x)."""
    adj = graph.adjacency
    nx, ny = graph.x_count, graph.y_count
    mate_x = [_FREE] * nx
    mate_y = [_FREE] * ny

    # greedy warm start; first free neighbour in ascending order
    for x in range(nx):
        for y in adj[x]:
            if mate_y[y] == _FREE:
                mate_x[x] = y
                mate_y[y] = x
                break

    while True:
        dist = [-1] * nx
        queue = [x for x in range(nx) if mate_x[x] == _FREE]
        for x in queue:
            dist[x] = 0
        limit = -1
        head = 0
        while head < len(queue):
            x = queue[head]
            head += 1
            if limit != -1 and dist[x] >= limit:
                continue
            for y in adj[x]:
                x2 = mate_y[y]
                if x2 == _FREE:
                    if limit == -1:
                        limit = dist[x]
                elif dist[x2] == -1:
                    dist[x2] = dist[x] + 1
                    queue.append(x2)
        if limit == -1:
            break

        ptr = [0] * nx
        for root in range(nx):
            if mate_x[root] != _FREE or dist[root] != 0:
                continue
            stack = [root]
            path_y: list[int] = []
            while stack:
                x = stack[-1]
                row = adj[x]
                i = ptr[x]
                moved = False
                while i < len(row):
                    y = row[i]
                    i += 1
                    x2 = mate_y[y]
                    if x2 == _FREE:
                        if dist[x] != limit:
                            continue
                        ptr[x] = i
                        path_y.append(y)
                        for xx, yy in zip(stack, path_y):
                            mate_x[xx] = yy
                            mate_y[yy] = xx
                        stack = []
                        moved = True
                        break
                    if dist[x] < limit and dist[x2] == dist[x] + 1:
                        ptr[x] = i
                        path_y.append(y)
                        stack.append(x2)
                        moved = True
                        break
                if not moved:
                    ptr[x] = i
                    dist[x] = -2  # dead end for the rest of the phase
                    stack.pop()
                    if path_y:
                        path_y.pop()
    return mate_x


def max_cardinality_matching(graph: BipartiteGraph) -> Matching:
    """A maximum-cardinality matching; deterministic for a given graph."""
    mate_x = hopcroft_karp(graph)
    return Matching(frozenset((x, y) for x, y in enumerate(mate_x) if y != _FREE))


def min_cost_max_matching(
    x_count: int, y_count: int, adjacency, cost: dict[tuple[int, int], int]
) -> list[int]:
    """Minimum-cost matching among those of maximum cardinality.

    ``cost`` holds non-negative integers. Returns ``mate_x``.
    """
    px = [0] * x_count
    py = [0] * y_count
    pt = 0
    mate_x = [_FREE] * x_count
    mate_y = [_FREE] * y_count

    while True:
        dx: list = [None] * x_count
        dy: list = [None] * y_count
        pred = [_FREE] * y_count
        heap: list = []
        for x in range(x_count):
            if mate_x[x] == _FREE:
                dx[x] = -px[x]
                heap.append((dx[x], 0, x))
        heapq.heapify(heap)
        while heap:
            d, side, v = heapq.heappop(heap)
            if side == 0:
                if d != dx[v]:
                    continue
                for y in adjacency[v]:
                    if mate_x[v] == y:
                        continue
                    nd = d + cost[(v, y)] + px[v] - py[y]
                    if dy[y] is None or nd < dy[y]:
                        dy[y] = nd
                        pred[y] = v
                        heapq.heappush(heap, (nd, 1, y))
            else:
                if d != dy[v]:
                    continue
                x2 = mate_y[v]
                if x2 == _FREE:
                    continue
                nd = d - cost[(x2, v)] + py[v] - px[x2]
                if dx[x2] is None or nd < dx[x2]:
                    dx[x2] = nd
                    heapq.heappush(heap, (nd, 0, x2))

        best = None
        for y in range(y_count):
            if mate_y[y] == _FREE and dy[y] is not None:
                cand = (dy[y] + py[y] - pt, y)
                if best is None or cand < best:
                    best = cand
        if best is None:
            return mate_x
        cap, target = best
        for x in range(x_count):
            px[x] += cap if dx[x] is None else min(dx[x], cap)
        for y in range(y_count):
            py[y] += cap if dy[y] is None else min(dy[y], cap)
        pt += cap

        y = target
        while True:
            x = pred[y]
            prev = mate_x[x]
            mate_x[x] = y
            mate_y[y] = x
            if prev == _FREE:
                break
            y = prev


def _integer_weights(wg: WeightedBipartiteGraph) -> dict[tuple[int, int], int]:
    den = common_denominator(wg.weights.values())
    out = {}
    for e, w in wg.weights.items():
        if w < 0:
            raise InputError(f"negative weight {w} on edge {e}")
        scaled = w * den
        if scaled.denominator != 1:
            raise InvariantError("weight scaling did not clear denominators")
        out[e] = int(scaled)
    return out


def _lexicographic_costs(graph: BipartiteGraph) -> tuple[dict[tuple[int, int], int], int]:
    """Per-edge secondary costs ranking matchings of equal size lexicographically.

    A matching is read as the vector ``(partner of x0, partner of x1, ...)``
    with ``y_count`` standing for "unmatched"; this is base ``y_count + 1``
    positional notation with x0 most significant. Every edge carries the
    the same offset so costs are non-negative; matchings of equal size
    shift by the same amount. Also returns an exclusive upper bound on the
    total secondary cost of any matching.
    """
    nx, ny = graph.x_count, graph.y_count
    base = ny + 1
    top = nx - 1
    offset = ny * base**top if nx else 0
    costs = {(x, y): offset + (y - ny) * base ** (top - x) for x, y in graph.edges()}
    bound = min(nx, ny) * offset + 1
    return costs, bound


def extreme_weight_max_cardinality_matching(
    wg: WeightedBipartiteGraph, objective: Objective = "minimize", *, tie_break: bool = True
) -> Matching:
    """Among maximum-cardinality matchings, one of minimum or maximum weight.

    With ``tie_break`` (the default) the result is the lexicographically
    smallest sorted pair list among all optimal matchings.
    """
    if objective not in ("minimize", "maximize"):
        raise InputError(f"objective must be 'minimize' or 'maximize', got {objective!r}")
    graph = wg.graph
    weights = _integer_weights(wg)
    if objective == "maximize":
        # constant per-edge shift is harmless since all candidates share a size
        top = max(weights.values(), default=0)
        weights = {e: top - w for e, w in weights.items()}
    if tie_break:
        secondary, scale = _lexicographic_costs(graph)
        cost = {e: w * scale + secondary[e] for e, w in weights.items()}
    else:
        cost = weights
    mate_x = min_cost_max_matching(graph.x_count, graph.y_count, graph.adjacency, cost)
    return Matching(frozenset((x, y) for x, y in enumerate(mate_x) if y != _FREE))


def matching_weight(wg: WeightedBipartiteGraph, m: Matching) -> Fraction:
    return wg.weight_of(m)
