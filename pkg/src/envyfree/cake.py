"""Exact proportional cake-cutting on ``[0, 1]``.

Valuations are piecewise-constant densities with rational breakpoints, and
pieces are finite unions of half-open rational intervals, so every value
comparison the protocols make is exact.

Two protocols are provided. :func:`lone_divider` lets the lowest-index
remaining agent cut, hands out pieces along a maximum envy-free matching
and repeats on what is left. :func:`symmetric_divide` picks the cut and
the matching from the valuations alone (smallest mark vector, power-of-two
edge weights, minimum-weight envy-free matching) and recurses on groups of
agents that are interchangeable, so no agent's value depends on its index.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .efm import max_cardinality_efm, min_weight_efm
from .errors import InputError, InvariantError
from .graph import BipartiteGraph, WeightedBipartiteGraph
from .rationals import format_rational, parse_rational

Interval = tuple[Fraction, Fraction]

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class Piece:
    """A finite union of disjoint half-open intervals ``[a, b)`` inside ``[0, 1]``.

    Stored sorted with touching intervals merged and empty ones dropped, so
    two pieces covering the same set compare equal.
    """

    intervals: tuple[Interval, ...] = ()

    def __post_init__(self):
        ivs = []
        for a, b in self.intervals:
            a, b = Fraction(a), Fraction(b)
            if a < 0 or b > 1:
                raise InputError(f"interval [{a}, {b}) leaves the cake [0, 1]")
            if a > b:
                raise InputError(f"interval [{a}, {b}) has negative length")
            if a < b:
                ivs.append((a, b))
        ivs.sort()
        merged: list[Interval] = []
        for a, b in ivs:
            if merged and a < merged[-1][1]:
                raise InputError("intervals of a piece overlap")
            if merged and a == merged[-1][1]:
                merged[-1] = (merged[-1][0], b)
            else:
                merged.append((a, b))
        object.__setattr__(self, "intervals", tuple(merged))

    @classmethod
    def whole(cls) -> "Piece":
        return cls(((ZERO, ONE),))

    @classmethod
    def union(cls, pieces: Iterable["Piece"]) -> "Piece":
        return cls(tuple(iv for p in pieces for iv in p.intervals))

    def __bool__(self) -> bool:
        return bool(self.intervals)

    @property
    def length(self) -> Fraction:
        return sum((b - a for a, b in self.intervals), ZERO)

    def clip(self, lo: Fraction, hi: Fraction) -> "Piece":
        """Intersection with ``[lo, hi)``."""
        out = []
        for a, b in self.intervals:
            a2, b2 = max(a, lo), min(b, hi)
            if a2 < b2:
                out.append((a2, b2))
        return Piece(tuple(out))

    def to_json(self) -> list[list[str]]:
        return [[format_rational(a), format_rational(b)] for a, b in self.intervals]

    @classmethod
    def from_json(cls, data) -> "Piece":
        try:
            return cls(tuple((parse_rational(a), parse_rational(b)) for a, b in data))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed piece {data!r}") from exc


@dataclass(frozen=True)
class PiecewiseConstantValuation:
    """Density ``densities[k]`` on ``[breakpoints[k], breakpoints[k+1])``."""

    breakpoints: tuple[Fraction, ...]
    densities: tuple[Fraction, ...]

    def __post_init__(self):
        bps = tuple(Fraction(b) for b in self.breakpoints)
        dens = tuple(Fraction(d) for d in self.densities)
        if len(bps) < 2 or bps[0] != 0 or bps[-1] != 1:
            raise InputError("breakpoints must start at 0 and end at 1")
        if any(b <= a for a, b in zip(bps, bps[1:])):
            raise InputError("breakpoints must be strictly increasing")
        if len(dens) != len(bps) - 1:
            raise InputError(f"expected {len(bps) - 1} densities, got {len(dens)}")
        if any(d < 0 for d in dens):
            raise InputError("densities must be non-negative")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "densities", dens)

    @classmethod
    def uniform(cls) -> "PiecewiseConstantValuation":
        return cls((ZERO, ONE), (ONE,))

    def segments(self, piece: Piece) -> Iterator[tuple[Fraction, Fraction, Fraction]]:
        """``(a, b, density)`` for each constant-density part of ``piece``, left to right."""
        bps = self.breakpoints
        for lo, hi in piece.intervals:
            k = bisect.bisect_right(bps, lo) - 1
            while k < len(self.densities) and bps[k] < hi:
                a, b = max(lo, bps[k]), min(hi, bps[k + 1])
                if a < b:
                    yield a, b, self.densities[k]
                k += 1

    def value(self, piece: Piece) -> Fraction:
        return sum(((b - a) * d for a, b, d in self.segments(piece)), ZERO)

    def scaled(self, factor) -> "PiecewiseConstantValuation":
        return PiecewiseConstantValuation(self.breakpoints, tuple(d * factor for d in self.densities))

    def to_json(self) -> dict:
        return {
            "breakpoints": [format_rational(b) for b in self.breakpoints],
            "densities": [format_rational(d) for d in self.densities],
        }

    @classmethod
    def from_json(cls, data) -> "PiecewiseConstantValuation":
        if not isinstance(data, Mapping) or "breakpoints" not in data or "densities" not in data:
            raise InputError("valuation needs 'breakpoints' and 'densities'")
        return cls(
            tuple(parse_rational(b) for b in data["breakpoints"]),
            tuple(parse_rational(d) for d in data["densities"]),
        )


@dataclass(frozen=True)
class CakeAllocation:
    pieces: tuple[Piece, ...]

    def values(self, valuations: Sequence[PiecewiseConstantValuation]) -> list[Fraction]:
        return [v.value(p) for v, p in zip(valuations, self.pieces)]


def evaluate(v: PiecewiseConstantValuation, piece: Piece) -> Fraction:
    """Exact value of ``piece`` under ``v``."""
    return v.value(piece)


def mark_equal_partition(v: PiecewiseConstantValuation, cake: Piece, n: int) -> list[Fraction]:
    """``n - 1`` marks cutting ``cake`` into ``n`` consecutive parts of equal value.

    Each mark is the leftmost point where the running value reaches the
    next multiple of ``total / n``.
    """
    if n < 1:
        raise InputError("n must be positive")
    total = v.value(cake)
    if total <= 0:
        raise InputError("cannot mark a cake worth nothing to the agent")
    targets = [total * k / n for k in range(1, n)]
    marks: list[Fraction] = []
    acc = ZERO
    t = 0
    for a, b, d in v.segments(cake):
        if t == len(targets):
            break
        if d == 0:
            continue
        seg_end = acc + (b - a) * d
        while t < len(targets) and targets[t] <= seg_end:
            marks.append(a + (targets[t] - acc) / d)
            t += 1
        acc = seg_end
    if len(marks) != n - 1:
        raise InvariantError("failed to place every mark")
    return marks


def cut_at_marks(cake: Piece, marks: Sequence[Fraction]) -> list[Piece]:
    bounds = [ZERO, *marks, ONE]
    return [cake.clip(lo, hi) for lo, hi in zip(bounds, bounds[1:])]


def _check_inputs(valuations, cake: Piece | None) -> tuple[list[PiecewiseConstantValuation], Piece]:
    vals = list(valuations)
    if not vals:
        raise InputError("at least one agent is required")
    cake = Piece.whole() if cake is None else cake
    for i, v in enumerate(vals):
        if v.value(cake) <= 0:
            raise InputError(f"agent {i} values the cake at zero")
    return vals, cake


def lone_divider(valuations: Sequence[PiecewiseConstantValuation], cake: Piece | None = None) -> CakeAllocation:
    """Proportional division by repeated lone-divider rounds.

    Values are compared in units where each agent's whole cake is worth
    ``n``; the divider cuts the remaining cake into equal parts.
    """
    vals, cake = _check_inputs(valuations, cake)
    n = len(vals)
    totals = [v.value(cake) for v in vals]
    remaining = list(range(n))
    rest = cake
    result: dict[int, Piece] = {}
    while remaining:
        divider = remaining[0]
        k = len(remaining)
        pieces = cut_at_marks(rest, mark_equal_partition(vals[divider], rest, k))
        adjacency = tuple(
            tuple(j for j, p in enumerate(pieces) if n * vals[i].value(p) >= totals[i]) for i in remaining
        )
        if len(adjacency[0]) != k:
            raise InvariantError("divider does not accept all of their own pieces")
        efm = max_cardinality_efm(BipartiteGraph(k, k, adjacency))
        if not efm:
            raise InvariantError("lone-divider round matched nobody")
        for xi, j in efm.pairs:
            result[remaining[xi]] = pieces[j]
        taken = efm.y_matched
        rest = Piece.union(p for j, p in enumerate(pieces) if j not in taken)
        remaining = [a for xi, a in enumerate(remaining) if xi not in efm.x_matched]
    return CakeAllocation(tuple(result[i] for i in range(n)))


# --- symmetric protocol --------------------------------------------------------


def lexicographic_cut(
    valuations: Sequence[PiecewiseConstantValuation], agents: Sequence[int], cake: Piece
) -> tuple[tuple[Fraction, ...], int]:
    """Smallest mark vector among ``agents`` and the lowest agent proposing it."""
    k = len(agents)
    best = None
    for i in agents:
        vec = tuple(mark_equal_partition(valuations[i], cake, k))
        if best is None or vec < best[0]:
            best = (vec, i)
    return best


def agent_weights(neighbour_sets: Sequence[tuple[int, ...]]) -> list[int]:
    """Rank of each agent's neighbour set among the distinct sets, in lexicographic order.

    Equal sets get equal weights and distinct sets distinct ones.
    """
    ranks = {s: r for r, s in enumerate(sorted(set(neighbour_sets)))}
    return [ranks[s] for s in neighbour_sets]


def edge_weight(n: int, agent_weight: int, piece_weight: int) -> int:
    return 2 ** (n * agent_weight + piece_weight)


def symmetric_divide(
    valuations: Sequence[PiecewiseConstantValuation],
    cake: Piece | None = None,
    *,
    rng: random.Random | None = None,
) -> CakeAllocation:
    """Symmetric proportional division.

    ``rng`` only permutes how the pieces reserved for agents adjacent to
    every piece are handed out among them; those agents value all pieces
    equally, so it never changes anyone's value. Leave it ``None`` for the
    deterministic ascending assignment.
    """
    vals, cake = _check_inputs(valuations, cake)
    result: dict[int, Piece] = {}
    _symmetric(vals, list(range(len(vals))), cake, result, rng)
    return CakeAllocation(tuple(result[i] for i in range(len(vals))))


def _symmetric(vals, agents: list[int], cake: Piece, out: dict[int, Piece], rng) -> None:
    k = len(agents)
    if k == 1:
        out[agents[0]] = cake
        return
    totals = {i: vals[i].value(cake) for i in agents}
    marks, _ = lexicographic_cut(vals, agents, cake)
    pieces = cut_at_marks(cake, marks)

    nbrs = [tuple(j for j, p in enumerate(pieces) if k * vals[i].value(p) >= totals[i]) for i in agents]
    a_w = agent_weights(nbrs)
    graph = BipartiteGraph(k, k, tuple(nbrs))
    # piece weight is its position from the left
    weights = {(xi, j): edge_weight(k, a_w[xi], j) for xi, j in graph.edges()}
    m = min_weight_efm(WeightedBipartiteGraph(graph, weights))
    exponents = [k * a_w[xi] + j for xi, j in m.pairs]
    if len(set(exponents)) != len(exponents):
        raise InvariantError("edge-weight exponents repeat inside the matching")

    mate = m.mate_x()
    everywhere = [xi for xi in range(k) if len(nbrs[xi]) == k]
    if not everywhere:
        raise InvariantError("no agent accepts every piece")
    if any(xi not in mate for xi in everywhere):
        raise InvariantError("an agent accepting every piece was left unmatched")
    reserved = sorted(mate[xi] for xi in everywhere)
    if rng is not None:
        rng.shuffle(reserved)
    for xi, j in zip(everywhere, reserved):
        out[agents[xi]] = pieces[j]

    groups: dict[int, list[int]] = {}
    for xi in sorted(mate):
        if len(nbrs[xi]) != k:
            groups.setdefault(a_w[xi], []).append(xi)
    for w in sorted(groups):
        members = groups[w]
        sub_cake = Piece.union(pieces[mate[xi]] for xi in members)
        _symmetric(vals, [agents[xi] for xi in members], sub_cake, out, rng)

    left_out = [xi for xi in range(k) if xi not in mate]
    if left_out:
        sub_cake = Piece.union(p for j, p in enumerate(pieces) if j not in m.y_matched)
        _symmetric(vals, [agents[xi] for xi in left_out], sub_cake, out, rng)


# --- JSON ----------------------------------------------------------------------


def cake_instance_from_json(data) -> list[PiecewiseConstantValuation]:
    if not isinstance(data, Mapping) or not isinstance(data.get("agents"), list):
        raise InputError("cake instance must be an object with an 'agents' list")
    return [PiecewiseConstantValuation.from_json(a) for a in data["agents"]]


def cake_instance_to_json(valuations: Sequence[PiecewiseConstantValuation]) -> dict:
    return {"agents": [v.to_json() for v in valuations]}
