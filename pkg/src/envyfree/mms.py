"""Maximin-share allocation of indivisible objects.

The protocol is a lone-divider loop over a bipartite agent/bundle graph:
the lowest-index remaining agent splits the remaining objects into one
bundle per remaining agent, every agent is linked to the bundles it finds
acceptable, and a maximum envy-free matching decides who leaves with what.

A divider never solves a fresh partition problem. Each agent keeps the
pile partition that witnessed its maximin share at the start and, when
asked to divide, regroups those (partly emptied) piles greedily. The
regrouping routines below are the constructive content of the counting
arguments that show enough acceptable bundles always remain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Sequence

from .efm import max_cardinality_efm
from .errors import InputError, InvariantError
from .graph import BipartiteGraph
from .rationals import format_rational, parse_rational

MAX_EXACT_OBJECTS = 16

KINDS = ("two_n_minus_2", "l_out", "two_thirds")


@dataclass(frozen=True)
class Variant:
    """Fairness guarantee an agent asks for.

    ``two_n_minus_2``: 1-out-of-(2n-2) maximin share.
    ``l_out``: (l-1) times the 1-out-of-(ln-2) maximin share.
    ``two_thirds``: 2/3 of the 1-out-of-n maximin share.
    """

    kind: str = "two_n_minus_2"
    l: int = 2

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown variant {self.kind!r}")
        if self.kind == "l_out" and self.l < 2:
            raise InputError("l-out variant needs l >= 2")

    def pile_count(self, n: int) -> int:
        if self.kind == "two_n_minus_2":
            return 2 * n - 2
        if self.kind == "l_out":
            return self.l * n - 2
        return n

    @property
    def threshold(self) -> Fraction:
        """Bundle value required once the agent's share is normalised to 1."""
        if self.kind == "two_n_minus_2":
            return Fraction(1)
        if self.kind == "l_out":
            return Fraction(self.l - 1)
        return Fraction(2, 3)

    @property
    def regroup_kind(self) -> str:
        return {"two_n_minus_2": "unit", "l_out": "l_minus_1", "two_thirds": "two_thirds"}[self.kind]

    @classmethod
    def parse(cls, value) -> "Variant":
        if isinstance(value, Variant):
            return value
        if isinstance(value, str):
            key = value.strip().lower().replace("_", "-")
            if key in ("2n-2", "two-n-minus-2"):
                return cls("two_n_minus_2")
            if key in ("two-thirds", "2/3"):
                return cls("two_thirds")
            if key.startswith("l-out:") or key.startswith("l-out="):
                return cls("l_out", _positive_int(key[6:]))
        if isinstance(value, Mapping) and set(value) == {"l-out"}:
            return cls("l_out", _positive_int(value["l-out"]))
        raise InputError(f"unrecognised variant {value!r}; use '2n-2', {{'l-out': l}} or 'two-thirds'")

    def to_json(self):
        if self.kind == "two_n_minus_2":
            return "2n-2"
        if self.kind == "l_out":
            return {"l-out": self.l}
        return "two-thirds"


def _positive_int(value) -> int:
    try:
        out = int(value)
    except (TypeError, ValueError) as exc:
        raise InputError(f"expected a positive integer, got {value!r}") from exc
    if isinstance(value, bool) or out < 1 or (isinstance(value, float)):
        raise InputError(f"expected a positive integer, got {value!r}")
    return out


@dataclass(frozen=True)
class MmsInstance:
    """``values[i][o]``: agent i's value for object o (additive)."""

    values: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(Fraction(v) for v in row) for row in self.values)
        if rows and len({len(r) for r in rows}) != 1:
            raise InputError("every agent must value the same objects")
        if any(v < 0 for r in rows for v in r):
            raise InputError("object values must be non-negative")
        object.__setattr__(self, "values", rows)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def m(self) -> int:
        return len(self.values[0]) if self.values else 0

    def bundle_value(self, agent: int, bundle) -> Fraction:
        row = self.values[agent]
        return sum((row[o] for o in bundle), Fraction(0))


@dataclass(frozen=True)
class ObjectAllocation:
    bundles: tuple[frozenset[int], ...]
    thresholds: tuple[Fraction, ...] | None = None

    def values(self, instance: MmsInstance) -> list[Fraction]:
        return [instance.bundle_value(i, b) for i, b in enumerate(self.bundles)]


@dataclass(frozen=True)
class PileState:
    """One agent's bookkeeping: its reference piles and what has been given away.

    ``values`` are the agent's normalised object values, ``matched`` counts
    agents served so far.
    """

    values: tuple[Fraction, ...]
    piles: tuple[frozenset[int], ...]
    variant: Variant
    removed: frozenset[int] = frozenset()
    matched: int = 0

    def __post_init__(self):
        seen: set[int] = set()
        for p in self.piles:
            if seen & p:
                raise InputError("reference piles overlap")
            seen |= p
        if seen != set(range(len(self.values))):
            raise InputError("reference piles must cover every object exactly once")

    def pile_values(self) -> list[Fraction]:
        return [sum((self.values[o] for o in p), Fraction(0)) for p in self.piles]

    def removed_values(self) -> list[Fraction]:
        return [sum((self.values[o] for o in p & self.removed), Fraction(0)) for p in self.piles]

    def after_round(self, taken: frozenset[int], newly_matched: int) -> "PileState":
        return replace(self, removed=self.removed | taken, matched=self.matched + newly_matched)


# --- maximin share ---------------------------------------------------------------


def mms_value(values: Sequence, l: int, d: int) -> tuple[Fraction, tuple[frozenset[int], ...]]:
    """l-out-of-d maximin share and a partition attaining it.

    The share is the best, over partitions into ``d`` (possibly empty)
    piles, of the total of the ``l`` least valuable piles. Branch and bound
    over objects in decreasing value, skipping piles whose running totals
    tie with an earlier pile.
    """
    vals = [Fraction(v) for v in values]
    if l < 1 or d < 1:
        raise InputError("l and d must be positive")
    if l > d:
        raise InputError(f"l={l} exceeds d={d}")
    if len(vals) > MAX_EXACT_OBJECTS:
        raise InputError(f"exact maximin share is limited to {MAX_EXACT_OBJECTS} objects")
    if any(v < 0 for v in vals):
        raise InputError("object values must be non-negative")

    order = sorted(range(len(vals)), key=lambda o: (-vals[o], o))
    total = sum(vals, Fraction(0))
    cap = total * l / d
    suffix = [Fraction(0)] * (len(order) + 1)
    for pos in range(len(order) - 1, -1, -1):
        suffix[pos] = suffix[pos + 1] + vals[order[pos]]

    # greedy start: each object onto the currently lightest pile
    sums = [Fraction(0)] * d
    assign = [0] * len(vals)
    for o in order:
        i = min(range(d), key=lambda j: (sums[j], j))
        sums[i] += vals[o]
        assign[o] = i
    best_val = sum(sorted(sums)[:l], Fraction(0))
    best_assign = list(assign)

    sums = [Fraction(0)] * d
    current = [0] * len(vals)
    explored: set[tuple[int, tuple[Fraction, ...]]] = set()

    def upper_bound(ranked: list[Fraction], rest: Fraction) -> Fraction:
        # the k lightest final piles hold at most the k lightest now plus the
        # rest, and the l lightest of them at most an l/k share of that
        best = None
        run = sum(ranked[:l], Fraction(0))
        for k in range(l, d + 1):
            if k > l:
                run += ranked[k - 1]
            cand = (run + rest) * l / k
            best = cand if best is None or cand < best else best
        return best

    def rec(pos: int) -> bool:
        nonlocal best_val, best_assign
        ranked = sorted(sums)
        if pos == len(order):
            score = sum(ranked[:l], Fraction(0))
            if score > best_val:
                best_val = score
                best_assign = list(current)
            return best_val >= cap
        key = (pos, tuple(ranked))
        if key in explored or upper_bound(ranked, suffix[pos]) <= best_val:
            return False
        explored.add(key)
        o = order[pos]
        tried: set[Fraction] = set()
        for i in range(d):
            if sums[i] in tried:
                continue
            tried.add(sums[i])
            sums[i] += vals[o]
            current[o] = i
            done = rec(pos + 1)
            sums[i] -= vals[o]
            if done:
                return True
        return False

    rec(0)
    piles = tuple(frozenset(o for o in range(len(vals)) if best_assign[o] == i) for i in range(d))
    return best_val, piles


# --- regrouping ---------------------------------------------------------------------


def regroup_bound(kind: str, pile_count: int, k: int, l: int = 2) -> int:
    """Number of groups the matching counting argument guarantees."""
    if kind == "unit":
        return max(0, math.ceil(Fraction(pile_count - k, 2)))
    if kind == "l_minus_1":
        return max(0, (pile_count - (l - 1) * k + 1) // l)
    if kind == "two_thirds":
        return max(0, pile_count - k)
    raise InputError(f"unknown regroup kind {kind!r}")


def regroup_piles(v: Sequence, s: Sequence, kind: str, k: int, l: int = 2) -> list[list[int]]:
    """Group pile indices so every group keeps enough value after removals.

    ``v[j]`` is the original value of pile j (at least 1), ``s[j]`` the value
    already removed from it. ``d[j] = v[j] - s[j]`` is what is left. Groups
    reach a remaining total of 1 (``unit``), ``l - 1`` (``l_minus_1``) or
    2/3 (``two_thirds``). Piles not in any returned group are leftovers.
    """
    v = [Fraction(x) for x in v]
    s = [Fraction(x) for x in s]
    if len(v) != len(s):
        raise InputError("v and s must have equal length")
    for j, (vj, sj) in enumerate(zip(v, s)):
        if vj < 1:
            raise InputError(f"pile {j} has original value {vj} < 1")
        if not 0 <= sj <= vj:
            raise InputError(f"pile {j} has removed value {sj} outside [0, {vj}]")
    removed = sum(s, Fraction(0))
    budget = {"unit": Fraction(k), "l_minus_1": Fraction((l - 1) * k), "two_thirds": Fraction(2 * k, 3)}
    if kind not in budget:
        raise InputError(f"unknown regroup kind {kind!r}")
    if removed > budget[kind]:
        raise InputError(f"removed value {removed} exceeds the {kind} budget {budget[kind]} for k={k}")

    frac_left = [1 - sj / vj for vj, sj in zip(v, s)]
    if kind == "two_thirds":
        singles = [j for j, t in enumerate(frac_left) if t >= Fraction(2, 3)]
        halves = [j for j, t in enumerate(frac_left) if Fraction(1, 3) <= t < Fraction(2, 3)]
        groups = [[j] for j in singles] + [halves[i : i + 2] for i in range(0, len(halves) - 1, 2)]
        need = Fraction(2, 3)
    else:
        need = Fraction(1) if kind == "unit" else Fraction(l - 1)
        groups = []
        current: list[int] = []
        acc = Fraction(0)
        for j, t in enumerate(frac_left):
            current.append(j)
            acc += t
            if acc >= need:
                groups.append(current)
                current, acc = [], Fraction(0)

    for g in groups:
        if sum((v[j] - s[j] for j in g), Fraction(0)) < need:
            raise InvariantError(f"group {g} falls short of {need}")
    if len(groups) < regroup_bound(kind, len(v), k, l):
        raise InvariantError("regrouping produced fewer groups than guaranteed")
    return groups


def divider_partition(state: PileState, parts: int, threshold: Fraction | None = None) -> list[frozenset[int]]:
    """Split the objects still available into ``parts`` bundles worth ``threshold`` each.

    Groups from :func:`regroup_piles` become bundles; surplus groups and
    leftover piles are swept into the last bundle.
    """
    if parts < 1:
        raise InputError("parts must be positive")
    threshold = state.variant.threshold if threshold is None else Fraction(threshold)
    groups = regroup_piles(
        state.pile_values(), state.removed_values(), state.variant.regroup_kind, state.matched, state.variant.l
    )
    if len(groups) < parts:
        raise InvariantError(f"only {len(groups)} acceptable groups for {parts} bundles")
    kept = groups[: parts - 1]
    used = {j for g in kept for j in g}
    kept.append([j for j in range(len(state.piles)) if j not in used])
    bundles = [frozenset(o for j in g for o in state.piles[j] - state.removed) for g in kept]
    for b in bundles:
        if sum((state.values[o] for o in b), Fraction(0)) < threshold:
            raise InvariantError("divider bundle below threshold")
    return bundles


# --- protocol -------------------------------------------------------------------------


def _validate_witness(piles, m: int, d: int) -> tuple[frozenset[int], ...]:
    try:
        piles = tuple(frozenset(int(o) for o in p) for p in piles)
    except (TypeError, ValueError) as exc:
        raise InputError("witness piles must be lists of object indices") from exc
    if len(piles) != d:
        raise InputError(f"witness must have {d} piles, got {len(piles)}")
    flat = [o for p in piles for o in p]
    if sorted(flat) != list(range(m)) or sum(len(p) for p in piles) != m:
        raise InputError("witness piles must partition all objects")
    return piles


def allocate(
    instance: MmsInstance,
    variant="two_n_minus_2",
    *,
    per_agent_variants: Sequence | None = None,
    witnesses: Sequence | None = None,
) -> ObjectAllocation:
    """Allocate every object so each agent reaches its variant's threshold.

    ``per_agent_variants`` lets agents pick different guarantees.
    ``witnesses`` supplies each agent's reference pile partition instead of
    computing the maximin share exactly; the agent's share is then taken to
    be its least valuable witness pile. Returned thresholds are in the
    agents' original units.
    """
    n, m = instance.n, instance.m
    if n < 2:
        raise InputError("the protocol needs at least two agents")
    if per_agent_variants is not None:
        if len(per_agent_variants) != n:
            raise InputError("per_agent_variants needs one entry per agent")
        variants = [Variant.parse(v) for v in per_agent_variants]
    else:
        variants = [Variant.parse(variant)] * n
    if witnesses is not None and len(witnesses) != n:
        raise InputError("witnesses needs one partition per agent")

    states: dict[int, PileState] = {}
    thresholds: list[Fraction] = []
    bundles: dict[int, frozenset[int]] = {}
    for i in range(n):
        var = variants[i]
        d = var.pile_count(n)
        if witnesses is not None and witnesses[i] is not None:
            piles = _validate_witness(witnesses[i], m, d)
            share = min(instance.bundle_value(i, p) for p in piles)
        else:
            share, piles = mms_value(instance.values[i], 1, d)
        thresholds.append(var.threshold * share)
        if share == 0:
            bundles[i] = frozenset()
            continue
        normalised = tuple(x / share for x in instance.values[i])
        states[i] = PileState(normalised, piles, var)

    remaining = sorted(states)
    available = frozenset(range(m))
    while remaining:
        divider = remaining[0]
        k = len(remaining)
        try:
            offer = divider_partition(states[divider], k)
        except InputError as exc:
            raise InvariantError(f"divider {divider} cannot regroup: {exc}") from exc
        adjacency = tuple(
            tuple(
                j
                for j, b in enumerate(offer)
                if sum((states[i].values[o] for o in b), Fraction(0)) >= states[i].variant.threshold
            )
            for i in remaining
        )
        efm = max_cardinality_efm(BipartiteGraph(k, k, adjacency))
        if not efm:
            raise InvariantError("allocation round matched nobody")
        taken = frozenset(o for j in efm.y_matched for o in offer[j])
        for xi, j in efm.pairs:
            bundles[remaining[xi]] = offer[j]
        available -= taken
        remaining = [a for xi, a in enumerate(remaining) if xi not in efm.x_matched]
        for a in remaining:
            states[a] = states[a].after_round(taken, len(efm))

    if available:
        # only reachable when every agent's share is zero
        bundles[0] = bundles[0] | available
    result = ObjectAllocation(tuple(bundles[i] for i in range(n)), tuple(thresholds))
    if sorted(o for b in result.bundles for o in b) != list(range(m)):
        raise InvariantError("bundles do not partition the objects")
    return result


# --- JSON -------------------------------------------------------------------------------


def mms_instance_from_json(data) -> tuple[MmsInstance, Variant, list[Variant] | None]:
    if not isinstance(data, Mapping) or not isinstance(data.get("values"), list):
        raise InputError("mms instance must be an object with a 'values' matrix")
    rows = []
    for row in data["values"]:
        if not isinstance(row, list):
            raise InputError("each row of 'values' must be a list")
        for x in row:
            if isinstance(x, float):
                raise InputError(f"value {x!r} is a binary float; write it as a string")
        rows.append(tuple(parse_rational(x) for x in row))
    instance = MmsInstance(tuple(rows))
    variant = Variant.parse(data.get("variant", "2n-2"))
    per_agent = data.get("per_agent_variants")
    if per_agent is not None:
        per_agent = [Variant.parse(v) for v in per_agent]
    return instance, variant, per_agent


def mms_instance_to_json(instance: MmsInstance, variant: Variant | None = None) -> dict:
    out: dict = {"values": [[format_rational(x) for x in row] for row in instance.values]}
    if variant is not None:
        out["variant"] = variant.to_json()
    return out
