"""Brute-force ground truth and allocation verifiers.

Everything here is written from the definitions alone and deliberately
shares no code with the solvers it is used to check. It is exponential and
meant for small instances; size bounds default to 14 vertices and 12
objects and can be raised through ``ENVYFREE_ORACLE_MAX_VERTICES`` and
``ENVYFREE_ORACLE_MAX_OBJECTS``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .errors import InputError

Pair = tuple[int, int]


def max_vertices() -> int:
    return int(os.environ.get("ENVYFREE_ORACLE_MAX_VERTICES", "14"))


def max_objects() -> int:
    return int(os.environ.get("ENVYFREE_ORACLE_MAX_OBJECTS", "12"))


def _rows(graph) -> list[list[int]]:
    return [list(row) for row in graph.adjacency]


# --- matchings ---------------------------------------------------------------


def enumerate_matchings(graph) -> list[frozenset[Pair]]:
    """Every matching of a bipartite graph, the empty one included.

    Recursion over x in ascending order: each x stays unmatched or takes a
    still-free neighbour in ascending order, so each matching appears once.
    """
    rows = _rows(graph)
    out: list[frozenset[Pair]] = []
    used: set[int] = set()
    chosen: list[Pair] = []

    def rec(x: int) -> None:
        if x == len(rows):
            out.append(frozenset(chosen))
            return
        rec(x + 1)
        for y in rows[x]:
            if y not in used:
                used.add(y)
                chosen.append((x, y))
                rec(x + 1)
                chosen.pop()
                used.discard(y)

    rec(0)
    return out


def envy_free_by_definition(graph, matching: Iterable[Pair]) -> bool:
    matching = list(matching)
    mx = {x for x, _ in matching}
    my = {y for _, y in matching}
    for x, row in enumerate(graph.adjacency):
        if x not in mx and any(y in my for y in row):
            return False
    return True


def _check_vertex_bound(graph, bound: int | None) -> None:
    bound = max_vertices() if bound is None else bound
    if graph.x_count + graph.y_count > bound:
        raise InputError(
            f"oracle limited to {bound} vertices, graph has {graph.x_count + graph.y_count}"
        )


def enumerate_efms(graph, bound: int | None = None) -> list[frozenset[Pair]]:
    """All envy-free matchings (including the empty one)."""
    _check_vertex_bound(graph, bound)
    return [m for m in enumerate_matchings(graph) if envy_free_by_definition(graph, m)]


def brute_max_matching_size(graph, bound: int | None = None) -> int:
    _check_vertex_bound(graph, bound)
    return max(len(m) for m in enumerate_matchings(graph))


def brute_extreme_weight(weights: dict[Pair, Fraction], matchings: Sequence[frozenset[Pair]]):
    """(min, max) total weight over the largest members of ``matchings``."""
    if not matchings:
        raise InputError("no matchings supplied")
    top = max(len(m) for m in matchings)
    totals = [sum((weights[p] for p in m), Fraction(0)) for m in matchings if len(m) == top]
    return min(totals), max(totals)


def brute_max_r_star(graph, r: int, bound: int | None = None) -> int:
    """Largest number of stars in an envy-free r-star matching."""
    _check_vertex_bound(graph, bound)
    rows = _rows(graph)
    best = 0
    used: set[int] = set()
    centres: list[int] = []

    def envy_free() -> bool:
        cs = set(centres)
        return all(x in cs or not (set(row) & used) for x, row in enumerate(rows))

    def rec(x: int) -> None:
        nonlocal best
        if x == len(rows):
            if len(centres) > best and envy_free():
                best = len(centres)
            return
        rec(x + 1)
        free = [y for y in rows[x] if y not in used]
        for leaves in combinations(free, r):
            used.update(leaves)
            centres.append(x)
            rec(x + 1)
            centres.pop()
            used.difference_update(leaves)

    rec(0)
    return best


def brute_symmetric_efm(vertex_count: int, edges: Iterable[Pair], weights: dict[Pair, Fraction] | None = None):
    """(max size, min weight at that size) over symmetric-envy-free matchings.

    A matching is symmetric-envy-free when no unmatched vertex is adjacent
    to a matched one.
    """
    edges = sorted((min(u, v), max(u, v)) for u, v in edges)
    if vertex_count > max_vertices():
        raise InputError(f"oracle limited to {max_vertices()} vertices")
    adj: dict[int, set[int]] = {v: set() for v in range(vertex_count)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    best_size, best_weight = 0, Fraction(0)
    chosen: list[Pair] = []
    used: set[int] = set()

    def rec(i: int) -> None:
        nonlocal best_size, best_weight
        if i == len(edges):
            ok = all(v in used or not (adj[v] & used) for v in range(vertex_count))
            if not ok:
                return
            w = sum((weights[e] for e in chosen), Fraction(0)) if weights else Fraction(0)
            size = len(chosen)
            if size > best_size or (size == best_size and w < best_weight):
                best_size, best_weight = size, w
            return
        rec(i + 1)
        u, v = edges[i]
        if u not in used and v not in used:
            used.update((u, v))
            chosen.append((u, v))
            rec(i + 1)
            chosen.pop()
            used.difference_update((u, v))

    rec(0)
    return best_size, best_weight


# --- maximin share -------------------------------------------------------------


def brute_mms(values: Sequence, l: int, d: int, bound: int | None = None) -> Fraction:
    """l-out-of-d maximin share by exhausting every assignment of objects to piles.

    Assignments are explored object by object, keeping the multiset of pile
    totals (piles are interchangeable), so the final level holds the pile
    totals of every d-partition.
    """
    vals = [Fraction(v) for v in values]
    bound = max_objects() if bound is None else bound
    if len(vals) > bound:
        raise InputError(f"oracle limited to {bound} objects, got {len(vals)}")
    if not 1 <= l <= d:
        raise InputError("need 1 <= l <= d")
    states = {tuple([Fraction(0)] * d)}
    for v in vals:
        nxt = set()
        for st in states:
            for i in range(d):
                if i and st[i] == st[i - 1]:
                    continue
                piles = list(st)
                piles[i] += v
                nxt.add(tuple(sorted(piles)))
        states = nxt
    return max(sum(st[:l], Fraction(0)) for st in states)


def variant_threshold(values: Sequence, n: int, variant) -> Fraction:
    """The guarantee a variant promises, recomputed from scratch."""
    if variant.kind == "two_n_minus_2":
        return brute_mms(values, 1, 2 * n - 2)
    if variant.kind == "l_out":
        return (variant.l - 1) * brute_mms(values, 1, variant.l * n - 2)
    if variant.kind == "two_thirds":
        return Fraction(2, 3) * brute_mms(values, 1, n)
    raise InputError(f"unknown variant {variant!r}")


# --- verification -------------------------------------------------------------


@dataclass(frozen=True)
class AgentCheck:
    agent: int
    value: Fraction
    threshold: Fraction

    @property
    def margin(self) -> Fraction:
        return self.value - self.threshold

    @property
    def ok(self) -> bool:
        return self.value >= self.threshold


@dataclass(frozen=True)
class VerificationReport:
    kind: str
    checks: tuple[AgentCheck, ...] = ()
    problems: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.problems and all(c.ok for c in self.checks)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "ok": self.ok,
            "problems": list(self.problems),
            "checks": [
                {
                    "agent": c.agent,
                    "value": str(c.value),
                    "threshold": str(c.threshold),
                    "margin": str(c.margin),
                    "ok": c.ok,
                }
                for c in self.checks
            ],
        }


def _integrate(breakpoints, densities, lo: Fraction, hi: Fraction) -> Fraction:
    total = Fraction(0)
    for a, b, dens in zip(breakpoints, breakpoints[1:], densities):
        left, right = max(a, lo), min(b, hi)
        if left < right:
            total += (right - left) * dens
    return total


def verify_cake_proportional(valuations, pieces, cake=None) -> VerificationReport:
    """Exact partition and ``n * V_i(Z_i) >= V_i(C)`` for every agent.

    ``valuations`` are objects with ``breakpoints``/``densities``; ``pieces``
    and ``cake`` are lists of ``(a, b)`` half-open intervals.
    """
    n = len(valuations)
    cake_ivs = [(Fraction(0), Fraction(1))] if cake is None else [(Fraction(a), Fraction(b)) for a, b in cake]
    problems: list[str] = []
    if len(pieces) != n:
        raise InputError(f"{len(pieces)} pieces for {n} agents")
    flat = sorted((Fraction(a), Fraction(b)) for p in pieces for a, b in p if Fraction(a) < Fraction(b))
    for (a1, b1), (a2, b2) in zip(flat, flat[1:]):
        if a2 < b1:
            problems.append(f"pieces overlap on [{a2}, {min(b1, b2)})")
    covered: list[list[Fraction]] = []
    for a, b in flat:
        if covered and a == covered[-1][1]:
            covered[-1][1] = max(covered[-1][1], b)
        elif covered and a < covered[-1][1]:
            covered[-1][1] = max(covered[-1][1], b)
        else:
            covered.append([a, b])
    target: list[list[Fraction]] = []
    for a, b in sorted(cake_ivs):
        if target and a <= target[-1][1]:
            target[-1][1] = max(target[-1][1], b)
        elif a < b:
            target.append([a, b])
    if covered != target:
        problems.append("pieces do not cover the cake exactly")

    checks = []
    for i, (v, piece) in enumerate(zip(valuations, pieces)):
        whole = sum((_integrate(v.breakpoints, v.densities, a, b) for a, b in cake_ivs), Fraction(0))
        own = sum(
            (_integrate(v.breakpoints, v.densities, Fraction(a), Fraction(b)) for a, b in piece), Fraction(0)
        )
        checks.append(AgentCheck(i, n * own, whole))
    return VerificationReport("cake_proportional", tuple(checks), tuple(problems))


def verify_mms(values, bundles, variant, per_agent_variants=None) -> VerificationReport:
    """Partition check plus each agent's bundle against its recomputed guarantee."""
    n = len(values)
    m = len(values[0]) if n else 0
    if len(bundles) != n:
        raise InputError(f"{len(bundles)} bundles for {n} agents")
    problems = []
    flat = [o for b in bundles for o in b]
    if sorted(flat) != list(range(m)):
        problems.append("bundles do not partition the objects")
    checks = []
    for i in range(n):
        var = per_agent_variants[i] if per_agent_variants else variant
        own = sum((Fraction(values[i][o]) for o in bundles[i]), Fraction(0))
        checks.append(AgentCheck(i, own, variant_threshold(values[i], n, var)))
    return VerificationReport("mms", tuple(checks), tuple(problems))


def verify_relaxed_efm(graph, matching: Iterable[Pair], alpha=None, c=None) -> VerificationReport:
    """Alpha-fraction and/or c-additive envy-freeness of a matching.

    Every unmatched x may see at most ``alpha * |N(x)|`` (resp. ``c``) of its
    neighbours taken. One check per unmatched x and criterion; the check's
    ``value`` is the slack, so a check passes iff slack >= 0.
    """
    matching = list(matching)
    if alpha is None and c is None:
        raise InputError("give alpha and/or c")
    problems = []
    mx = [x for x, _ in matching]
    my = [y for _, y in matching]
    if len(set(mx)) != len(mx) or len(set(my)) != len(my):
        problems.append("not a matching")
    edges = {(x, y) for x, row in enumerate(graph.adjacency) for y in row}
    if any(tuple(p) not in edges for p in matching):
        problems.append("matching uses a non-edge")
    taken = set(my)
    checks = []
    for x, row in enumerate(graph.adjacency):
        if x in mx:
            continue
        envied = len(set(row) & taken)
        if alpha is not None:
            checks.append(AgentCheck(x, Fraction(alpha) * len(row) - envied, Fraction(0)))
        if c is not None:
            checks.append(AgentCheck(x, Fraction(c) - envied, Fraction(0)))
    return VerificationReport("relaxed_efm", tuple(checks), tuple(problems))


def verify_allocation(kind: str, **kwargs) -> VerificationReport:
    """Dispatch to the verifier for ``kind``.

    ``cake_proportional``: valuations, pieces, cake=None.
    ``mms``: values, bundles, variant, per_agent_variants=None.
    ``relaxed_efm``: graph, matching, alpha=None, c=None.
    """
    table = {
        "cake_proportional": verify_cake_proportional,
        "mms": verify_mms,
        "relaxed_efm": verify_relaxed_efm,
    }
    if kind not in table:
        raise InputError(f"unknown verification kind {kind!r}")
    return table[kind](**kwargs)
