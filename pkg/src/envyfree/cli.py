"""``envyfree`` command-line driver.

Instances are JSON documents read from a file argument or stdin; results go
to stdout as canonical JSON (sorted keys, exact rationals as ``"p/q"``
strings) so repeated runs are byte-identical. Diagnostics go to stderr.

Exit status: 0 success, 1 bad input, 2 internal invariant violation
(including a failed ``--verify``).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
from fractions import Fraction
from importlib import metadata

from . import oracle
from .cake import (
    Piece,
    PiecewiseConstantValuation,
    cake_instance_from_json,
    cake_instance_to_json,
    lone_divider,
    symmetric_divide,
)
from .efm import decompose, has_nonempty_efm, max_cardinality_efm, max_r_star_efm, max_weight_efm, min_weight_efm
from .errors import InputError, InvariantError
from .graph import BipartiteGraph, Matching, WeightedBipartiteGraph, graph_from_json, graph_to_json
from .mms import MmsInstance, Variant, allocate, mms_instance_from_json, mms_instance_to_json
from .rationals import format_rational


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ": "))


def _read_json(path: str | None):
    if path in (None, "-"):
        text = sys.stdin.read()
        name = "<stdin>"
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}") from exc
        name = path
    try:
        return json.loads(text), text
    except json.JSONDecodeError as exc:
        raise InputError(f"{name}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _note(msg: str) -> None:
    print(f"envyfree: {msg}", file=sys.stderr)


def _matching_json(m: Matching) -> list[list[int]]:
    return m.to_list()


def _plain_graph(g) -> BipartiteGraph:
    return g.graph if isinstance(g, WeightedBipartiteGraph) else g


def _weighted(g) -> WeightedBipartiteGraph:
    if not isinstance(g, WeightedBipartiteGraph):
        raise InputError("this command needs a weighted graph ('weights' field)")
    return g


def _within_vertex_bound(graph: BipartiteGraph) -> bool:
    ok = graph.x_count + graph.y_count <= oracle.max_vertices()
    if not ok:
        _note(
            f"oracle skipped: {graph.x_count + graph.y_count} vertices exceed bound "
            f"{oracle.max_vertices()}; only envy-freeness was checked"
        )
    return ok


def _fail(problems: list[str]) -> None:
    if problems:
        raise InvariantError("verification failed: " + "; ".join(problems))


# --- efm ----------------------------------------------------------------------------


def _verify_efm(graph: BipartiteGraph, m: Matching, *, maximum: bool = True) -> list[str]:
    problems = []
    if not oracle.envy_free_by_definition(graph, m.pairs):
        problems.append("matching is not envy-free")
    if maximum and _within_vertex_bound(graph):
        best = max(len(e) for e in oracle.enumerate_efms(graph))
        if best != len(m):
            problems.append(f"size {len(m)} but the largest envy-free matching has {best}")
    return problems


def cmd_efm(args) -> dict:
    data, _ = _read_json(args.instance)
    g = graph_from_json(data)
    graph = _plain_graph(g)
    action = args.action

    if action == "decompose":
        dec = decompose(graph)
        sub = dec.sub_matching()
        out = {
            "x_s": sorted(dec.x_s),
            "x_l": sorted(dec.x_l),
            "y_s": sorted(dec.y_s),
            "y_l": sorted(dec.y_l),
            "layers": [sorted(layer) for layer in dec.layers],
            "matching": _matching_json(sub),
        }
        if args.verify:
            problems = []
            if any(y in dec.y_l for x in dec.x_s for y in graph.adjacency[x]):
                problems.append("edge between x_s and y_l")
            if sub.x_matched != dec.x_l:
                problems.append("sub-matching does not saturate x_l")
            problems += _verify_efm(graph, sub, maximum=False)
            if _within_vertex_bound(graph):
                for e in oracle.enumerate_efms(graph):
                    if any(x not in dec.x_l or y not in dec.y_l for x, y in e):
                        problems.append(f"envy-free matching {sorted(e)} leaves the good region")
                        break
            _fail(problems)
        return out

    if action == "max":
        m = max_cardinality_efm(graph)
        if args.verify:
            _fail(_verify_efm(graph, m))
        return {"matching": _matching_json(m), "size": len(m)}

    if action in ("min-weight", "max-weight"):
        wg = _weighted(g)
        m = (min_weight_efm if action == "min-weight" else max_weight_efm)(wg)
        weight = wg.weight_of(m)
        if args.verify:
            problems = _verify_efm(graph, m)
            if not problems and graph.x_count + graph.y_count <= oracle.max_vertices():
                efms = oracle.enumerate_efms(graph)
                lo, hi = oracle.brute_extreme_weight(wg.weights, efms)
                want = lo if action == "min-weight" else hi
                if weight != want:
                    problems.append(f"weight {weight} but the optimum is {want}")
            _fail(problems)
        return {"matching": _matching_json(m), "size": len(m), "weight": format_rational(weight)}

    if action == "star":
        stars = max_r_star_efm(graph, args.r)
        if args.verify:
            problems = []
            taken = stars.leaves
            centres = stars.centres
            for c, leaves in stars.stars:
                if any(not graph.has_edge(c, y) for y in leaves):
                    problems.append(f"star at x={c} uses a non-edge")
            for x in range(graph.x_count):
                if x not in centres and any(y in taken for y in graph.adjacency[x]):
                    problems.append(f"x={x} envies a star leaf")
            if _within_vertex_bound(graph):
                best = oracle.brute_max_r_star(graph, args.r)
                if best != len(stars):
                    problems.append(f"{len(stars)} stars but the maximum is {best}")
            _fail(problems)
        return {
            "r": args.r,
            "size": len(stars),
            "stars": [{"centre": c, "leaves": sorted(ls)} for c, ls in stars.stars],
        }

    if action == "exists":
        res = has_nonempty_efm(graph)
        if args.verify:
            problems = []
            if res.nonempty != bool(max_cardinality_efm(graph)):
                problems.append("answer disagrees with the solver")
            if _within_vertex_bound(graph):
                brute = any(oracle.enumerate_efms(graph))
                if brute != res.nonempty:
                    problems.append("answer disagrees with exhaustive enumeration")
            _fail(problems)
        return {"nonempty": res.nonempty, "reason": res.reason}

    raise InputError(f"unknown efm action {action!r}")


# --- cake ---------------------------------------------------------------------------


def cmd_cake(args) -> dict:
    data, _ = _read_json(args.instance)
    vals = cake_instance_from_json(data)
    alloc = lone_divider(vals) if args.action == "lone-divider" else symmetric_divide(vals)
    values = alloc.values(vals)
    totals = [v.value(Piece.whole()) for v in vals]
    n = len(vals)
    out = {
        "pieces": [p.to_json() for p in alloc.pieces],
        "values": [format_rational(x) for x in values],
        "guarantees": [format_rational(t / n) for t in totals],
    }
    if args.verify:
        report = oracle.verify_allocation(
            "cake_proportional",
            valuations=vals,
            pieces=[[(a, b) for a, b in p.intervals] for p in alloc.pieces],
        )
        _report_failures(report)
    return out


# --- mms ----------------------------------------------------------------------------


def _report_failures(report: oracle.VerificationReport) -> None:
    if report.ok:
        return
    problems = list(report.problems)
    problems += [
        f"agent {c.agent}: value {c.value} below threshold {c.threshold}" for c in report.checks if not c.ok
    ]
    _fail(problems)


def _parse_witnesses(path: str, n: int):
    data, _ = _read_json(path)
    if isinstance(data, dict):
        data = data.get("witnesses")
    if not isinstance(data, list) or len(data) != n:
        raise InputError(f"witness file must list one pile partition per agent ({n})")
    out = []
    for w in data:
        if w is None:
            out.append(None)
            continue
        if not isinstance(w, list) or not all(isinstance(p, list) for p in w):
            raise InputError("a witness is a list of piles, each a list of object indices")
        out.append([frozenset(p) for p in w])
    return out


def cmd_mms(args) -> dict:
    data, _ = _read_json(args.instance)
    instance, variant, per_agent = mms_instance_from_json(data)
    if args.variant is not None:
        variant = Variant.parse(_variant_arg(args.variant))
        per_agent = None
    witnesses = _parse_witnesses(args.witness, instance.n) if args.witness else None
    alloc = allocate(instance, variant, per_agent_variants=per_agent, witnesses=witnesses)
    values = alloc.values(instance)
    out = {
        "variant": variant.to_json() if per_agent is None else [v.to_json() for v in per_agent],
        "bundles": [sorted(b) for b in alloc.bundles],
        "values": [format_rational(x) for x in values],
        "guarantees": [format_rational(t) for t in alloc.thresholds],
    }
    if args.verify:
        if instance.m > oracle.max_objects():
            _note(
                f"oracle skipped: {instance.m} objects exceed bound {oracle.max_objects()}; "
                "checked bundles against the solver's own thresholds only"
            )
            problems = []
            if sorted(o for b in alloc.bundles for o in b) != list(range(instance.m)):
                problems.append("bundles do not partition the objects")
            problems += [
                f"agent {i}: value {v} below threshold {t}"
                for i, (v, t) in enumerate(zip(values, alloc.thresholds))
                if v < t
            ]
            _fail(problems)
        else:
            report = oracle.verify_allocation(
                "mms",
                values=[list(r) for r in instance.values],
                bundles=[sorted(b) for b in alloc.bundles],
                variant=variant,
                per_agent_variants=per_agent,
            )
            _report_failures(report)
    return out


def _variant_arg(text: str):
    # "l-out:3" and the JSON form {"l-out": 3} are both accepted on the command line
    text = text.strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed --variant JSON at column {exc.colno}: {exc.msg}") from exc
    return text


# --- oracle -------------------------------------------------------------------------


def cmd_oracle(args) -> dict:
    data, _ = _read_json(args.instance)
    if args.action == "enumerate":
        graph = _plain_graph(graph_from_json(data))
        efms = sorted(sorted(e) for e in oracle.enumerate_efms(graph))
        efms.sort(key=lambda e: (len(e), e))
        return {
            "count": len(efms),
            "efms": [[list(p) for p in e] for e in efms],
            "max_size": max(len(e) for e in efms),
        }
    if args.action == "mms":
        instance, _, _ = mms_instance_from_json(data)
        return {
            "l": args.l,
            "d": args.d,
            "mms": [format_rational(oracle.brute_mms(row, args.l, args.d)) for row in instance.values],
        }
    if args.action == "verify":
        result, _ = _read_json(args.result)
        report = _verify_result(args.kind, data, result, args)
        return report.to_json()
    raise InputError(f"unknown oracle action {args.action!r}")


def _verify_result(kind: str, data, result, args) -> oracle.VerificationReport:
    if not isinstance(result, dict):
        raise InputError("result must be a JSON object as printed by a solver command")
    try:
        if kind == "cake_proportional":
            vals = cake_instance_from_json(data)
            pieces = [[(Fraction(a), Fraction(b)) for a, b in p] for p in result["pieces"]]
            return oracle.verify_allocation("cake_proportional", valuations=vals, pieces=pieces)
        if kind == "mms":
            instance, variant, per_agent = mms_instance_from_json(data)
            v = result.get("variant", variant.to_json())
            if isinstance(v, list):
                per_agent = [Variant.parse(x) for x in v]
            else:
                variant = Variant.parse(v)
                per_agent = None
            return oracle.verify_allocation(
                "mms",
                values=[list(r) for r in instance.values],
                bundles=result["bundles"],
                variant=variant,
                per_agent_variants=per_agent,
            )
        if kind == "relaxed_efm":
            graph = _plain_graph(graph_from_json(data))
            alpha = Fraction(args.alpha) if args.alpha is not None else None
            c = Fraction(args.c) if args.c is not None else None
            pairs = [tuple(p) for p in result["matching"]]
            return oracle.verify_allocation("relaxed_efm", graph=graph, matching=pairs, alpha=alpha, c=c)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed result for {kind}: {exc!r}") from exc
    raise InputError(f"unknown verification kind {kind!r}")


# --- instance generation ------------------------------------------------------------


def cmd_gen(args) -> dict:
    rng = random.Random(args.seed)
    if args.what == "graph":
        edges = [
            (x, y) for x in range(args.x) for y in range(args.y) if rng.random() < args.density
        ]
        graph = BipartiteGraph.from_edges(args.x, args.y, edges)
        if args.weights:
            weights = {e: Fraction(rng.randint(0, args.max_weight)) for e in edges}
            return graph_to_json(WeightedBipartiteGraph(graph, weights))
        return graph_to_json(graph)
    if args.what == "cake":
        vals = []
        for _ in range(args.n):
            cuts = sorted({Fraction(rng.randint(1, args.grid - 1), args.grid) for _ in range(args.segments - 1)})
            bps = (Fraction(0), *cuts, Fraction(1))
            dens = [Fraction(rng.randint(0, 9)) for _ in range(len(bps) - 1)]
            if not any(dens):
                dens[rng.randrange(len(dens))] = Fraction(1)
            vals.append(PiecewiseConstantValuation(bps, tuple(dens)))
        return cake_instance_to_json(vals)
    if args.what == "mms":
        rows = tuple(
            tuple(Fraction(rng.randint(0, args.max_value), rng.randint(1, args.max_den)) for _ in range(args.m))
            for _ in range(args.n)
        )
        return mms_instance_to_json(MmsInstance(rows))
    raise InputError(f"unknown generator {args.what!r}")


# --- argument parsing ---------------------------------------------------------------


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _nonneg_rational(text: str) -> str:
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational like '1/2', got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return text


class _Parser(argparse.ArgumentParser):
    # usage mistakes are input errors; status 2 is reserved for invariant failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="envyfree", description="Envy-free matching and fair division solvers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    def solver(p):
        p.add_argument("instance", nargs="?", help="JSON instance file (default: stdin)")
        p.add_argument("--verify", action="store_true", help="check the result with the brute-force oracle")
        p.add_argument("--report", action="store_true", help="wrap the result in a run report")
        p.add_argument("--timing", action="store_true", help="include wall time in the run report")

    efm = sub.add_parser("efm", help="envy-free matchings in bipartite graphs")
    efm_sub = efm.add_subparsers(dest="action", required=True)
    for name in ("decompose", "max", "min-weight", "max-weight", "exists"):
        solver(efm_sub.add_parser(name))
    star = efm_sub.add_parser("star")
    solver(star)
    star.add_argument("--r", type=_positive, required=True, help="leaves per star")
    efm.set_defaults(func=cmd_efm)

    cake = sub.add_parser("cake", help="proportional cake cutting")
    cake_sub = cake.add_subparsers(dest="action", required=True)
    for name in ("lone-divider", "symmetric"):
        solver(cake_sub.add_parser(name))
    cake.set_defaults(func=cmd_cake)

    mms = sub.add_parser("mms", help="maximin-share allocation of objects")
    mms_sub = mms.add_subparsers(dest="action", required=True)
    alloc = mms_sub.add_parser("allocate")
    solver(alloc)
    alloc.add_argument("--variant", help="'2n-2', 'two-thirds', 'l-out:L' or '{\"l-out\": L}'")
    alloc.add_argument("--witness", help="JSON file with one reference pile partition per agent")
    mms.set_defaults(func=cmd_mms)

    orc = sub.add_parser("oracle", help="brute-force ground truth and verifiers")
    orc_sub = orc.add_subparsers(dest="action", required=True)
    en = orc_sub.add_parser("enumerate", help="all envy-free matchings of a small graph")
    en.add_argument("instance", nargs="?")
    om = orc_sub.add_parser("mms", help="maximin share of every agent by exhaustion")
    om.add_argument("instance", nargs="?")
    om.add_argument("--l", type=_positive, default=1)
    om.add_argument("--d", type=_positive, required=True)
    ov = orc_sub.add_parser("verify", help="check a solver result against its instance")
    ov.add_argument("kind", choices=["cake_proportional", "mms", "relaxed_efm"])
    ov.add_argument("instance")
    ov.add_argument("result")
    ov.add_argument("--alpha", type=_nonneg_rational)
    ov.add_argument("--c", type=_nonneg_rational)
    for p in (en, om, ov):
        p.add_argument("--report", action="store_true")
        p.add_argument("--timing", action="store_true")
    orc.set_defaults(func=cmd_oracle)

    gen = sub.add_parser("gen", help="random instances for test corpora")
    gen_sub = gen.add_subparsers(dest="what", required=True)
    gg = gen_sub.add_parser("graph")
    gg.add_argument("--x", type=_positive, default=6)
    gg.add_argument("--y", type=_positive, default=6)
    gg.add_argument("--density", type=float, default=0.4)
    gg.add_argument("--weights", action="store_true")
    gg.add_argument("--max-weight", type=int, default=9)
    gc = gen_sub.add_parser("cake")
    gc.add_argument("--n", type=_positive, default=3)
    gc.add_argument("--segments", type=_positive, default=4)
    gc.add_argument("--grid", type=_positive, default=20)
    gm = gen_sub.add_parser("mms")
    gm.add_argument("--n", type=_positive, default=3)
    gm.add_argument("--m", type=int, default=8)
    gm.add_argument("--max-value", type=int, default=10)
    gm.add_argument("--max-den", type=_positive, default=1)
    for p in (gg, gc, gm):
        p.add_argument("--seed", type=int, default=0)
    gen.set_defaults(func=cmd_gen)
    return parser


def _digest(path: str | None) -> str | None:
    if path in (None, "-"):
        return None
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    stdin_text = None
    if getattr(args, "instance", "") in (None, "-") and getattr(args, "report", False):
        # keep stdin around so the report can digest it
        stdin_text = sys.stdin.read()
        sys.stdin = _Replay(stdin_text)
    start = time.perf_counter()
    try:
        result = args.func(args)
    except InputError as exc:
        _note(f"input error: {exc}")
        return 1
    except InvariantError as exc:
        _note(f"invariant violated: {exc}")
        return 2
    elapsed = time.perf_counter() - start
    failed = isinstance(result, dict) and result.get("ok") is False
    if getattr(args, "report", False):
        digest = (
            hashlib.sha256(stdin_text.encode()).hexdigest() if stdin_text is not None else _digest(args.instance)
        )
        result = {
            "command": sys.argv[1:] if argv is None else list(argv),
            "instance_sha256": digest,
            "result": result,
            "version": _version(),
            "wall_time": f"{elapsed:.6f}" if args.timing else None,
        }
    print(_dump(result))
    return 2 if failed else 0


class _Replay:
    def __init__(self, text: str):
        self._text = text

    def read(self) -> str:
        return self._text


if __name__ == "__main__":
    sys.exit(main())
