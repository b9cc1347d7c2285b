"""Command-line entry point: ``tuffley <command> --n N``.

Exit codes: 0 success (or expected verdict), 1 verification failure,
2 usage or configuration error, 3 resource cap or time budget hit.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from multiprocessing import get_context
from pathlib import Path
from typing import Callable, Sequence

from . import config, golden
from .config import Budget, BudgetExceeded, CapExceeded
from .edge_product import parse_weights_csv, products_csv
from .forest import InvalidForest, code_from_hex, decode, validate
from .nni import (
    CrossValidationError,
    adjacency_divergence,
    build_nni_graph,
    canonical_cycle_K,
    check_cover_multiplicity,
    cycle_indices,
    find_critical_triplets,
    gallery_connected,
    verify_context,
)
from .poset import Poset, augment, build_tuffley, check_graded, check_thin, export_order_complex, format_facets
from .report import VerificationFailed, obstruction_report
from .shellability import VARIANTS, condition_ii_feasible, rco_search, replay_certificate

EXPECTED = {3: "exists", 4: "exists", 5: "not-exists"}
FORMATS = ("json", "dot", "csv", "facets")

OK, FAIL, USAGE, CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _dump(data: object) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"


def _write(args: argparse.Namespace, name: str, text: str) -> None:
    if args.out is None:
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def _formats(args: argparse.Namespace) -> set[str]:
    chosen = {f.strip() for f in args.formats.split(",") if f.strip()}
    unknown = chosen - set(FORMATS)
    if unknown:
        raise UsageError(f"unknown formats {sorted(unknown)}; choose from {', '.join(FORMATS)}")
    return chosen


def _check_n(args: argparse.Namespace) -> int:
    n = args.n
    if n < 3:
        raise UsageError(f"--n must be at least 3, got {n}")
    if n > args.max_n:
        raise CapExceeded(f"n={n} exceeds max_n={args.max_n}")
    return n


def _budget(args: argparse.Namespace) -> Budget:
    return Budget(args.time_budget)


def cmd_enumerate(args: argparse.Namespace) -> int:
    n = _check_n(args)
    s = build_tuffley(n, cap=args.max_n)
    profile = [s.ranks.count(r) for r in range(max(s.ranks) + 1)]
    print(f"n={n}: {len(s)} elements, coatoms: {len(s.maximal())}")
    print("ranks: " + " ".join(map(str, profile)))
    fmts = _formats(args)
    if "json" in fmts:
        _write(args, f"poset_n{n}.json", s.dumps() + "\n")
    if "dot" in fmts:
        _write(args, f"hasse_n{n}.dot", s.to_dot(f"S_{n}"))
    if "facets" in fmts:
        _write(args, f"order_complex_n{n}.txt", format_facets(export_order_complex(s)))
    return OK


def cmd_nni(args: argparse.Namespace) -> int:
    n = _check_n(args)
    if args.mark_K and n < 5:
        raise UsageError("K requires n ≥ 5")
    p = augment(build_tuffley(n, cap=args.max_n))
    g = build_nni_graph(p)
    connected = gallery_connected(g) is None
    degrees = sorted(g.degrees())
    regular = f", {degrees[0]}-regular" if len(degrees) == 1 else f", degrees {degrees}"
    print(f"{len(g.vertices)} vertices, {g.num_edges} edges, {'connected' if connected else 'disconnected'}{regular}")
    mark = cycle_indices(p, canonical_cycle_K(n)) if args.mark_K else []
    if args.emit_dot:
        dot = g.to_dot(p, mark)
        if args.out is None:
            sys.stdout.write(dot)
        else:
            _write(args, f"nni_n{n}.dot", dot)
    if "json" in _formats(args):
        edges = [
            {"a": p.codes[a], "b": p.codes[b], "split": [list(s) for s in d.split], "common": [p.codes[w] for w in d.common]}
            for (a, b), d in g.edges.items()
        ]
        edges.sort(key=lambda e: (e["a"], e["b"]))
        _write(args, f"nni_n{n}.json", _dump({"n": n, "vertices": sorted(p.codes[v] for v in g.vertices), "edges": edges}))
    return OK if connected else FAIL


# Context verification may fan out over worker processes; the poset and graph
# are handed over through module state inherited by fork.
_SHARED: dict = {}


def _verify_one(index: int) -> dict[str, dict | None]:
    p, g, contexts = _SHARED["p"], _SHARED["g"], _SHARED["contexts"]
    result = verify_context(contexts[index], p, g)
    div = adjacency_divergence(contexts[index], p, g)
    result["adjacency_divergence"] = {"pairs": [[p.codes[a], p.codes[b]] for a, b in div]} if div else None
    return result


def _verify_contexts(p: Poset, g, contexts, workers: int) -> list[dict[str, dict | None]]:
    _SHARED.update(p=p, g=g, contexts=contexts)
    try:
        if workers > 1 and len(contexts) >= 64 and "fork" in _fork_methods():
            with ProcessPoolExecutor(workers, mp_context=get_context("fork")) as pool:
                return list(pool.map(_verify_one, range(len(contexts)), chunksize=16))
        return [_verify_one(i) for i in range(len(contexts))]
    finally:
        _SHARED.clear()


def _fork_methods() -> list[str]:
    import multiprocessing

    return multiprocessing.get_all_start_methods()


def _load_poset(path: str) -> Poset:
    try:
        data = json.loads(Path(path).read_text())
        s = Poset.from_json(data)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot load poset from {path}: {exc}") from None
    return s


def cmd_verify(args: argparse.Namespace) -> int:
    if args.load:
        s = _load_poset(args.load)
        n = s.n
    else:
        n = _check_n(args)
        s = build_tuffley(n, cap=args.max_n)
    p = augment(s)
    budget = _budget(args)
    rows: list[tuple[str, bool, str]] = []

    def run(name: str, check: Callable[[], tuple[bool, str]]) -> None:
        budget.check(f"before check {name}", {"completed": [r[0] for r in rows]})
        try:
            ok, detail = check()
        except (CrossValidationError, KeyError, ValueError) as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        rows.append((name, ok, detail))

    def witness(w: object) -> tuple[bool, str]:
        if w is None:
            return True, ""
        if isinstance(w, tuple) and all(isinstance(x, int) for x in w):
            w = [p.codes[x] for x in w]
        elif isinstance(w, tuple):
            w = [[p.codes[x] for x in chain] for chain in w]
        return False, json.dumps(w, sort_keys=True)

    def golden_check() -> tuple[bool, str]:
        summary = golden.summarize(s)
        gdir = Path(args.golden_dir) if args.golden_dir else None
        if args.bless:
            path = golden.write(summary, gdir)
            return True, f"blessed {path}"
        ref = golden.load(n, gdir)
        if ref is None:
            return True, "no golden record"
        diff = golden.compare(summary, ref)
        return (not diff), ("" if not diff else "differs in " + ", ".join(diff))

    run("golden", golden_check)
    run("graded", lambda: witness(check_graded(p)))
    run("thin", lambda: witness(check_thin(p)))
    run("covers_1_or_3", lambda: witness(check_cover_multiplicity(p)))
    graph: list = []

    def graph_equality() -> tuple[bool, str]:
        graph.append(build_nni_graph(p))
        return True, f"{graph[0].num_edges} edges"

    run("nni_graph_equality", graph_equality)
    if graph:
        g = graph[0]
        run("gallery_connected", lambda: witness(gallery_connected(g)))
        degrees = g.degrees()
        if n >= 4:
            run("regularity", lambda: (degrees == {2 * (n - 3)}, f"degrees {sorted(degrees)}"))
        contexts: list = []

        def triplets() -> tuple[bool, str]:
            contexts.extend(find_critical_triplets(p) if n >= 5 else [])
            return True, f"{len(contexts)} critical triplets"

        run("critical_triplets", triplets)
        results = _verify_contexts(p, g, contexts, args.workers) if contexts else []
        names = ["triplet", "tf_lemma", "no_nontrivial_f_cycles", "fpath_exclusivity", "adjacency_divergence"]
        for name in names:
            bad = [(contexts[i], r[name]) for i, r in enumerate(results) if r[name] is not None]
            detail = f"{len(results)} contexts"
            if bad:
                ctx, w = bad[0]
                detail = json.dumps({"triple": [p.codes[c] for c in ctx.triple], "witness": w}, sort_keys=True)
            rows.append((name, not bad, detail))

    width = max(len(r[0]) for r in rows)
    for name, ok, detail in rows:
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}".rstrip())
    if "json" in _formats(args):
        _write(args, f"verify_n{n}.json", _dump([{"check": a, "ok": b, "detail": c} for a, b, c in rows]))
    return OK if all(ok for _, ok, _ in rows) else FAIL


def cmd_shellable(args: argparse.Namespace) -> int:
    n = _check_n(args)
    p = augment(build_tuffley(n, cap=args.max_n))
    budget = _budget(args)
    if len(p.coatoms()) > args.dp_cap:
        raise CapExceeded(f"{len(p.coatoms())} coatoms exceeds --dp-cap {args.dp_cap}")
    top_level = condition_ii_feasible(p, args.variant, cap=args.dp_cap, budget=budget)
    cert = top_level if not top_level.exists else rco_search(p, variant=args.variant, budget=budget)
    print(f"n={n} variant={args.variant}: {cert.verdict}")
    status = OK
    if cert.exists:
        problem = replay_certificate(cert, p)
        print(f"replay: {problem or 'ok'}")
        if problem:
            status = FAIL
    else:
        sizes = sorted({len(s) for s in cert.maximal_reachable})
        print(f"reason: {cert.reason}; {len(cert.maximal_reachable)} maximal reachable subsets, sizes {sizes}")
    text = json.dumps(cert.to_json(p), sort_keys=True, separators=(",", ":")) + "\n"
    if "json" in _formats(args):
        _write(args, f"certificate_n{n}_{args.variant}.json", text)
    expected = EXPECTED.get(n)
    if expected is not None and cert.verdict != expected:
        print(f"expected {expected}")
        status = FAIL
    return status


def cmd_report(args: argparse.Namespace) -> int:
    n = _check_n(args)
    try:
        report, p = obstruction_report(n, augment(build_tuffley(n, cap=args.max_n)), args.variant, _budget(args))
    except VerificationFailed as exc:
        print(f"FAILED: {exc}")
        if exc.witness is not None and not hasattr(exc.witness, "to_json"):
            print(json.dumps(exc.witness, sort_keys=True, default=str))
        return FAIL
    print("\n".join(report.lines(p)))
    if "json" in _formats(args):
        _write(args, f"report_n{n}_{args.variant}.json", _dump(report.to_json(p)))
    return OK


def cmd_edge_product(args: argparse.Namespace) -> int:
    n = _check_n(args)
    code = args.tree if args.tree.startswith("(") else code_from_hex(args.tree)
    try:
        tree = decode(code, n)
    except (ValueError, IndexError) as exc:
        raise UsageError(f"cannot decode tree {args.tree!r}: {exc}") from None
    problem = validate(tree)
    if problem is not None or len(tree.blocks) != 1:
        raise UsageError(f"--tree is not a single valid X-tree: {problem or 'several blocks'}")
    try:
        text = Path(args.weights).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read weights: {exc}") from None
    samples = parse_weights_csv(tree, text)
    out = products_csv(samples, n)
    if args.out is None:
        sys.stdout.write(out)
    else:
        _write(args, f"edge_product_n{n}.csv", out)
    return OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=3)
    common.add_argument("--out", help="directory for output files")
    common.add_argument("--formats", default="json", help=f"comma-separated subset of {', '.join(FORMATS)}")
    common.add_argument("--variant", choices=VARIANTS, default="nonstrict")
    common.add_argument("--max-n", type=int, default=None, help="upper bound on n (env TUFFLEY_MAX_N)")
    common.add_argument("--dp-cap", type=int, default=config.DEFAULT_DP_COATOM_CAP)
    common.add_argument("--time-budget", type=float, default=None, help="seconds")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1)

    parser = argparse.ArgumentParser(prog="tuffley", description="Tuffley poset, NNI space and coatom orderings")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("enumerate", parents=[common], help="build S([n]) and print the rank profile").set_defaults(
        func=cmd_enumerate
    )
    nni = sub.add_parser("nni", parents=[common], help="statistics of G_NNI(n)")
    nni.add_argument("--emit-dot", action="store_true")
    nni.add_argument("--mark-K", action="store_true", help="bold the canonical nontrivial cycle")
    nni.set_defaults(func=cmd_nni)
    verify = sub.add_parser("verify", parents=[common], help="run the property battery")
    verify.add_argument("--load", help="verify a poset JSON export instead of building one")
    verify.add_argument("--bless", action="store_true", help="rewrite the golden summary")
    verify.add_argument("--golden-dir", help="directory holding golden summaries")
    verify.set_defaults(func=cmd_verify)
    sub.add_parser("shellable", parents=[common], help="decide existence of a recursive coatom ordering").set_defaults(
        func=cmd_shellable
    )
    sub.add_parser("report", parents=[common], help="step-by-step obstruction report").set_defaults(func=cmd_report)
    ep = sub.add_parser("edge-product", parents=[common], help="edge weights to pairwise path products")
    ep.add_argument("--tree", required=True, help="canonical code (text or hex)")
    ep.add_argument("--weights", required=True, help="CSV with one column per edge, named by split")
    ep.set_defaults(func=cmd_edge_product)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.max_n is None:
        try:
            args.max_n = config.max_n()
        except ValueError:
            print("error: TUFFLEY_MAX_N must be an integer", file=sys.stderr)
            return USAGE
    if args.max_n < 3 or args.dp_cap < 1 or args.workers < 1 or (args.time_budget is not None and args.time_budget <= 0):
        print("error: caps must be positive (max-n at least 3)", file=sys.stderr)
        return USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except (InvalidForest, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except BudgetExceeded as exc:
        print(f"time budget exceeded: {exc}; partial state {json.dumps(exc.partial, sort_keys=True)}", file=sys.stderr)
        return CAP
    except CapExceeded as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return CAP


if __name__ == "__main__":
    sys.exit(main())
