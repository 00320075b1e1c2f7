"""Command-line interface: analyze, construct, root, bound-sweep, search, verify.

Exit codes: 0 ok, 1 usage/parse error, 2 infinite-resistance input,
3 verification failure.  All randomness funnels through --seed (default 0);
identical invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys


def _apply_thread_cap() -> None:
    """RESNET_THREADS caps BLAS worker threads; must run before numpy loads."""
    cap = os.environ.get("RESNET_THREADS", "").strip()
    if cap and cap != "0":
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, cap)


def _round15(x):
    if isinstance(x, float):
        return float(f"{x:.15g}")
    if isinstance(x, dict):
        return {k: _round15(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round15(v) for v in x]
    return x


def _emit(payload: dict, fmt: str, out) -> None:
    if fmt == "json":
        json.dump(_round15(payload), out, indent=2, sort_keys=True)
        out.write("\n")
    elif fmt == "csv":
        flat = {k: v for k, v in payload.items() if not isinstance(v, (dict, list))}
        out.write(",".join(flat) + "\n")
        out.write(",".join(f"{v:.15g}" if isinstance(v, float) else str(v) for v in flat.values()) + "\n")
    else:
        for k, v in payload.items():
            if isinstance(v, float):
                out.write(f"{k} = {v:.15g}\n")
            elif not isinstance(v, (dict, list)):
                out.write(f"{k} = {v}\n")


def _open_out(path):
    return open(path, "w") if path else sys.stdout


def cmd_analyze(args) -> int:
    from .multigraph import EdgeListParseError, RootedGraph, read_edge_list
    from .resistance import (
        InfiniteResistanceError,
        pair_resistance,
        resistance_summary,
        rooted_summary,
    )

    try:
        with open(args.input) as fh:
            obj = read_edge_list(fh)
    except EdgeListParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return 1
    g = obj.graph if isinstance(obj, RootedGraph) else obj
    out = _open_out(args.output)
    try:
        if args.pair:
            x, y = args.pair
            value = pair_resistance(g, x, y)
            _emit({"x": x, "y": y, "resistance": value}, args.format, out)
            return 0
        payload = resistance_summary(g).to_json_dict()
        if isinstance(obj, RootedGraph):
            payload["rooted"] = rooted_summary(obj).to_json_dict()
        _emit(payload, args.format, out)
        return 0
    except InfiniteResistanceError:
        print("infinite average resistance (graph not connected)", file=sys.stderr)
        return 2
    finally:
        if out is not sys.stdout:
            out.close()


def cmd_construct(args) -> int:
    from .constructions import ConstructionSpec, build_from_spec, certified_rooting
    from .multigraph import RootedGraph, write_edge_list
    from .resistance import resistance_summary, rooted_summary

    try:
        spec = ConstructionSpec.parse(" ".join(args.spec))
        built = build_from_spec(spec, default_seed=args.seed)
    except (ValueError, KeyError) as exc:
        print(f"infeasible or invalid spec: {exc}", file=sys.stderr)
        return 1
    if args.certify:
        params = dict(tok.split("=", 1) for tok in args.certify)
        radius = int(params.get("l", params.get("ℓ", 3)))
        eps = float(params.get("eps", 0.05))
        g = built.graph if isinstance(built, RootedGraph) else built
        res = certified_rooting(g, radius=radius, eps=eps, seed=args.seed)
        built = res.rooted
        print(
            f"certificate: max R/ball ratio {res.max_ratio:.6f} <= 1+eps={1 + eps}; "
            f"B={res.B:.6f} repairs={res.repaired_count} alpha={res.alpha_after:.4f}",
            file=sys.stderr,
        )
    if args.output:
        with open(args.output, "w") as fh:
            write_edge_list(built, fh)
    else:
        write_edge_list(built, sys.stdout)
    if args.analyze:
        out = sys.stdout
        if isinstance(built, RootedGraph):
            _emit(rooted_summary(built).to_json_dict(), args.format, out)
        else:
            _emit(resistance_summary(built).to_json_dict(), args.format, out)
    return 0


def cmd_root(args) -> int:
    from .constructions import certified_rooting, root_via_sinks
    from .multigraph import EdgeListParseError, RootedGraph, read_edge_list, write_edge_list

    try:
        with open(args.input) as fh:
            obj = read_edge_list(fh)
    except EdgeListParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    g = obj.graph if isinstance(obj, RootedGraph) else obj
    if args.method == "sinks":
        res = root_via_sinks(g, s=args.sinks, trials=args.trials, seed=args.seed)
        rooted = res.rooted
        print(
            f"best B={res.best_B:.6f} mean={res.mean_B:.6f} bound={res.bound:.6f} "
            f"(mean within bound: {res.mean_within_bound})",
            file=sys.stderr,
        )
    else:
        res = certified_rooting(g, radius=args.level, eps=args.eps, seed=args.seed)
        rooted = res.rooted
        print(
            f"B={res.B:.6f} max ratio={res.max_ratio:.6f} repairs={res.repaired_count}",
            file=sys.stderr,
        )
    if args.output:
        with open(args.output, "w") as fh:
            write_edge_list(rooted, fh)
    else:
        write_edge_list(rooted, sys.stdout)
    return 0


def cmd_bound_sweep(args) -> int:
    from .bounds import bound_sweep_rows

    if not (2.0 < args.alpha_lo < args.alpha_hi):
        print("need 2 < alpha_lo < alpha_hi", file=sys.stderr)
        return 1
    alphas = []
    a = args.alpha_lo
    while a <= args.alpha_hi + 1e-12:
        alphas.append(round(a, 12))
        a += args.step
    rows = bound_sweep_rows(alphas, k_max=max(16, int(args.alpha_hi) + 2))
    out = _open_out(args.output)
    try:
        cols = ["alpha", "lower_two_step", "qb_lower", "upper_envelope", "conjecture_f", "qb_margin"]
        out.write(",".join(cols) + "\n")
        for row in rows:
            out.write(",".join(f"{row[c]:.15g}" for c in cols) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_search(args) -> int:
    from .search import enumerate_optimal, search_result_json

    progress = None
    if args.progress:
        progress = lambda k: print(f"explored {k} classes", file=sys.stderr)
    try:
        result = enumerate_optimal(
            args.objective, args.n, args.m, mult_cap=args.mult_cap, progress=progress
        )
    except ValueError as exc:
        print(f"search error: {exc}", file=sys.stderr)
        return 1
    text = search_result_json(result)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.progress:
        print(f"explored {result.explored} classes total", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    from .verify import run_checks

    results = run_checks(args.filter)
    if not results:
        print(f"no checks match filter {args.filter!r}", file=sys.stderr)
        return 1
    width = max(len(r.name) for r in results)
    failures = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:<{width}}  [{r.elapsed:7.2f}s]  {r.detail}")
        if not r.passed:
            failures += 1
    if failures:
        print(f"{failures} check(s) failed", file=sys.stderr)
        return 3
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resnet",
        description="Average effective resistance of unit-resistor networks",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="summarise an edge-list file")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.add_argument("--pair", nargs=2, type=int, metavar=("X", "Y"))
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("construct", help="build a graph family")
    p.add_argument("spec", nargs="+", help="family=... key=value ...")
    p.add_argument("--output")
    p.add_argument("--analyze", action="store_true")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.add_argument(
        "--certify",
        nargs="+",
        metavar="KEY=VAL",
        help="apply the certified rooting (keys: l, eps)",
    )
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("root", help="root a graph from a file")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--method", choices=("sinks", "certified"), default="sinks")
    p.add_argument("-s", "--sinks", type=int, default=2)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--level", type=int, default=3, help="ball radius for certified rooting")
    p.add_argument("--eps", type=float, default=0.05)
    p.set_defaults(func=cmd_root)

    p = sub.add_parser("bound-sweep", help="emit all bound curves as CSV")
    p.add_argument("--alpha-lo", type=float, default=2.01)
    p.add_argument("--alpha-hi", type=float, default=6.0)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--output")
    p.set_defaults(func=cmd_bound_sweep)

    p = sub.add_parser("search", help="exhaustive small-case optimum")
    p.add_argument("--objective", choices=("A", "B", "B_queen_bee"), default="A")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-m", type=int, required=True)
    p.add_argument("--mult-cap", type=int, default=None)
    p.add_argument("--output")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify", help="run the verification battery")
    p.add_argument("--filter", help="substring selecting checks")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    _apply_thread_cap()
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
