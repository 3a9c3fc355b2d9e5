"""Command-line front end.

Subcommands: cdf, pdf, table, hgm, mc, verify.  Output is CSV (17
significant digits, header always) or JSON for verification reports.
Exit codes: 0 success, 1 usage error, 2 numeric failure, 3 verification
failure.  A JSON config file may supply defaults; flags override.  The
environment variable WISHART_ROOTS_THREADS caps grid parallelism.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import List, Sequence

from . import distribution, hgm, mc_validator, operators
from .distribution import EvalConfig, WishartParams

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_VERIFY = 3


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _thread_count() -> int:
    raw = os.environ.get("WISHART_ROOTS_THREADS", "")
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    return max(1, cap) if cap else 1


def _parse_lambdas(text: str, m: int) -> List[float]:
    vals = [float(t) for t in text.split(",") if t.strip() != ""]
    if len(vals) != m:
        raise ValueError(f"expected {m} lambda values, got {len(vals)}")
    return vals


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wishart-roots",
        description="Largest-root CDF/PDF of the noncentral complex Wishart "
        "distribution, with cross-checked evaluation routes.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, with_x=True):
        p.add_argument("--config", help="JSON file with default option values")
        p.add_argument("--n", type=int, required=True, help="degrees of freedom")
        p.add_argument("--m", type=int, required=True, help="matrix dimension")
        p.add_argument("--lambda", dest="lambdas", required=True,
                       help="comma-separated noncentrality eigenvalues")
        p.add_argument("--method", default="quadrature",
                       choices=["quadrature", "series", "conjecture", "hgm", "all"])
        p.add_argument("--order", type=int, default=None,
                       help="series truncation order (series method)")
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
        if with_x:
            p.add_argument("--x", type=float, required=True)

    p_cdf = sub.add_parser("cdf", help="CDF value at one abscissa")
    common(p_cdf)
    p_pdf = sub.add_parser("pdf", help="density value at one abscissa")
    common(p_pdf)

    p_tab = sub.add_parser("table", help="CSV table over an x grid")
    common(p_tab, with_x=False)
    p_tab.add_argument("--x-min", type=float, required=True)
    p_tab.add_argument("--x-max", type=float, required=True)
    p_tab.add_argument("--points", type=int, default=100)
    p_tab.add_argument("--what", default="pdf", choices=["pdf", "cdf"])

    p_hgm = sub.add_parser("hgm", help="Pfaffian trajectory dump (CSV)")
    common(p_hgm, with_x=False)
    p_hgm.add_argument("--x-min", type=float, default=0.5)
    p_hgm.add_argument("--x-max", type=float, required=True)
    p_hgm.add_argument("--points", type=int, default=50)

    p_mc = sub.add_parser("mc", help="Monte Carlo comparison against an analytic route")
    common(p_mc, with_x=False)
    p_mc.add_argument("--samples", type=int, default=100_000)
    p_mc.add_argument("--seed", type=int, default=20240801)
    p_mc.add_argument("--histogram", action="store_true",
                      help="emit the histogram/empirical-CDF CSV instead of the report")

    p_ver = sub.add_parser("verify", help="machine verification suites")
    p_ver.add_argument("--config", help="JSON file with default option values")
    p_ver.add_argument("target", choices=["recurrences", "operators", "theorem2",
                                          "printed", "all"])
    p_ver.add_argument("--n", type=int, default=4)
    p_ver.add_argument("--m", type=int, default=2)
    p_ver.add_argument("--order", type=int, default=12)
    p_ver.add_argument("--json", action="store_true", default=True)
    return ap


def _apply_config_defaults(argv: Sequence[str], ap: argparse.ArgumentParser):
    """Pre-parse --config and fold file values in as defaults."""
    if "--config" not in argv:
        return ap.parse_args(argv)
    args = ap.parse_args(argv)
    with open(args.config) as fh:
        defaults = json.load(fh)
    explicit = {a.lstrip("-").split("=")[0].replace("-", "_") for a in argv if a.startswith("--")}
    for key, value in defaults.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and attr not in explicit:
            setattr(args, attr, value)
    return args


def _cfg_from_args(args, method: str) -> EvalConfig:
    cfg = EvalConfig(method=method, rtol=args.tol, hgm_rtol=min(args.tol, 1e-10))
    if args.order is not None:
        cfg.series_order = args.order
    elif args.m >= 3:
        cfg.series_order = 12
    return cfg


def _eval_one(kind: str, params: WishartParams, x: float, args, method: str) -> float:
    cfg = _cfg_from_args(args, method)
    fn = distribution.cdf if kind == "cdf" else distribution.pdf
    return fn(params, x, cfg)


def _err_estimate(kind: str, params: WishartParams, x: float, args, method: str, value: float) -> float:
    """Crude error estimate: distance to an independent route when cheap,
    otherwise the configured tolerance scale."""
    try:
        other = "series" if method != "series" and params.m <= 2 else "quadrature"
        if other == method:
            return abs(value) * args.tol
        ref = _eval_one(kind, params, x, args, other)
        return abs(value - ref)
    except Exception:
        return abs(value) * args.tol


def cmd_point(kind: str, args) -> int:
    params = WishartParams(args.n, args.m, _parse_lambdas(args.lambdas, args.m))
    methods = ["quadrature", "series", "conjecture", "hgm"] if args.method == "all" else [args.method]
    if kind == "cdf" and "conjecture" in methods:
        if args.method == "all":
            methods.remove("conjecture")
        else:
            print("the conjecture route defines the density only", file=sys.stderr)
            return EXIT_USAGE
    rows = []
    for method in methods:
        value = _eval_one(kind, params, args.x, args, method)
        err = _err_estimate(kind, params, args.x, args, method, value)
        rows.append((args.x, value, method, err))
    if args.json:
        print(json.dumps([
            {"x": r[0], "value": r[1], "method": r[2], "err_est": r[3]} for r in rows
        ]))
    else:
        print("x,value,method,err_est")
        for r in rows:
            print(f"{_fmt(r[0])},{_fmt(r[1])},{r[2]},{_fmt(r[3])}")
    return EXIT_OK


def cmd_table(args) -> int:
    params = WishartParams(args.n, args.m, _parse_lambdas(args.lambdas, args.m))
    if args.points < 2 or args.x_max <= args.x_min:
        print("bad grid", file=sys.stderr)
        return EXIT_USAGE
    xs = [args.x_min + i * (args.x_max - args.x_min) / (args.points - 1)
          for i in range(args.points)]
    methods = ["quadrature", "series", "conjecture", "hgm"] if args.method == "all" else [args.method]
    if args.what == "cdf" and "conjecture" in methods:
        methods.remove("conjecture")

    def work(x):
        return [_eval_one(args.what, params, x, args, mth) for mth in methods]

    threads = _thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, xs))
    else:
        results = [work(x) for x in xs]
    print("x," + ",".join(f"{args.what}_{mth}" for mth in methods))
    for x, vals in zip(xs, results):
        print(_fmt(x) + "," + ",".join(_fmt(v) for v in vals))
    return EXIT_OK


def cmd_hgm(args) -> int:
    params = WishartParams(args.n, args.m, _parse_lambdas(args.lambdas, args.m))
    xs = [args.x_min + i * (args.x_max - args.x_min) / (args.points - 1)
          for i in range(args.points)]
    rows = hgm.trajectory(params, xs)
    dim = 3 ** args.m
    print("x," + ",".join(f"b{i}" for i in range(dim)) + ",R,psi")
    for x, values, R, psi in rows:
        print(_fmt(x) + "," + ",".join(_fmt(v) for v in values) + f",{_fmt(R)},{_fmt(psi)}")
    return EXIT_OK


def cmd_mc(args) -> int:
    params = WishartParams(args.n, args.m, _parse_lambdas(args.lambdas, args.m))
    mcc = mc_validator.McConfig(samples=args.samples, seed=args.seed)
    if args.histogram:
        draws = mc_validator.sample_largest_eig(params, mcc)
        print(mc_validator.histogram_csv(draws, mcc.bins))
        return EXIT_OK
    cfg = _cfg_from_args(args, "quadrature")
    report = mc_validator.compare_cdf(
        params, mcc, lambda x: distribution.cdf(params, x, cfg)
    )
    print(json.dumps(report, indent=2))
    return EXIT_OK if report["pass"] else EXIT_VERIFY


def cmd_verify(args) -> int:
    reports: List[dict] = []
    if args.target in ("operators", "all"):
        reports += operators.verify_theorem1(args.n, args.m, args.order)
    if args.target in ("theorem2", "all"):
        reports += operators.verify_theorem2(args.n, args.m, args.order)
    if args.target in ("printed", "all"):
        if args.m in (2, 3):
            reports += operators.verify_printed(args.n, args.m, args.order)
    if args.target in ("recurrences", "all"):
        reports.append(_verify_recurrences())
    ok = all(r["pass"] for r in reports)
    print(json.dumps(reports, indent=2))
    return EXIT_OK if ok else EXIT_VERIFY


def _verify_recurrences() -> dict:
    from .h_integrals import HIndex, h_eval, lemma_lhs_index, rec_lemma1, rec_lemma2, rec_lemma3, rec_lemma45

    grid = [(x, y) for x in (0.5, 1.0, 2.0) for y in (0.5, 2.0)]
    failures = 0
    checks = 0
    for variant, fn, idxs in [
        ("rec3", rec_lemma1, [(k, 0, n) for k in (1, 2) for n in (2, 3)]),
        ("recip", rec_lemma1, [(k, 0, n) for k in (1, 2) for n in (2, 3)]),
        ("rechd", rec_lemma1, [(k, 0, n) for k in (1, 2) for n in (2, 3)]),
        ("shift_n", rec_lemma2, [(k, 0, n) for k in (1, 2) for n in (2, 3)]),
        ("shift_k", rec_lemma2, [(k, 0, n) for k in (1, 2) for n in (2, 3)]),
        ("hklnx", rec_lemma45, [(1, 1, 2), (2, 1, 3)]),
        ("hklnr", rec_lemma45, [(1, 1, 2), (2, 1, 3)]),
        ("hklni", rec_lemma45, [(1, 1, 2), (2, 1, 3)]),
        ("hklrecu", rec_lemma45, [(1, 1, 2), (2, 1, 3)]),
        ("hklrecu2", rec_lemma45, [(1, 1, 2), (2, 2, 3)]),
    ]:
        for (k, ell, n) in idxs:
            idx = HIndex(k, ell, n)
            combo = fn(variant, idx)
            lhs = lemma_lhs_index(variant, idx)
            for (x, y) in grid:
                checks += 1
                lv = h_eval(lhs, x, y)
                rv = combo.eval(x, y)
                if abs(lv - rv) > 1e-10 * max(abs(lv), abs(rv), 1.0):
                    failures += 1
    for variant in ("simrec1", "simrec2", "hrecg"):
        for n in (2, 3, 4):
            combo = rec_lemma3(variant, n)
            lhs = {"simrec1": HIndex(n - 1, 0, n - 1), "simrec2": HIndex(n, 0, n),
                   "hrecg": HIndex(n, 0, n + 1)}[variant]
            for (x, y) in grid:
                checks += 1
                lv = h_eval(lhs, x, y)
                rv = combo.eval(x, y)
                if abs(lv - rv) > 1e-10 * max(abs(lv), abs(rv), 1.0):
                    failures += 1
    return {"check": "recurrences", "params": {"checks": checks},
            "max_residual_terms": failures, "pass": failures == 0}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = _build_parser()
    try:
        args = _apply_config_defaults(argv, ap)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "cdf":
            return cmd_point("cdf", args)
        if args.command == "pdf":
            return cmd_point("pdf", args)
        if args.command == "table":
            return cmd_table(args)
        if args.command == "hgm":
            return cmd_hgm(args)
        if args.command == "mc":
            return cmd_mc(args)
        if args.command == "verify":
            return cmd_verify(args)
        print(f"unknown command {args.command}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
