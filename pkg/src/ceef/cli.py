"""Command-line front end: ``ceef generate|catalog|validate|bench|detect|eval``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .catalog import load_or_build_catalog
from .emit import emit_latex, emit_latex_inline, emit_text
from .evaluate import (
    BRUTE_FORCE_BUDGET,
    IFS_METHODS,
    BudgetExceeded,
    bench,
    brute_force_cm,
    eval_formula,
    format_scalar,
    random_hollow,
    read_matrix,
)
from .experiments import DetectionConfig, run_experiment
from .formula import build_formula, emit_json
from .partitions import DEFAULT_MAX_ORDER, InvalidOrderError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
REL_TOL = 1e-8

log = logging.getLogger("ceef")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _order_range(text: str) -> list[int]:
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        if "," in text:
            return _int_list(text)
        return [int(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an order or a range A..B, got {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cache-dir", default=None, help="catalog cache directory (default: $CEEF_CACHE or ~/.cache/ceef)")
    p.add_argument("--no-cache", action="store_true", help="always rebuild the catalog")
    p.add_argument("--max-order", type=int, default=DEFAULT_MAX_ORDER, help="largest order accepted")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker processes for catalog building")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ceef", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="compile the formula for C_m")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--format", choices=["latex", "json", "text"], default="latex")
    g.add_argument("--inline", action="store_true", help="latex: one display equation instead of one term per line")
    g.add_argument("--out", default=None, help="write to FILE instead of stdout")
    _common(g)

    c = sub.add_parser("catalog", help="list isomorphism classes with (k, t, d, h, a)")
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--format", choices=["text", "json"], default="text")
    _common(c)

    v = sub.add_parser("validate", help="check formulas against brute force")
    v.add_argument("--m", type=_order_range, required=True, help="order, list a,b,c or range A..B")
    v.add_argument("--n", type=int, default=None, help="matrix size (default m+2)")
    v.add_argument("--trials", type=int, default=10)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--budget", type=float, default=BRUTE_FORCE_BUDGET, help="brute-force operation budget")
    _common(v)

    b = sub.add_parser("bench", help="time formula evaluation against n")
    b.add_argument("--m", type=int, required=True)
    b.add_argument("--sizes", type=_int_list, default=[50, 100, 200])
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--ifs-method", choices=IFS_METHODS, default="direct",
                   help="direct: accumulate every product; contract: pairwise einsum contraction")
    _common(b)

    d = sub.add_parser("detect", help="low-rank detection study (sum of errors per order)")
    d.add_argument("--n", type=int, default=300)
    d.add_argument("--lambda1", type=float, default=1.5)
    d.add_argument("--lambda2", type=float, default=1.0)
    d.add_argument("--orders", type=_int_list, default=[3, 4, 5, 6, 7])
    d.add_argument("--reps", type=int, default=100)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--json", action="store_true", help="print the JSON report")
    _common(d)

    e = sub.add_parser("eval", help="evaluate C_m on a matrix file")
    e.add_argument("--m", type=int, required=True)
    e.add_argument("--matrix", required=True, help="text file: 'n [integer]' then n rows")
    e.add_argument("--brute", action="store_true", help="also run the brute-force oracle")
    e.add_argument("--ifs-method", choices=IFS_METHODS, default="direct")
    _common(e)
    return parser


def _formula(args, m):
    return build_formula(
        m,
        cache_dir=args.cache_dir,
        max_order=args.max_order,
        use_cache=not args.no_cache,
        threads=args.threads,
    )


def cmd_generate(args) -> int:
    f = _formula(args, args.m)
    if args.format == "json":
        out = emit_json(f, indent=2) + "\n"
    elif args.format == "text":
        out = emit_text(f)
    else:
        out = emit_latex_inline(f) + "\n" if args.inline else emit_latex(f)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return EXIT_OK


def cmd_catalog(args) -> int:
    cat = load_or_build_catalog(
        args.m, cache_dir=args.cache_dir, max_order=args.max_order,
        threads=args.threads, use_cache=not args.no_cache,
    )
    if args.format == "json":
        print(json.dumps(cat.to_json(), indent=2))
        return EXIT_OK
    print(f"# m={cat.m} classes={len(cat)}")
    print(f"{'k':>3} {'t':>4} {'d':>8} {'h':>6} {'a':>9}  graph")
    for c in cat:
        print(f"{c.k:>3} {c.t:>4} {c.d:>8} {c.h:>6} {c.a:>+9}  {c.representative.to_string()}")
    return EXIT_OK


def _complete(n: int) -> np.ndarray:
    return np.ones((n, n), dtype=np.int64) - np.eye(n, dtype=np.int64)


def cmd_validate(args) -> int:
    failed = False
    for m in args.m:
        if m < 3 or m > args.max_order:
            print(f"m={m}: outside the supported range 3..{args.max_order}", file=sys.stderr)
            return EXIT_USAGE
    for m in args.m:
        n = args.n if args.n is not None else m + 2
        cost = float(n) ** m
        if cost > args.budget:
            print(
                f"warning: m={m} skipped: brute force at n={n} costs {cost:.3g} > budget {args.budget:.3g}",
                file=sys.stderr,
            )
            continue
        f = _formula(args, m)
        rng = np.random.default_rng([args.seed, m])
        worst = 0.0
        exact_bad = 0
        for _ in range(args.trials):
            A = random_hollow(n, rng)
            got = eval_formula(f, A, exact=False)
            ref = brute_force_cm(A, m, budget=args.budget, exact=False)
            worst = max(worst, abs(got - ref) / max(1.0, abs(ref)))
            B = np.triu((rng.random((n, n)) < 0.5).astype(np.int64), 1)
            B = B + B.T
            got_i = eval_formula(f, B, exact=True)
            ref_i = brute_force_cm(B, m, budget=args.budget, exact=True)
            if got_i != ref_i or got_i % (2 * m):
                exact_bad += 1
        kn = eval_formula(f, _complete(n), exact=True)
        kn_ok = kn == math.perm(n, m)
        ok = worst < REL_TOL and exact_bad == 0 and kn_ok
        failed |= not ok
        print(
            f"m={m} n={n} trials={args.trials} max_rel_err={worst:.3e} "
            f"binary_mismatches={exact_bad} complete_graph={'ok' if kn_ok else 'FAIL'} "
            f"{'PASS' if ok else 'FAIL'}"
        )
    return EXIT_FAIL if failed else EXIT_OK


def cmd_bench(args) -> int:
    f = _formula(args, args.m)
    rep = bench(f, args.sizes, seed=args.seed, repeats=args.repeats, ifs_method=args.ifs_method)
    if rep.rows:
        print(rep.to_text())
    else:
        print(f"bench m={args.m}: no sizes given")
    return EXIT_OK


def cmd_detect(args, parser) -> int:
    try:
        cfg = DetectionConfig(
            n=args.n, lambda1=args.lambda1, lambda2=args.lambda2,
            orders=tuple(args.orders), reps=args.reps, seed=args.seed,
        )
    except ValueError as exc:
        parser.error(str(exc))
    formulas = {m: _formula(args, m) for m in cfg.orders}
    res = run_experiment(cfg, formulas=formulas, max_order=args.max_order)
    print(json.dumps(res.to_json(), indent=2) if args.json else res.to_text())
    return EXIT_OK


def cmd_eval(args) -> int:
    mat = read_matrix(args.matrix)
    f = _formula(args, args.m)
    val = eval_formula(f, mat, ifs_method=args.ifs_method)
    print(format_scalar(val, mat.exact))
    if args.brute:
        ref = brute_force_cm(mat, args.m)
        print(format_scalar(ref, mat.exact))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if hasattr(args, "m") and isinstance(args.m, int):
        if args.m < 3 or args.m > args.max_order:
            parser.error(f"--m must be in 3..{args.max_order}, got {args.m}")
    try:
        if args.command == "generate":
            return cmd_generate(args)
        if args.command == "catalog":
            return cmd_catalog(args)
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "bench":
            return cmd_bench(args)
        if args.command == "detect":
            return cmd_detect(args, parser)
        if args.command == "eval":
            return cmd_eval(args)
    except (InvalidOrderError, BudgetExceeded, ValueError, OSError) as exc:
        print(f"ceef: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser.error(f"unknown command {args.command!r}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
