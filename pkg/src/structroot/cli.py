"""Command-line interface: ``structroot roots ...`` and ``structroot bench ...``."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import bench
from . import matrix_sign as ms
from .pipelines import complex_roots_pipeline, real_roots_pipeline, squaring_pipeline
from .poly_core import random_polynomial, read_polynomial
from .spectral_maps import MapConfig


def _sizes(text: str) -> list:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="structroot", description="Polynomial roots through companion-matrix eigenspaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    roots = sub.add_parser("roots", help="find the roots of one polynomial")
    roots.add_argument("kind", choices=("real", "complex", "squaring"))
    roots.add_argument("polyfile", nargs="?", help="polynomial file ('degree n' then one coefficient per line, constant first)")
    roots.add_argument("--random", type=int, metavar="N", help="use a random polynomial of degree N instead of a file")
    roots.add_argument("--seed", type=int, default=0)
    roots.add_argument("--newton-steps", type=int, default=5)
    roots.add_argument("--tol", type=float, default=1e-10, help="step tolerance of the sign iteration")
    roots.add_argument("--refine", action=argparse.BooleanOptionalAction, default=True, help="Rayleigh quotient refinement")
    roots.add_argument("--epsilon-real", type=float, default=1e-6, help="relative imaginary part still counted as real")
    roots.add_argument("--tau", type=float, default=MapConfig.tau)
    roots.add_argument("--h-plus", type=int, default=30, help="maximum number of squarings")
    roots.add_argument("--variant", choices=ms.VARIANTS, default=None, help="sign iteration variant")
    roots.add_argument("--norm-control", action=argparse.BooleanOptionalAction, default=True)
    roots.add_argument("--decimals", type=int, default=3, help="agreement required between Padé steps")
    roots.add_argument("--shift", type=float, default=None, help="shift s for the squaring method")
    roots.add_argument("--records", action="store_true", help="CSV with one record per root instead of text")

    b = sub.add_parser("bench", help="run a benchmark suite over random polynomials")
    b.add_argument("suite", choices=("squaring", "newton", "newton-pade"))
    b.add_argument("--n", type=_sizes, default=[64])
    b.add_argument("--trials", type=int, default=100)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--norm-control", action=argparse.BooleanOptionalAction, default=True, help="newton-pade only")
    b.add_argument("--out", type=Path, default=None, help="CSV destination (stdout when omitted)")
    return parser


def _polynomial(args):
    if args.random is not None:
        return random_polynomial(args.random, args.seed), f"random n={args.random} seed={args.seed}"
    if args.polyfile is None:
        raise SystemExit("give a polynomial file or --random N")
    return read_polynomial(args.polyfile), args.polyfile


def run_roots(args, out) -> int:
    p, pid = _polynomial(args)
    if args.kind == "real":
        cfg = ms.SignIterConfig(
            variant=args.variant or "real_newton", tol=args.tol, norm_control=args.norm_control, seed=args.seed
        )
        rep = real_roots_pipeline(
            p, args.newton_steps, cfg, args.refine, args.seed,
            decimals=args.decimals, epsilon_real=args.epsilon_real, poly_id=pid,
        )
    elif args.kind == "complex":
        cfg = ms.SignIterConfig(variant=args.variant or "newton", tol=args.tol, seed=args.seed)
        rep = complex_roots_pipeline(p, None, cfg, args.refine, args.seed, poly_id=pid)
    else:
        cfg = MapConfig(tau=args.tau, h_plus=args.h_plus, real_epsilon=args.epsilon_real)
        rep = squaring_pipeline(p, args.shift, cfg, args.seed, poly_id=pid)
    if args.records:
        w = csv.DictWriter(out, fieldnames=["re", "im", "residual", "method", "iterations"], lineterminator="\n")
        w.writeheader()
        w.writerows(rep.records())
    else:
        out.write(rep.to_text())
    return 0 if not rep.errors else 1


def run_bench(args, out) -> int:
    suite = args.suite.replace("-", "_")
    kwargs = {"norm_control": args.norm_control} if suite == "newton_pade" else {}
    stats = []
    for n in args.n:
        stats += bench.benchmark(suite, n, args.trials, args.seed, args.workers, **kwargs)
    text = bench.stats_csv(stats)
    if args.out is None:
        out.write(text)
    else:
        args.out.write_text(text)
    return 0


def main(argv=None, out=None) -> int:
    args = build_parser().parse_args(argv)
    out = out or sys.stdout
    if args.command == "roots":
        return run_roots(args, out)
    return run_bench(args, out)


if __name__ == "__main__":
    sys.exit(main())
