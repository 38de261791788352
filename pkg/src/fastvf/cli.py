"""Command line interface: ``fastvf <command> ...``.

Exit codes: 0 success, 1 usage or validation error, 2 certification failure.
"""

from __future__ import annotations

import argparse
import math
import statistics
import sys
from dataclasses import dataclass

import numpy as np

from .fastmath import DEFAULT_TABLE, EXP_VARIANTS, SQRT_HALF, KernelTable, arcsin2, certify_table
from .filters import FAMILIES, MODES, FilterSpec, run_filter
from .imagecore import PpmError, load_ppm, save_ppm
from .metrics import DimensionMismatchError, evaluate
from .minimax import ConvergenceError, NumericalError, remez_fit, write_table
from .noise import IMPULSE_LAWS, NoiseSpec, corrupt_with_mask

EXIT_USAGE = 1
EXIT_CERT = 2

FIT_FUNCTIONS = {
    "arccos": (np.arccos, (0.0, 0.5)),
    "arcsin2": (arcsin2, (0.0, SQRT_HALF)),
    "expneg": (lambda z: np.exp(-z), (0.0, 10.0)),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class BenchResult:
    filter: str
    runs: int
    exact_time: float
    approx_time: float
    exact_stdev: float
    approx_stdev: float
    speedup_percent: float
    speedup_stdev: float
    quality_delta_percent: dict

    def lines(self) -> list[str]:
        d = self.quality_delta_percent
        return [
            f"filter={self.filter} runs={self.runs}",
            f"exact_time={self.exact_time:.6f} (stdev {self.exact_stdev:.6f}) "
            f"approx_time={self.approx_time:.6f} (stdev {self.approx_stdev:.6f})",
            f"speedup_percent={self.speedup_percent:.3f} (stdev {self.speedup_stdev:.3f})",
            "quality_delta_percent "
            + " ".join(f"{k}={v:.3f}" for k, v in d.items()),
        ]


def _delta_percent(exact: float, approx: float) -> float:
    if exact == 0.0:
        return 0.0 if approx == 0.0 else -math.inf
    return 100.0 * (exact - approx) / exact


def _floats(text: str, count: int, what: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{what}: expected {count} comma-separated numbers") from None
    if len(vals) != count:
        raise UsageError(f"{what}: expected {count} comma-separated numbers")
    return vals


def _noise_spec(args) -> NoiseSpec:
    phi_k = _floats(args.phi_k, 3, "--phi-k") if args.phi_k else None
    return NoiseSpec(
        model=args.model,
        phi=args.phi,
        phi_k=phi_k,
        gaussian_sigma=args.sigma,
        seed=args.seed,
        impulse=args.impulse,
    )


def _filter_spec(args, mode: str) -> FilterSpec:
    return FilterSpec(
        family=args.family,
        mode=mode,
        window_side=args.window,
        kappa=args.kappa,
        exp_variant=args.exp_variant,
    )


def _table(args) -> KernelTable:
    return KernelTable.from_file(args.table) if args.table else DEFAULT_TABLE


def cmd_noise(args) -> int:
    spec = _noise_spec(args)
    img = load_ppm(args.input)
    noisy, mask = corrupt_with_mask(img, spec)
    save_ppm(noisy, args.output, binary=not args.ascii)
    fraction = float(mask.any(axis=-1).mean())
    print(f"seed={spec.seed} model={spec.model} phi={spec.phi:g} corrupted_fraction={fraction:.6f}")
    return 0


def cmd_filter(args) -> int:
    spec = _filter_spec(args, args.mode)
    img = load_ppm(args.input)
    out, elapsed = run_filter(img, spec, _table(args), border=args.border, threads=args.threads)
    save_ppm(out, args.output, binary=not args.ascii)
    print(f"filter={spec.label} elapsed={elapsed:.6f}")
    return 0


def cmd_eval(args) -> int:
    report = evaluate(load_ppm(args.reference), load_ppm(args.test))
    print(report.line())
    return 0


def cmd_bench(args) -> int:
    if args.runs < 1:
        raise UsageError("runs must be at least 1")
    clean = load_ppm(args.input)
    noisy, _ = corrupt_with_mask(clean, _noise_spec(args))
    table = _table(args)
    times = {}
    outputs = {}
    for mode in MODES:
        spec = _filter_spec(args, mode)
        times[mode] = []
        for _ in range(args.runs):
            out, elapsed = run_filter(noisy, spec, table, border=args.border, threads=args.threads)
            times[mode].append(elapsed)
        outputs[mode] = out
    exact_q = evaluate(clean, outputs["exact"])
    approx_q = evaluate(clean, outputs["approx"])
    per_run = [100.0 * (e / a - 1.0) for e, a in zip(times["exact"], times["approx"])]
    sd = lambda v: statistics.stdev(v) if len(v) > 1 else 0.0  # noqa: E731
    te, ta = statistics.median(times["exact"]), statistics.median(times["approx"])
    result = BenchResult(
        filter=f"{args.family}-w{args.window}",
        runs=args.runs,
        exact_time=te,
        approx_time=ta,
        exact_stdev=sd(times["exact"]),
        approx_stdev=sd(times["approx"]),
        speedup_percent=100.0 * (te / ta - 1.0),
        speedup_stdev=sd(per_run),
        quality_delta_percent={
            "mae": _delta_percent(exact_q.mae, approx_q.mae),
            "mse": _delta_percent(exact_q.mse, approx_q.mse),
            "ncd": _delta_percent(exact_q.ncd, approx_q.ncd),
        },
    )
    print(f"seed={args.seed} threads={args.threads or 'default'}")
    print(f"exact:  {exact_q.line()}")
    print(f"approx: {approx_q.line()}")
    for line in result.lines():
        print(line)
    return 0


def cmd_fit(args) -> int:
    f, default_interval = FIT_FUNCTIONS[args.function]
    interval = _floats(args.interval, 2, "--interval") if args.interval else default_interval
    if args.degree < 0:
        raise UsageError("degree must be nonnegative")
    try:
        p = remez_fit(f, args.degree, interval, tol=args.tol, max_iters=args.max_iters)
    except ConvergenceError as exc:
        print(f"error: {exc} (last eps={exc.last.eps:.9e})", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    name = {"arccos": "ARCCOS", "arcsin2": "ARCSIN2"}.get(args.function, f"EXP_POLY{args.degree}")
    if args.output:
        write_table(args.output, {name: p})
    print(f"eps={p.eps:.6e}")
    print("coeffs=" + ",".join(f"{c:.9e}" for c in p.coeffs))
    return 0


def cmd_verify_coeffs(args) -> int:
    if args.grid_points < 10**4:
        raise UsageError("grid too coarse (need at least 10000 points)")
    certs = certify_table(_table(args), args.grid_points, include_polys=args.all)
    for cert in certs:
        print(cert.line())
    return 0 if all(c.passed for c in certs) else EXIT_CERT


def _add_noise_flags(p):
    p.add_argument("--model", default="correlated",
                   choices=["uncorrelated", "correlated", "mixed",
                            "uncorrelated_impulsive", "correlated_impulsive"])
    p.add_argument("--phi", type=float, default=0.1, help="sample corruption probability")
    p.add_argument("--phi-k", help="per-channel probabilities, e.g. 0.25,0.25,0.25")
    p.add_argument("--sigma", type=float, default=10.0, help="gaussian sigma (mixed model)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--impulse", choices=IMPULSE_LAWS, default="uniform")


def _add_filter_flags(p):
    p.add_argument("--family", required=True, type=str.upper, choices=FAMILIES)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--kappa", type=float, default=0.33)
    p.add_argument("--exp-variant", choices=EXP_VARIANTS, default="rational")
    p.add_argument("--border", choices=["replicate", "skip"], default="replicate")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--table", help="coefficient table file overriding built-in coefficients")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fastvf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("noise", help="corrupt an image with a noise model")
    p.add_argument("input")
    p.add_argument("output")
    _add_noise_flags(p)
    p.add_argument("--ascii", action="store_true", help="write P3 instead of P6")
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("filter", help="filter an image")
    p.add_argument("input")
    p.add_argument("output")
    _add_filter_flags(p)
    p.add_argument("--mode", choices=MODES, default="exact")
    p.add_argument("--ascii", action="store_true", help="write P3 instead of P6")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("eval", help="quality metrics of TEST against REFERENCE")
    p.add_argument("reference")
    p.add_argument("test")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="exact vs approximate timing and quality")
    p.add_argument("input")
    _add_filter_flags(p)
    _add_noise_flags(p)
    p.add_argument("--runs", type=int, default=5)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fit", help="Remez minimax polynomial fit")
    p.add_argument("function", choices=sorted(FIT_FUNCTIONS))
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--interval", help="a,b (defaults depend on the function)")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=50)
    p.add_argument("--out", dest="output", help="write a coefficient table file")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("verify-coeffs", help="certify the coefficient tables")
    p.add_argument("--grid-points", type=int, default=10**6)
    p.add_argument("--table", help="coefficient table file to certify instead of the built-in one")
    p.add_argument("--all", action="store_true", help="also certify the EXP polynomials")
    p.set_defaults(func=cmd_verify_coeffs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, PpmError, DimensionMismatchError, ValueError, ZeroDivisionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
