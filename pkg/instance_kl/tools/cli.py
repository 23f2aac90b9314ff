#!/usr/bin/env python3
"""
instance-kl command line.

    instance-kl estimate  --est st --x 0,2,0 --xprime 1,3,0
    instance-kl benchmark --dist powerlaw --beta 2 --n 1000 --d 10000 --eps 1 --trials 5
    instance-kl bounds    --dist concentrated --masses 0.3333333333333333,0.6666666666666667 --d 10 --n 10 --t 1
    instance-kl gridsearch --est st --dist powerlaw --n 1000 --d 1000 --trials 10

Results go to standard output (or --out); logs go to standard error.
Argument errors exit 2, data errors exit 1.

Usage:
    python -m instance_kl <command> [options]
"""

import argparse
import logging
import sys
from typing import List, Optional

from instance_kl import __version__
from instance_kl.bounds import bound_report
from instance_kl.core import (
    Histogram,
    InstanceKLError,
    PrivacyParams,
    SplitSample,
    normalize,
)
from instance_kl.data_io import load_token_histogram, write_results_csv
from instance_kl.estimators import EstimatorKind, estimate
from instance_kl.evaluation import LossKind, SamplingScheme
from instance_kl.sampling import NoiseMode, NoiseSource
from instance_kl.tools.sweeps import (
    DISTRIBUTIONS,
    SweepSpec,
    build_source,
    cell_config,
    run_benchmark,
    run_gridsearch,
)

logger = logging.getLogger(__name__)


# =============================================================================
# ARGUMENT TYPES
# =============================================================================


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _estimators(text: str) -> List[EstimatorKind]:
    try:
        return [EstimatorKind.from_name(v) for v in text.split(",") if v.strip()]
    except InstanceKLError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _estimator(text: str) -> EstimatorKind:
    kinds = _estimators(text)
    if len(kinds) != 1:
        raise argparse.ArgumentTypeError(f"expected one estimator, got {text!r}")
    return kinds[0]


# =============================================================================
# PARSER
# =============================================================================


def _add_source_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dist", choices=DISTRIBUTIONS, default="powerlaw",
                   help="distribution family, or 'file' for a token histogram")
    p.add_argument("--beta", type=float, default=1.0, help="power-law exponent")
    p.add_argument("--masses", type=_floats, default=[1.0 / 3.0, 2.0 / 3.0],
                   help="leading masses of the concentrated distribution")
    p.add_argument("--path", help="token histogram file for --dist file")


def _add_sweep_args(p: argparse.ArgumentParser) -> None:
    _add_source_args(p)
    p.add_argument("--n", type=_floats, default=[1000.0], help="sample sizes (comma list)")
    p.add_argument("--d", type=_ints, default=[1000], help="dimensions (comma list)")
    p.add_argument("--eps", type=_floats, default=None, help="privacy levels (comma list)")
    p.add_argument("--trials", type=_positive_int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--loss", choices=("kl", "nll"), default=None,
                   help="default: kl for synthetic sources, nll for files")
    p.add_argument("--sampling", choices=[s.value for s in SamplingScheme], default="poisson")
    p.add_argument("--alpha", type=float, default=None, help="split ratio override")
    p.add_argument("--tau-mult", type=float, default=None, help="threshold as a multiple of ln d")
    p.add_argument("--c", type=float, default=None, help="add-constant pseudo-count")
    p.add_argument("--workers", type=_positive_int, default=1, help="threads per cell")
    p.add_argument("--zero-noise", action="store_true", help="deterministic noise stand-ins")
    p.add_argument("--out", help="CSV path (default: standard output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="instance-kl",
        description="Discrete distribution estimation under KL loss, with and without DP.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for progress, -vv for per-trial detail")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="run one estimator on a histogram")
    p.add_argument("--est", type=_estimator, required=True,
                   help=f"one of {', '.join(k.value for k in EstimatorKind)}")
    data = p.add_mutually_exclusive_group(required=True)
    data.add_argument("--counts", type=_floats, help="histogram (comma list)")
    data.add_argument("--x", type=_floats, help="first half of a split sample")
    data.add_argument("--path", help="token histogram file")
    p.add_argument("--xprime", type=_floats, help="second half of a split sample (with --x)")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--tau-mult", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--zero-noise", action="store_true")
    p.add_argument("--out", help="write index,prob lines here instead of standard output")
    p.set_defaults(handler=cmd_estimate, parser=p)

    p = sub.add_parser("benchmark", help="Monte-Carlo sweep over (n, d, eps, estimator)")
    _add_sweep_args(p)
    p.add_argument("--estimators", type=_estimators, default=None,
                   help="comma list (default: all, or the non-private ones without --eps)")
    p.set_defaults(handler=cmd_benchmark, parser=p)

    p = sub.add_parser("bounds", help="minimax and per-instance bounds for one instance")
    _add_source_args(p)
    p.add_argument("--d", type=int, default=1000)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--t", type=float, default=None, help="non-DP neighborhood size")
    p.add_argument("--t-dp", type=float, default=None, help="DP neighborhood size")
    p.set_defaults(handler=cmd_bounds, parser=p)

    p = sub.add_parser("gridsearch", help="(alpha, tau) grid for a Sampling Twice estimator")
    _add_sweep_args(p)
    p.add_argument("--est", type=_estimator, required=True, help="st or st_dp")
    p.add_argument("--alphas", type=_floats, default=None, help="alpha grid (comma list)")
    p.add_argument("--tau-mults", type=_floats, default=None, help="tau multiplier grid (comma list)")
    p.set_defaults(handler=cmd_gridsearch, parser=p)

    return parser


def _setup_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("instance_kl").setLevel(level)


# =============================================================================
# COMMANDS
# =============================================================================


def _emit(lines: List[str], out: Optional[str]) -> None:
    text = "".join(line + "\n" for line in lines)
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _mode(args) -> NoiseMode:
    return NoiseMode.ZERO_NOISE if args.zero_noise else NoiseMode.RANDOM


def cmd_estimate(args) -> int:
    kind = args.est
    if kind.is_private and args.eps is None:
        args.parser.error(f"estimator {kind.value} needs --eps")
    if args.x is not None and args.xprime is None:
        args.parser.error("--x needs --xprime")
    if args.xprime is not None and args.x is None:
        args.parser.error("--xprime needs --x")

    if args.x is not None:
        x, x_prime = Histogram.from_counts(args.x), Histogram.from_counts(args.xprime)
        alpha = args.alpha if args.alpha is not None else 0.5
        data = SplitSample(x, x_prime, alpha, max(x.total + x_prime.total, 1.0))
    elif args.path:
        data = load_token_histogram(args.path).counts
    else:
        data = Histogram.from_counts(args.counts)

    privacy = PrivacyParams(args.eps) if args.eps is not None else None
    d = data.d
    cfg = cell_config(kind, d, privacy, args.alpha, args.tau_mult, args.c)
    rng = NoiseSource(args.seed, _mode(args))
    q = estimate(kind, data, cfg, privacy, rng)
    _emit([f"{i},{v:.9g}" for i, v in enumerate(q.probs)], args.out)
    return 0


def _sweep_spec(args, estimators) -> SweepSpec:
    if any(k.is_private for k in estimators) and args.eps is None:
        args.parser.error("private estimators need --eps")
    if args.dist == "file" and not args.path:
        args.parser.error("--dist file needs --path")
    if args.loss is None:
        loss = LossKind.NLL if args.dist == "file" else LossKind.KL
    else:
        loss = LossKind.from_name(args.loss)
    return SweepSpec(
        dist=args.dist, beta=args.beta, masses=tuple(args.masses), path=args.path,
        n_values=tuple(args.n), d_values=tuple(args.d),
        eps_values=tuple(args.eps) if args.eps else (None,),
        estimators=tuple(estimators), trials=args.trials, seed=args.seed, loss=loss,
        sampling=SamplingScheme(args.sampling), alpha=args.alpha, tau_mult=args.tau_mult,
        c=args.c, workers=args.workers, mode=_mode(args))


def cmd_benchmark(args) -> int:
    estimators = args.estimators
    if estimators is None:
        estimators = [k for k in EstimatorKind if args.eps or not k.is_private]
    spec = _sweep_spec(args, estimators)
    frame = run_benchmark(spec)
    write_results_csv(frame, args.out or sys.stdout)
    return 0


def cmd_gridsearch(args) -> int:
    if not args.est.needs_split:
        args.parser.error("grid search takes --est st or --est st_dp")
    spec = _sweep_spec(args, [args.est])
    grids = {}
    if args.alphas:
        grids["alphas"] = args.alphas
    if args.tau_mults:
        grids["tau_mults"] = args.tau_mults
    frame = run_gridsearch(spec, **grids)
    write_results_csv(frame, args.out or sys.stdout)
    return 0


def cmd_bounds(args) -> int:
    if args.dist == "file" and not args.path:
        args.parser.error("--dist file needs --path")
    spec = SweepSpec(dist=args.dist, beta=args.beta, masses=tuple(args.masses), path=args.path,
                     eps_values=(args.eps,))
    source = build_source(spec, args.d)
    p = source.probs if source.probs is not None else normalize(source.counts.counts)
    report = bound_report(p, args.n, PrivacyParams(args.eps), args.t, args.t_dp)
    _emit(report.as_lines(), None)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    try:
        return args.handler(args)
    except (InstanceKLError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
