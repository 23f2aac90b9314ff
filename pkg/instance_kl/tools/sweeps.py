"""
Benchmark sweeps and hyperparameter grid search.

A SweepSpec names a data source, the swept axes (n, d, eps) and the
estimators. run_benchmark evaluates the full cross product in the order
n, d, eps, estimator; run_gridsearch evaluates one Sampling Twice cell over
an (alpha, tau multiplier) grid.

Every cell runs with the same master seed, so cells that differ only in an
estimator setting see the same datasets (common random numbers) and a
one-point grid search reproduces the matching benchmark row exactly.

Usage:
    from instance_kl.tools.sweeps import SweepSpec, run_benchmark
    frame = run_benchmark(SweepSpec(dist="powerlaw", beta=2.0,
                                    n_values=(1000,), d_values=(10000,),
                                    eps_values=(1.0,), trials=5))

Author: instance-kl contributors - MIT License
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import pandas as pd

from instance_kl import DEFAULT_ALPHA_GRID, DEFAULT_TAU_MULT_GRID
from instance_kl.core import ConfigError, EstimatorConfig, PrivacyParams
from instance_kl.data_io import (
    DataSource,
    ResultRow,
    concentrated,
    load_token_histogram,
    power_law,
    results_frame,
    uniform,
)
from instance_kl.estimators import EstimatorKind, default_config
from instance_kl.evaluation import LossKind, SamplingScheme, run_trials
from instance_kl.sampling import NoiseMode

logger = logging.getLogger(__name__)

DISTRIBUTIONS = ("powerlaw", "uniform", "concentrated", "file")
GRID_COLUMNS = ["alpha", "tau_multiplier", "mean", "std", "trials"]


@dataclass(frozen=True)
class SweepSpec:
    """
    One experiment definition.

    eps_values may hold None for a non-private run. tau_mult, alpha and c
    override the per-estimator defaults when set; tau_mult is a multiple
    of ln d.
    """

    dist: str = "powerlaw"
    beta: float = 1.0
    masses: Tuple[float, ...] = (1.0 / 3.0, 2.0 / 3.0)
    path: Optional[str] = None
    n_values: Tuple[float, ...] = (1000.0,)
    d_values: Tuple[int, ...] = (1000,)
    eps_values: Tuple[Optional[float], ...] = (None,)
    estimators: Tuple[EstimatorKind, ...] = tuple(EstimatorKind)
    trials: int = 10
    seed: int = 0
    loss: LossKind = LossKind.KL
    sampling: SamplingScheme = SamplingScheme.POISSON
    alpha: Optional[float] = None
    tau_mult: Optional[float] = None
    c: Optional[float] = None
    workers: int = 1
    mode: NoiseMode = NoiseMode.RANDOM

    def __post_init__(self):
        if self.dist not in DISTRIBUTIONS:
            raise ConfigError(f"unknown distribution {self.dist!r} (known: {', '.join(DISTRIBUTIONS)})")
        if self.dist == "file" and not self.path:
            raise ConfigError("dist 'file' needs a path")
        for axis in ("n_values", "d_values", "eps_values", "estimators"):
            if len(getattr(self, axis)) == 0:
                raise ConfigError(f"{axis} must hold at least one value")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}")
        if None in self.eps_values and any(k.is_private for k in self.estimators):
            raise ConfigError("private estimators need an epsilon value")


# =============================================================================
# CELL HELPERS
# =============================================================================


def build_source(spec: SweepSpec, d: Optional[int]) -> DataSource:
    """The data source of one d value; file sources ignore d."""
    if spec.dist == "powerlaw":
        return DataSource.synthetic(power_law(d, spec.beta), f"powerlaw(beta={spec.beta:g})")
    if spec.dist == "uniform":
        return DataSource.synthetic(uniform(d), "uniform")
    if spec.dist == "concentrated":
        return DataSource.synthetic(concentrated(d, spec.masses), "concentrated")
    return load_token_histogram(spec.path)


def cell_config(kind: EstimatorKind, d: int, privacy: Optional[PrivacyParams],
                alpha: Optional[float] = None, tau_mult: Optional[float] = None,
                c: Optional[float] = None) -> EstimatorConfig:
    """Estimator defaults for d and privacy with the given overrides applied."""
    tau = None if tau_mult is None else tau_mult * math.log(d)
    return default_config(kind, d, privacy).replace(alpha=alpha, tau=tau, add_constant=c)


def _privacy(eps: Optional[float]) -> Optional[PrivacyParams]:
    return None if eps is None else PrivacyParams(float(eps))


# =============================================================================
# SWEEPS
# =============================================================================


def run_benchmark(spec: SweepSpec) -> pd.DataFrame:
    """One result row per (n, d, eps, estimator) cell, in that nesting order."""
    sources = {}
    rows = []
    d_axis = (None,) if spec.dist == "file" else spec.d_values
    for n in spec.n_values:
        for d in d_axis:
            if d not in sources:
                sources[d] = build_source(spec, d)
            source = sources[d]
            for eps in spec.eps_values:
                privacy = _privacy(eps)
                for kind in spec.estimators:
                    cfg = cell_config(kind, source.d, privacy, spec.alpha, spec.tau_mult, spec.c)
                    stats = run_trials(source, kind, cfg, privacy, n, spec.trials, spec.seed,
                                       loss=spec.loss, sampling=spec.sampling, mode=spec.mode,
                                       workers=spec.workers)
                    rows.append(ResultRow(
                        n=float(n), d=source.d,
                        eps=float("nan") if eps is None else float(eps),
                        estimator=kind.value, loss_kind=spec.loss.value,
                        mean=stats.mean, std=stats.std, trials=stats.trials, seed=spec.seed))
    logger.info("benchmark finished: %d cells", len(rows))
    return results_frame(rows)


def run_gridsearch(spec: SweepSpec,
                   alphas: Sequence[float] = DEFAULT_ALPHA_GRID,
                   tau_mults: Sequence[float] = DEFAULT_TAU_MULT_GRID) -> pd.DataFrame:
    """
    Evaluate every (alpha, tau multiplier) pair for a single Sampling Twice
    estimator at a single (n, d, eps); rows sorted by mean loss, ties kept
    in grid order.
    """
    if len(spec.estimators) != 1 or not spec.estimators[0].needs_split:
        raise ConfigError("grid search takes exactly one of the estimators st, st_dp")
    for axis in ("n_values", "d_values", "eps_values"):
        if len(getattr(spec, axis)) != 1:
            raise ConfigError(f"grid search takes a single value for {axis}")
    if not alphas or not tau_mults:
        raise ConfigError("grid search needs at least one alpha and one tau multiplier")

    kind = spec.estimators[0]
    n, d, eps = spec.n_values[0], spec.d_values[0], spec.eps_values[0]
    source = build_source(spec, d)
    privacy = _privacy(eps)

    records = []
    for alpha in alphas:
        for tau_mult in tau_mults:
            cfg = cell_config(kind, source.d, privacy, alpha, tau_mult, spec.c)
            stats = run_trials(source, kind, cfg, privacy, n, spec.trials, spec.seed,
                               loss=spec.loss, sampling=spec.sampling, mode=spec.mode,
                               workers=spec.workers)
            records.append((alpha, tau_mult, stats.mean, stats.std, stats.trials))

    frame = pd.DataFrame(records, columns=GRID_COLUMNS)
    frame = frame.sort_values("mean", kind="stable").reset_index(drop=True)
    best = frame.iloc[0]
    logger.info("grid search %s: best alpha=%g tau_multiplier=%g mean=%.6g",
                kind.value, best["alpha"], best["tau_multiplier"], best["mean"])
    return frame
