"""
Losses and the Monte-Carlo trial runner.

KL(p || q) needs the true distribution. When only an empirical corpus is
available, the negative log-likelihood of a held-out sample ranks
estimators instead, since

    E[nll(q, x')] = H(p) + KL(p || q)

and the entropy term does not depend on the estimator.

All losses are in nats. A zero estimate on a supported symbol gives +inf,
and +inf propagates through the trial mean on purpose.

Author: instance-kl contributors - MIT License
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy.special import rel_entr, xlogy

from instance_kl.core import (
    ConfigError,
    DimensionMismatchError,
    EmptyHoldoutError,
    EstimatorConfig,
    Histogram,
    IncompatibleLossError,
    PrivacyParams,
    ProbVector,
    as_histogram,
    as_prob_vector,
)
from instance_kl.data_io import DataSource, SourceKind
from instance_kl.estimators import EstimatorKind, estimate
from instance_kl.sampling import (
    NoiseMode,
    NoiseSource,
    sample_multinomial_histogram,
    sample_poisson_histogram,
    split_histogram,
    split_sample,
    thin_histogram,
)

logger = logging.getLogger(__name__)


class LossKind(Enum):
    KL = "KL"
    NLL = "NLL"

    @classmethod
    def from_name(cls, name: str) -> "LossKind":
        try:
            return cls(name.strip().upper())
        except ValueError:
            raise ConfigError(f"unknown loss {name!r} (known: kl, nll)") from None


class SamplingScheme(Enum):
    POISSON = "poisson"
    MULTINOMIAL = "multinomial"


# =============================================================================
# LOSSES
# =============================================================================


def kl_divergence(p: ProbVector, q: ProbVector) -> float:
    """sum_{p_i > 0} p_i ln(p_i / q_i); +inf if q_i = 0 < p_i."""
    p, q = as_prob_vector(p), as_prob_vector(q)
    if p.d != q.d:
        raise DimensionMismatchError(f"KL between dimensions {p.d} and {q.d}")
    return float(rel_entr(p.probs, q.probs).sum())


def entropy(p: ProbVector) -> float:
    """Shannon entropy in nats."""
    p = as_prob_vector(p)
    return float(-xlogy(p.probs, p.probs).sum())


def nll(estimate_q: ProbVector, holdout: Histogram) -> float:
    """-sum_i (x'_i / |x'|_1) ln q_i over a held-out histogram x'."""
    q = as_prob_vector(estimate_q)
    holdout = as_histogram(holdout)
    if q.d != holdout.d:
        raise DimensionMismatchError(f"estimate has d={q.d}, holdout has d={holdout.d}")
    if not holdout.total > 0:
        raise EmptyHoldoutError("holdout histogram is empty")
    weights = holdout.counts / holdout.total
    with np.errstate(divide="ignore"):
        return float(-xlogy(weights, q.probs).sum())


# =============================================================================
# TRIAL STATISTICS
# =============================================================================


@dataclass(frozen=True)
class TrialStats:
    """Per-trial losses of one (estimator, n, d, eps) cell with mean and population std."""

    values: Tuple[float, ...]
    mean: float
    std: float
    trials: int
    loss_kind: LossKind

    @classmethod
    def from_values(cls, values, loss_kind: LossKind) -> "TrialStats":
        arr = np.asarray(values, dtype=float)
        if np.isinf(arr).any():
            mean, std = float("inf"), float("inf")
        else:
            mean, std = float(arr.mean()), float(arr.std())
        return cls(tuple(arr.tolist()), mean, std, int(arr.size), loss_kind)


# =============================================================================
# TRIAL RUNNER
# =============================================================================


def _synthetic_trial(source: DataSource, estimator: EstimatorKind, cfg: EstimatorConfig,
                     privacy: Optional[PrivacyParams], n: float, rng: NoiseSource,
                     sampling: SamplingScheme) -> float:
    p = source.probs
    if sampling is SamplingScheme.MULTINOMIAL:
        data = sample_multinomial_histogram(p, int(round(n)), rng)
        if estimator.needs_split:
            data = split_histogram(data, cfg.alpha, rng)
    elif estimator.needs_split:
        data = split_sample(p, n, cfg.alpha, rng)
    else:
        data = sample_poisson_histogram(p, n, rng)
    q = estimate(estimator, data, cfg, privacy, rng)
    return kl_divergence(p, q)


def _empirical_trial(source: DataSource, estimator: EstimatorKind, cfg: EstimatorConfig,
                     privacy: Optional[PrivacyParams], n: float, rng: NoiseSource) -> float:
    train = thin_histogram(source.counts, 0.5, rng)
    holdout = Histogram.from_counts(np.round(source.counts.counts) - train.counts)
    if n < train.total:
        train = thin_histogram(train, n / train.total, rng)
    else:
        logger.warning("n=%g exceeds the %g training records of %s; using all of them",
                       n, train.total, source.label)
    q = estimate(estimator, train, cfg, privacy, rng)
    return nll(q, holdout)


def run_trials(source: DataSource, estimator: EstimatorKind, cfg: EstimatorConfig,
               privacy: Optional[PrivacyParams], n: float, trials: int,
               master_seed: int, loss: LossKind = LossKind.KL,
               sampling: SamplingScheme = SamplingScheme.POISSON,
               mode: NoiseMode = NoiseMode.RANDOM,
               workers: int = 1) -> TrialStats:
    """
    Evaluate one experiment cell over independent trials.

    Trial k draws everything (data and estimator noise) from
    NoiseSource.for_trial(master_seed, k), so results do not depend on
    execution order or on the worker count.

    KL needs a synthetic source with known p; NLL needs an empirical source
    to split into train and holdout halves.
    """
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    if loss is LossKind.KL and source.kind is not SourceKind.SYNTHETIC:
        raise IncompatibleLossError(f"KL needs a known distribution; {source.label} is empirical")
    if loss is LossKind.NLL and source.kind is not SourceKind.EMPIRICAL:
        raise IncompatibleLossError(f"NLL needs a holdout split; {source.label} is synthetic")

    def one_trial(k: int) -> float:
        rng = NoiseSource.for_trial(master_seed, k, mode)
        if loss is LossKind.KL:
            value = _synthetic_trial(source, estimator, cfg, privacy, n, rng, sampling)
        else:
            value = _empirical_trial(source, estimator, cfg, privacy, n, rng)
        logger.debug("%s %s trial %d: %s=%.6g", source.label, estimator.value, k, loss.value, value)
        return value

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(one_trial, range(trials)))
    else:
        values = [one_trial(k) for k in range(trials)]

    stats = TrialStats.from_values(values, loss)
    eps = privacy.epsilon if privacy is not None else float("nan")
    logger.info("%s n=%g d=%d eps=%g %s: mean %s=%.6g (std %.3g, %d trials)",
                source.label, n, source.d, eps, estimator.value, loss.value,
                stats.mean, stats.std, trials)
    return stats
