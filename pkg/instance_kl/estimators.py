"""
Distribution estimators under KL loss.

Baselines:
- add_constant: normalized (x_i + c)
- add_constant_dp: Laplace mechanism on the count vector, truncated at
  1/min(eps, 1), then normalized (minimax rate ln(1 + d / (n min(eps, 1))))
- good_turing: count-class Good-Turing with +1 smoothing of the class
  sizes below a cutoff n**exponent, empirical masses above it

Sampling Twice:
- sampling_twice: one half x selects the low-count set L, the other half x'
  estimates L's combined mass and the individual masses
- sampling_twice_dp: the same with a Laplace-noised threshold test, a noisy
  combined mass and noisy large-symbol counts. Each record sits in exactly
  one of x, x' and every protected statistic has l1-sensitivity 1, so the
  whole procedure is eps-DP.

All estimators return a ProbVector. The Sampling Twice outputs are strictly
positive everywhere.

Author: instance-kl contributors - MIT License
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from instance_kl.core import (
    ConfigError,
    EmptyHistogramError,
    EstimatorConfig,
    Histogram,
    PrivacyParams,
    ProbVector,
    SplitSample,
    as_histogram,
    normalize,
)
from instance_kl.sampling import NoiseSource, sample_laplace, split_histogram

logger = logging.getLogger(__name__)


class EstimatorKind(Enum):
    """Estimator identity; the value is the short name used on the CLI and in CSVs."""

    ADD_CONSTANT = "addconst"
    ADD_CONSTANT_DP = "addconst_dp"
    GOOD_TURING = "gt"
    SAMPLING_TWICE = "st"
    SAMPLING_TWICE_DP = "st_dp"

    @property
    def needs_split(self) -> bool:
        return self in (EstimatorKind.SAMPLING_TWICE, EstimatorKind.SAMPLING_TWICE_DP)

    @property
    def is_private(self) -> bool:
        return self in (EstimatorKind.ADD_CONSTANT_DP, EstimatorKind.SAMPLING_TWICE_DP)

    @classmethod
    def from_name(cls, name: str) -> "EstimatorKind":
        try:
            return cls(name.strip())
        except ValueError:
            known = ", ".join(k.value for k in cls)
            raise ConfigError(f"unknown estimator {name!r} (known: {known})") from None


# =============================================================================
# CONFIGURATION DEFAULTS
# =============================================================================


def default_config(kind: EstimatorKind, d: int,
                   privacy: Optional[PrivacyParams] = None) -> EstimatorConfig:
    """
    Tuned defaults per estimator.

    Sampling Twice (non-DP): alpha 0.5, tau 0.
    Sampling Twice (DP): alpha 0.9, tau min(1/eps, 1) * ln d.
    """
    if kind is EstimatorKind.SAMPLING_TWICE_DP:
        eps = privacy.epsilon if privacy is not None else 1.0
        return EstimatorConfig(alpha=0.9, tau=min(1.0 / eps, 1.0) * math.log(max(d, 1)))
    return EstimatorConfig(alpha=0.5, tau=0.0)


# =============================================================================
# BASELINES
# =============================================================================


def add_constant(x: Histogram, c: float = 1.0) -> ProbVector:
    """(x_i + c) / (sum_j x_j + c*d)"""
    if not c > 0:
        raise ConfigError(f"add-constant c must be positive, got {c}")
    x = as_histogram(x)
    return normalize(x.counts + c)


def add_constant_dp(x: Histogram, privacy: PrivacyParams, rng: NoiseSource) -> ProbVector:
    """Laplace(1/eps) noise on every count, truncated below at 1/min(eps, 1)."""
    x = as_histogram(x)
    noisy = x.counts + sample_laplace(1.0 / privacy.epsilon, rng, size=x.d)
    return normalize(np.maximum(noisy, privacy.floor))


def good_turing(x: Histogram, cfg: Optional[EstimatorConfig] = None) -> ProbVector:
    """
    Count-class Good-Turing.

    With n = sum(x) and Phi_t the number of symbols seen t times, class t
    gets mass proportional to (t+1)*(Phi_{t+1}+1) when t <= n**exponent and
    to t*Phi_t above the cutoff. Each class mass is shared uniformly by its
    Phi_t members; absent classes get nothing.
    """
    cfg = cfg or EstimatorConfig()
    x = as_histogram(x)
    n = x.total
    if not n > 0:
        raise EmptyHistogramError("Good-Turing needs at least one observation")

    counts = np.round(x.counts).astype(np.int64)
    classes, members = np.unique(counts, return_counts=True)
    phi = dict(zip(classes.tolist(), members.tolist()))
    cutoff = n ** cfg.gt_cutoff_exponent

    weights = np.empty(x.d)
    for t, size in phi.items():
        if t <= cutoff:
            mass = (t + 1) * (phi.get(t + 1, 0) + 1)
        else:
            mass = t * size
        weights[counts == t] = mass / size
    return normalize(weights)


# =============================================================================
# SAMPLING TWICE
# =============================================================================


def _combine(selected: np.ndarray, small_mass: float, values: np.ndarray) -> ProbVector:
    """
    Assemble output weights: symbols in L share small_mass in proportion to
    their values, the rest keep their values. Normalizing by the weight sum
    equals dividing by N = small_mass + sum_{i not in L} values_i whenever L
    is nonempty; with L empty the small mass has nowhere to go and is dropped.
    """
    weights = values.astype(float).copy()
    if selected.any():
        in_l = values[selected]
        denom = in_l.sum()
        assert denom > 0, "truncated values in L must be positive"
        weights[selected] = small_mass * in_l / denom
    else:
        logger.debug("empty small set: dropping combined mass %.6g and renormalizing", small_mass)
    return normalize(weights)


def sampling_twice(s: SplitSample, tau: float = 0.0) -> ProbVector:
    """
    Non-private Sampling Twice.

    L = {i : x_i <= tau}; combined mass c = max(sum_{i in L} x'_i, 1);
    individual estimates max(x'_i, 1); symbols in L share c in proportion
    to their individual estimates.
    """
    if not tau >= 0:
        raise ConfigError(f"tau must be nonnegative, got {tau}")
    selected = s.x.counts <= tau
    c_tilde = max(float(s.x_prime.counts[selected].sum()), 1.0)
    x_tilde = np.maximum(s.x_prime.counts, 1.0)
    logger.debug("sampling_twice: |L|=%d of d=%d, combined mass %.6g",
                 int(selected.sum()), s.d, c_tilde)
    return _combine(selected, c_tilde, x_tilde)


@dataclass(frozen=True)
class ProtectedStatistics:
    """The scalars the DP variant perturbs with Laplace(1/eps) noise, given L."""

    first_half: np.ndarray         # x_i for every i (threshold test)
    small_mass: float              # sum_{i in L} x'_i
    large_second_half: np.ndarray  # x'_i for i not in L


def protected_statistics(s: SplitSample, selected: np.ndarray) -> ProtectedStatistics:
    selected = np.asarray(selected, dtype=bool)
    return ProtectedStatistics(
        first_half=s.x.counts.copy(),
        small_mass=float(s.x_prime.counts[selected].sum()),
        large_second_half=s.x_prime.counts[~selected].copy(),
    )


def sampling_twice_dp(s: SplitSample, privacy: PrivacyParams,
                      tau: Optional[float] = None,
                      rng: Optional[NoiseSource] = None) -> ProbVector:
    """
    eps-DP Sampling Twice.

    With eps_bar = min(eps, 1) and floor f = 1/eps_bar:
      x~_i = x_i + Lap(1/eps);  L = {i : x~_i <= tau / eps_bar}
      c~   = max(sum_{i in L} x'_i + Lap(1/eps), f)
      x~'_i = x'_i + Lap(1/eps) for i not in L
      xbar_i = max(x~_i, f)                                   i in L
      xbar_i = (1 - alpha) * (max(x~_i, f) + max(x~'_i, f))   i not in L
    and symbols in L share c~ in proportion to xbar.

    tau defaults to 4 ln d. Ties at the threshold fall into L.
    """
    if rng is None:
        rng = NoiseSource()
    if tau is None:
        tau = 4.0 * math.log(s.d) if s.d > 1 else 0.0
    if not tau >= 0:
        raise ConfigError(f"tau must be nonnegative, got {tau}")

    scale = 1.0 / privacy.epsilon
    f = privacy.floor

    x_tilde = s.x.counts + sample_laplace(scale, rng, size=s.d)
    selected = x_tilde <= tau / privacy.eps_bar
    stats = protected_statistics(s, selected)

    c_tilde = max(stats.small_mass + sample_laplace(scale, rng), f)
    x_prime_tilde = stats.large_second_half + sample_laplace(
        scale, rng, size=stats.large_second_half.size)

    x_bar = np.maximum(x_tilde, f)
    x_bar[~selected] = (1.0 - s.alpha) * (x_bar[~selected] + np.maximum(x_prime_tilde, f))
    logger.debug("sampling_twice_dp: |L|=%d of d=%d, combined mass %.6g",
                 int(selected.sum()), s.d, c_tilde)
    return _combine(selected, c_tilde, x_bar)


# =============================================================================
# DISPATCH
# =============================================================================


def estimate(kind: EstimatorKind, data: Union[Histogram, SplitSample],
             cfg: Optional[EstimatorConfig] = None,
             privacy: Optional[PrivacyParams] = None,
             rng: Optional[NoiseSource] = None) -> ProbVector:
    """
    Run any estimator on a dataset.

    Split estimators given a plain Histogram split it by thinning with
    cfg.alpha; the others given a SplitSample use x + x'. Without cfg every
    estimator keeps its own defaults, so the DP threshold is 4 ln d.
    """
    tau = None if cfg is None else cfg.tau
    cfg = cfg or EstimatorConfig()
    rng = rng or NoiseSource()
    if kind.is_private and privacy is None:
        raise ConfigError(f"estimator {kind.value} needs privacy parameters")

    if kind.needs_split:
        split = data if isinstance(data, SplitSample) else split_histogram(data, cfg.alpha, rng)
        if kind is EstimatorKind.SAMPLING_TWICE:
            return sampling_twice(split, cfg.tau)
        return sampling_twice_dp(split, privacy, tau, rng)

    hist = data.combined if isinstance(data, SplitSample) else as_histogram(data)
    if kind is EstimatorKind.ADD_CONSTANT:
        return add_constant(hist, cfg.add_constant)
    if kind is EstimatorKind.ADD_CONSTANT_DP:
        return add_constant_dp(hist, privacy, rng)
    return good_turing(hist, cfg)
