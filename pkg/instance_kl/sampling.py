"""
Seeded sampling of datasets and privacy noise.

A NoiseSource owns one numpy Generator (PCG64). Datasets are drawn either
Poissonized (each count independently Poi(n*p_i)) or multinomially, and a
dataset can be split into two independent halves for the Sampling Twice
estimators. Laplace noise is drawn by inverting the CDF of a uniform draw.

ZeroNoise mode replaces every random quantity with a deterministic stand-in
so hand-traced fixtures stay stable:
  - Laplace draws are 0
  - Poisson draws are round(mean)
  - multinomial draws are n*p rounded by largest remainder (sum stays n)
  - binomial thinning is round(count * ratio)

A NoiseSource is single-owner state: share it across threads and the
draw order (and therefore reproducibility) is lost.

Author: instance-kl contributors - MIT License
"""

import logging
from enum import Enum
from typing import Optional, Union

import numpy as np

from instance_kl.core import (
    ConfigError,
    Histogram,
    ProbVector,
    SplitSample,
    as_histogram,
    as_prob_vector,
)

logger = logging.getLogger(__name__)


class NoiseMode(Enum):
    RANDOM = "random"
    ZERO_NOISE = "zero_noise"


class NoiseSource:
    """
    Seeded generator of Poisson / multinomial / binomial / Laplace draws.

    Identical (seed, mode, call sequence) gives bit-identical draws.
    """

    def __init__(self, seed: int = 0, mode: NoiseMode = NoiseMode.RANDOM,
                 seed_sequence: Optional[np.random.SeedSequence] = None):
        self.seed = int(seed)
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {seed}")
        self.mode = mode
        if seed_sequence is None:
            seed_sequence = np.random.SeedSequence(self.seed)
        self._generator = np.random.Generator(np.random.PCG64(seed_sequence))

    @classmethod
    def for_trial(cls, master_seed: int, trial: int,
                  mode: NoiseMode = NoiseMode.RANDOM) -> "NoiseSource":
        """Stream for one trial: a pure function of (master_seed, trial)."""
        if int(master_seed) < 0:
            raise ConfigError(f"seed must be nonnegative, got {master_seed}")
        seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(trial),))
        return cls(master_seed, mode, seed_sequence=seq)

    @classmethod
    def zero_noise(cls, seed: int = 0) -> "NoiseSource":
        return cls(seed, NoiseMode.ZERO_NOISE)

    @property
    def is_zero_noise(self) -> bool:
        return self.mode is NoiseMode.ZERO_NOISE

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    # --- primitive draws -----------------------------------------------------

    def poisson(self, means: np.ndarray) -> np.ndarray:
        means = np.asarray(means, dtype=float)
        if self.is_zero_noise:
            return np.round(means)
        return self._generator.poisson(means).astype(float)

    def multinomial(self, n: int, probs: np.ndarray) -> np.ndarray:
        probs = np.asarray(probs, dtype=float)
        if self.is_zero_noise:
            return _largest_remainder(n, probs)
        # numpy rejects probabilities whose partial sums overshoot 1 by rounding
        safe = probs / probs.sum()
        return self._generator.multinomial(n, safe).astype(float)

    def binomial(self, counts: np.ndarray, ratio: float) -> np.ndarray:
        counts = np.asarray(counts, dtype=float)
        if self.is_zero_noise:
            return np.round(counts * ratio)
        return self._generator.binomial(counts.astype(np.int64), ratio).astype(float)

    def laplace(self, scale: float, size: Optional[int] = None) -> Union[float, np.ndarray]:
        if self.is_zero_noise:
            return 0.0 if size is None else np.zeros(size)
        # numpy inverts the CDF and redraws a zero uniform, so draws stay finite
        draw = self._generator.laplace(0.0, scale, size=size)
        return float(draw) if size is None else draw


def _largest_remainder(n: int, probs: np.ndarray) -> np.ndarray:
    exact = n * probs
    counts = np.floor(exact)
    short = int(round(n - counts.sum()))
    if short > 0:
        # stable sort keeps the lowest index first among equal remainders
        order = np.argsort(-(exact - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


# =============================================================================
# DATASETS
# =============================================================================


def sample_poisson_histogram(p: ProbVector, n: float, rng: NoiseSource) -> Histogram:
    """counts[i] ~ Poi(n * p_i), independent across symbols."""
    p = as_prob_vector(p)
    if not n > 0:
        raise ConfigError(f"n must be positive, got {n}")
    return Histogram.from_counts(rng.poisson(n * p.probs))


def sample_multinomial_histogram(p: ProbVector, n: int, rng: NoiseSource) -> Histogram:
    """Counts jointly Mult(n, p); they sum to exactly n."""
    p = as_prob_vector(p)
    n = int(n)
    if n < 1:
        raise ConfigError(f"multinomial sample size must be >= 1, got {n}")
    return Histogram.from_counts(rng.multinomial(n, p.probs))


def split_sample(p: ProbVector, n: float, alpha: float, rng: NoiseSource) -> SplitSample:
    """
    Draw the two independent halves consumed by the Sampling Twice estimators:
    x ~ Poi(alpha*n*p) and x' ~ Poi((1-alpha)*n*p), so x + x' ~ Poi(n*p).
    """
    p = as_prob_vector(p)
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    if not n > 0:
        raise ConfigError(f"n must be positive, got {n}")
    x = Histogram.from_counts(rng.poisson(alpha * n * p.probs))
    x_prime = Histogram.from_counts(rng.poisson((1.0 - alpha) * n * p.probs))
    return SplitSample(x, x_prime, alpha, n)


def thin_histogram(h: Histogram, ratio: float, rng: NoiseSource) -> Histogram:
    """Keep each record independently with probability ratio (binomial thinning)."""
    h = as_histogram(h)
    if not 0.0 <= ratio <= 1.0:
        raise ConfigError(f"thinning ratio must lie in [0, 1], got {ratio}")
    return Histogram.from_counts(rng.binomial(np.round(h.counts), ratio))


def split_histogram(h: Histogram, alpha: float, rng: NoiseSource) -> SplitSample:
    """
    Split one dataset into (x, x') by thinning with alpha.

    For Poissonized data the two parts are independent with the same law
    as split_sample; x' holds every record not kept in x.
    """
    h = as_histogram(h)
    x = thin_histogram(h, alpha, rng)
    x_prime = Histogram.from_counts(np.round(h.counts) - x.counts)
    return SplitSample(x, x_prime, alpha, max(h.total, 1.0))


# =============================================================================
# PRIVACY NOISE
# =============================================================================


def sample_laplace(scale_b: float, rng: NoiseSource,
                   size: Optional[int] = None) -> Union[float, np.ndarray]:
    """Draw(s) from density exp(-|z|/b) / 2b; zero in ZeroNoise mode."""
    if not scale_b > 0:
        raise ConfigError(f"Laplace scale must be positive, got {scale_b}")
    return rng.laplace(scale_b, size)
