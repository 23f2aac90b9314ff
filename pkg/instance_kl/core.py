"""
Core value types for distribution estimation.

Every module passes around the same handful of immutable records:

- ProbVector: a point of the probability simplex over d symbols
- Histogram: nonnegative symbol counts (real-valued, so noisy
  intermediates can flow through the same code)
- SplitSample: two independently drawn halves (x, x') of one dataset
- PrivacyParams: the (epsilon, delta) guarantee requested
- EstimatorConfig: split ratio, threshold, add-constant and Good-Turing cutoff

Author: instance-kl contributors - MIT License
"""

from dataclasses import dataclass, replace as _dc_replace
from typing import Iterable, Union

import numpy as np

from instance_kl import NORMALIZATION_TOL

ArrayLike = Union[Iterable[float], np.ndarray]

# =============================================================================
# ERRORS
# =============================================================================


class InstanceKLError(ValueError):
    """Root of every domain error raised by the package."""


class ConfigError(InstanceKLError):
    pass


class EmptyVectorError(InstanceKLError):
    pass


class NegativeEntryError(InstanceKLError):
    pass


class NotNormalizedError(InstanceKLError):
    pass


class ZeroSumError(InstanceKLError):
    pass


class EmptyHistogramError(InstanceKLError):
    pass


class DimensionMismatchError(InstanceKLError):
    pass


class ConditionViolatedError(InstanceKLError):
    """A documented precondition of a bound does not hold.

    `condition` names the failed requirement, e.g. "n·ε ≥ 1".
    """

    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        message = f"condition violated: {condition}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class DivideByZeroError(InstanceKLError, ZeroDivisionError):
    pass


class EmptyHoldoutError(InstanceKLError):
    pass


class IncompatibleLossError(InstanceKLError):
    pass


class BadMassError(InstanceKLError):
    pass


class ParseError(InstanceKLError):
    """Malformed line in a token histogram file."""

    def __init__(self, path, line_no: int, line: str, reason: str):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {reason}: {line!r}")


class IdOutOfRangeError(InstanceKLError):
    pass


class EmptyFileError(InstanceKLError):
    pass


class ResultsIOError(InstanceKLError, OSError):
    pass


# =============================================================================
# ARRAY HELPERS
# =============================================================================


def _frozen(values: ArrayLike) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


def _check_nonnegative(arr: np.ndarray, what: str) -> None:
    if np.any(np.isnan(arr)):
        raise NegativeEntryError(f"{what} contains NaN")
    if np.any(arr < 0):
        i = int(np.flatnonzero(arr < 0)[0])
        raise NegativeEntryError(f"{what}[{i}] = {arr[i]!r} is negative")


# =============================================================================
# VALUE TYPES
# =============================================================================


@dataclass(frozen=True, eq=False)
class ProbVector:
    """A distribution p over d >= 1 symbols. Build with validate_prob_vector or normalize."""

    probs: np.ndarray

    @property
    def d(self) -> int:
        return int(self.probs.size)

    def __len__(self) -> int:
        return self.d

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProbVector):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    __hash__ = None

    def tolist(self):
        return self.probs.tolist()


@dataclass(frozen=True, eq=False)
class Histogram:
    """Symbol counts x in R_+^d (integers when noise-free)."""

    counts: np.ndarray

    @classmethod
    def from_counts(cls, raw: ArrayLike) -> "Histogram":
        arr = _frozen(raw)
        _check_nonnegative(arr, "counts")
        return cls(arr)

    @property
    def d(self) -> int:
        return int(self.counts.size)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    def __len__(self) -> int:
        return self.d

    def __eq__(self, other) -> bool:
        if not isinstance(other, Histogram):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)

    __hash__ = None

    def tolist(self):
        return self.counts.tolist()


@dataclass(frozen=True, eq=False)
class SplitSample:
    """Two independent halves: x ~ Poi(alpha*n*p), x' ~ Poi((1-alpha)*n*p)."""

    x: Histogram
    x_prime: Histogram
    alpha: float
    n: float

    def __post_init__(self):
        if self.x.d != self.x_prime.d:
            raise DimensionMismatchError(
                f"split halves differ in length: {self.x.d} vs {self.x_prime.d}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie strictly inside (0, 1), got {self.alpha}")
        if not self.n > 0:
            raise ConfigError(f"n must be positive, got {self.n}")

    @property
    def d(self) -> int:
        return self.x.d

    @property
    def combined(self) -> Histogram:
        return Histogram(_frozen(self.x.counts + self.x_prime.counts))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SplitSample):
            return NotImplemented
        return (self.x == other.x and self.x_prime == other.x_prime
                and self.alpha == other.alpha and self.n == other.n)

    __hash__ = None


@dataclass(frozen=True)
class PrivacyParams:
    """(epsilon, delta)-DP guarantee. Only pure DP (delta = 0) mechanisms are implemented."""

    epsilon: float
    delta: float = 0.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 <= self.delta <= 1.0:
            raise ConfigError(f"delta must lie in [0, 1], got {self.delta}")

    @property
    def eps_bar(self) -> float:
        """min(epsilon, 1)"""
        return min(self.epsilon, 1.0)

    @property
    def floor(self) -> float:
        """Truncation floor 1/min(epsilon, 1) applied to noisy counts."""
        return 1.0 / self.eps_bar


@dataclass(frozen=True)
class EstimatorConfig:
    """
    Tunable knobs shared by the estimators.

    alpha: share of the data used for thresholding (Sampling Twice)
    tau: threshold in count units; the DP variant divides it by min(eps, 1)
    add_constant: pseudo-count c (1 = Laplace smoothing, 1/2 = Krichevsky-Trofimov)
    gt_cutoff_exponent: Good-Turing smooths count classes t <= n**exponent
    """

    alpha: float = 0.5
    tau: float = 0.0
    add_constant: float = 1.0
    gt_cutoff_exponent: float = 1.0 / 3.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie strictly inside (0, 1), got {self.alpha}")
        if not self.tau >= 0.0:
            raise ConfigError(f"tau must be nonnegative, got {self.tau}")
        if not self.add_constant > 0.0:
            raise ConfigError(f"add_constant must be positive, got {self.add_constant}")
        if not 0.0 < self.gt_cutoff_exponent < 1.0:
            raise ConfigError(
                f"gt_cutoff_exponent must lie strictly inside (0, 1), got {self.gt_cutoff_exponent}")

    def replace(self, **overrides) -> "EstimatorConfig":
        """Validated copy with some fields changed; None values are ignored."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        return _dc_replace(self, **changes)


# =============================================================================
# OPERATIONS
# =============================================================================


def validate_prob_vector(raw: ArrayLike) -> ProbVector:
    """
    Accept raw as a distribution only if it is nonempty, nonnegative and
    sums to 1 within NORMALIZATION_TOL.
    """
    arr = _frozen(raw)
    if arr.size == 0:
        raise EmptyVectorError("probability vector is empty")
    _check_nonnegative(arr, "probs")
    total = float(arr.sum())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalizedError(f"entries sum to {total!r}, not 1")
    return ProbVector(arr)


def normalize(raw: ArrayLike) -> ProbVector:
    """Divide nonnegative weights by their sum."""
    arr = np.array(raw, dtype=float).reshape(-1)
    if arr.size == 0:
        raise EmptyVectorError("cannot normalize an empty vector")
    _check_nonnegative(arr, "weights")
    total = arr.sum()
    if not total > 0:
        raise ZeroSumError("weights sum to zero")
    return ProbVector(_frozen(arr / total))


def as_prob_vector(p: Union[ProbVector, ArrayLike]) -> ProbVector:
    if isinstance(p, ProbVector):
        return p
    return validate_prob_vector(p)


def as_histogram(h: Union[Histogram, ArrayLike]) -> Histogram:
    if isinstance(h, Histogram):
        return h
    return Histogram.from_counts(h)
