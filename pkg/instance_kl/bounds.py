"""
Closed-form rates and per-instance bound calculators (in nats).

Minimax:
- non-DP:  ln(1 + d/n) upper rate, matching (d-1)/n or ln((d-1)/n) lower rate
- eps-DP:  ln(1 + d / (n min(eps, 1)))

Per-instance lower bounds over additive neighborhoods of p with size t:
- non-DP: ln(1+d_s)/n + p_s ln(1 + d_s/(n p_s)) + sum_i min(p_i, 1/n)
  over the small set {i : p_i <= t/n}
- DP: sum_i min(p_i, 1/(p_i n^2 eps^2)) + ln(1+d_s)/(n eps)
      + p_s ln(1 + d_s/(n eps p_s)) over the small set {i : p_i <= t/(n eps)}

Both expressions grow when a small symbol is added, so the full small set
is the maximizing choice; it is used directly instead of searched.

IMPORTANT: the hidden Omega/O constants are not known. Every calculator
reports the bracketed expression with constant 1. Use the values for
ratio diagnostics and order-of-magnitude checks only, never as certified
bounds.

Also here: Poisson/Laplace formulas used as test oracles (Poisson KL,
tail bound of Poisson + Laplace, inverse-Poisson expectation).

Author: instance-kl contributors - MIT License
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from instance_kl.core import (
    ConditionViolatedError,
    DivideByZeroError,
    PrivacyParams,
    ProbVector,
    as_prob_vector,
)
from instance_kl.sampling import NoiseSource, sample_laplace

logger = logging.getLogger(__name__)

# =============================================================================
# RESULT RECORDS
# =============================================================================


@dataclass(frozen=True)
class InstanceLowerBound:
    """One per-instance lower bound and the small set it was computed on."""

    value: float
    t_used: float
    small_set_size: int
    small_set_mass: float


@dataclass(frozen=True)
class BoundReport:
    """
    All bounds for one (p, n, eps) instance.

    t_used / small_set_* describe the non-DP calculation; the dp_* twins
    describe the DP one (its small set uses the threshold t/(n eps)).
    """

    nondp_minimax: float
    dp_minimax: float
    nondp_instance_lower: float
    dp_instance_lower: float
    t_used: float
    small_set_size: int
    small_set_mass: float
    dp_t_used: float
    dp_small_set_size: int
    dp_small_set_mass: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    def as_lines(self):
        """key=value lines in field order."""
        return [f"{k}={_fmt(v)}" for k, v in self.to_dict().items()]


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.9g}"


# =============================================================================
# MINIMAX RATES
# =============================================================================


def minimax_nondp_upper(d: int, n: float) -> float:
    """ln(1 + d/n), achieved by add-one smoothing on multinomial data."""
    _check_dn(d, n)
    return math.log1p(d / n)


def minimax_nondp_lower(d: int, n: float) -> float:
    """Lower rate: (d-1)/n when d-1 <= 2n, ln((d-1)/n) beyond."""
    _check_dn(d, n)
    if d - 1 <= 2 * n:
        return (d - 1) / n
    return math.log((d - 1) / n)


def minimax_dp(d: int, n: float, privacy: PrivacyParams) -> float:
    """ln(1 + d / (n min(eps, 1)))"""
    _check_dn(d, n)
    return math.log1p(d / (n * privacy.eps_bar))


def _check_dn(d: int, n: float) -> None:
    if d < 1:
        raise ConditionViolatedError("d ≥ 1", f"d={d}")
    if not n > 0:
        raise ConditionViolatedError("n > 0", f"n={n}")


# =============================================================================
# PER-INSTANCE LOWER BOUNDS
# =============================================================================


def default_t_nondp(d: int) -> float:
    """max(1, 2 ln ln d): the smallest neighborhood size with t e^-t <= 1/ln d."""
    if d <= math.e:
        return 1.0
    return max(1.0, 2.0 * math.log(math.log(d)))


def default_t_dp(d: int) -> float:
    """24 ln d, floored at 1."""
    return max(1.0, 24.0 * math.log(max(d, 1)))


def _small_mass_term(p_s: float, d_s: int, scale: float) -> float:
    """p_s ln(1 + d_s / (scale p_s)), defined as 0 at p_s = 0."""
    if p_s <= 0.0:
        return 0.0
    return p_s * math.log1p(d_s / (scale * p_s))


def instance_lower_nondp(p: ProbVector, n: float, t: Optional[float] = None) -> InstanceLowerBound:
    """
    Non-DP per-instance lower bound over the additive neighborhood of size t.

    Requires t >= 1, n >= 4, d >= 2.
    """
    p = as_prob_vector(p)
    t = default_t_nondp(p.d) if t is None else float(t)
    if t < 1:
        raise ConditionViolatedError("t ≥ 1", f"t={t}")
    if n < 4:
        raise ConditionViolatedError("n ≥ 4", f"n={n}")
    if p.d < 2:
        raise ConditionViolatedError("d ≥ 2", f"d={p.d}")

    probs = p.probs
    small = probs <= t / n
    d_s = int(small.sum())
    p_s = float(probs[small].sum())
    value = (math.log1p(d_s) / n
             + _small_mass_term(p_s, d_s, n)
             + float(np.minimum(probs, 1.0 / n).sum()))
    return InstanceLowerBound(value, t, d_s, min(p_s, 1.0))


def instance_lower_dp(p: ProbVector, n: float, privacy: PrivacyParams,
                      t: Optional[float] = None) -> InstanceLowerBound:
    """
    DP per-instance lower bound over the neighborhood of size t/(n eps).

    Requires t >= 1, n eps >= 1, d >= 2 and delta <= eps.
    """
    p = as_prob_vector(p)
    eps = privacy.epsilon
    t = default_t_dp(p.d) if t is None else float(t)
    if t < 1:
        raise ConditionViolatedError("t ≥ 1", f"t={t}")
    if n * eps < 1:
        raise ConditionViolatedError("n·ε ≥ 1", f"n·ε={n * eps:g}")
    if p.d < 2:
        raise ConditionViolatedError("d ≥ 2", f"d={p.d}")
    if privacy.delta > eps:
        raise ConditionViolatedError("δ ≤ ε", f"δ={privacy.delta:g}, ε={eps:g}")

    probs = p.probs
    ne = n * eps
    small = probs <= t / ne
    d_s = int(small.sum())
    p_s = float(probs[small].sum())

    with np.errstate(divide="ignore"):
        privacy_cost = 1.0 / (probs * ne ** 2)
    large_term = float(np.minimum(probs, privacy_cost).sum())
    value = large_term + math.log1p(d_s) / ne + _small_mass_term(p_s, d_s, ne)
    return InstanceLowerBound(value, t, d_s, min(p_s, 1.0))


def bound_report(p: ProbVector, n: float, privacy: PrivacyParams,
                 t_nondp: Optional[float] = None,
                 t_dp: Optional[float] = None) -> BoundReport:
    p = as_prob_vector(p)
    nondp = instance_lower_nondp(p, n, t_nondp)
    dp = instance_lower_dp(p, n, privacy, t_dp)
    return BoundReport(
        nondp_minimax=minimax_nondp_upper(p.d, n),
        dp_minimax=minimax_dp(p.d, n, privacy),
        nondp_instance_lower=nondp.value,
        dp_instance_lower=dp.value,
        t_used=nondp.t_used,
        small_set_size=nondp.small_set_size,
        small_set_mass=nondp.small_set_mass,
        dp_t_used=dp.t_used,
        dp_small_set_size=dp.small_set_size,
        dp_small_set_mass=dp.small_set_mass,
    )


def optimality_ratio(empirical_kl: float, lower: float) -> float:
    """empirical_kl / lower; how far an estimator sits above the instance bound."""
    if lower == 0:
        raise DivideByZeroError("instance lower bound is zero")
    return empirical_kl / lower


# =============================================================================
# PER-INSTANCE UPPER BOUNDS (SAMPLING TWICE)
# =============================================================================


def sampling_twice_upper(p: ProbVector, n: float, selected: np.ndarray) -> float:
    """
    Upper-bound expression of the non-DP Sampling Twice estimator for a
    given small set L:

        p_L ln(1 + |L| / (n p_L)) + sum_i min(p_i, 1/n)
    """
    p = as_prob_vector(p)
    selected = np.asarray(selected, dtype=bool)
    p_l = float(p.probs[selected].sum())
    return (_small_mass_term(p_l, int(selected.sum()), n)
            + float(np.minimum(p.probs, 1.0 / n).sum()))


def sampling_twice_dp_upper(p: ProbVector, n: float, privacy: PrivacyParams,
                            selected: np.ndarray) -> float:
    """
    Upper-bound expression of the DP Sampling Twice estimator for a given L:

        p_L ln(1 + |L| / (eps_bar n p_L)) + 1[L nonempty] / (n eps_bar)
        + sum_{p_i >= 1/(n eps_bar)} 1 / (p_i n^2 eps_bar^2)
    """
    p = as_prob_vector(p)
    selected = np.asarray(selected, dtype=bool)
    scale = n * privacy.eps_bar
    p_l = float(p.probs[selected].sum())
    large = p.probs >= 1.0 / scale
    value = _small_mass_term(p_l, int(selected.sum()), scale)
    if selected.any():
        value += 1.0 / scale
    value += float((1.0 / (p.probs[large] * scale ** 2)).sum())
    return value


def expected_small_set_upper(p: ProbVector, n: float, alpha: float, tau: float,
                             rng: NoiseSource, draws: int = 200,
                             privacy: Optional[PrivacyParams] = None) -> float:
    """
    Average the Sampling Twice upper-bound expression over small sets L
    drawn the way the estimator draws them (first half x ~ Poi(alpha n p),
    plus Laplace noise and a tau/eps_bar threshold when privacy is given).
    """
    p = as_prob_vector(p)
    total = 0.0
    for _ in range(draws):
        x = rng.poisson(alpha * n * p.probs)
        if privacy is None:
            selected = x <= tau
            total += sampling_twice_upper(p, n, selected)
        else:
            noisy = x + sample_laplace(1.0 / privacy.epsilon, rng, size=p.d)
            selected = noisy <= tau / privacy.eps_bar
            total += sampling_twice_dp_upper(p, n, privacy, selected)
    return total / draws


# =============================================================================
# POISSON / LAPLACE ORACLES
# =============================================================================


def poisson_kl(m: float, k: float) -> float:
    """KL(Poi(k) || Poi(m)) = m - k + k ln(k/m)."""
    if not (m > 0 and k > 0):
        raise ConditionViolatedError("m > 0 and k > 0", f"m={m}, k={k}")
    return m - k + k * math.log(k / m)


def poisson_laplace_tail_upper(a: float, b: float, c: float) -> Tuple[float, float]:
    """
    Tail bounds for x + z with x ~ Poi(a), z ~ Lap(0, b):

        Pr[x + z <= c] <= 4/3 exp((-a/3 + c/2) / max(b, 1))
        Pr[x + z >= c] <= 4/3 exp(((a - c)/2) / max(b, 1))
    """
    if not (a > 0 and c > 0 and b >= 0):
        raise ConditionViolatedError("a > 0, c > 0, b ≥ 0", f"a={a}, b={b}, c={c}")
    scale = max(b, 1.0)
    lower_tail = 4.0 / 3.0 * math.exp((-a / 3.0 + c / 2.0) / scale)
    upper_tail = 4.0 / 3.0 * math.exp(((a - c) / 2.0) / scale)
    return lower_tail, upper_tail


def inverse_poisson_mean(mean: float) -> float:
    """Exact E[1 / (Poi(m) + 1)] = (1 - e^-m) / m, which is at most 1/m."""
    if mean < 0:
        raise ConditionViolatedError("m ≥ 0", f"m={mean}")
    if mean == 0:
        return 1.0
    return -math.expm1(-mean) / mean
