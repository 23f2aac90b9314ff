import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from instance_kl.bounds import (
    bound_report,
    default_t_dp,
    default_t_nondp,
    expected_small_set_upper,
    instance_lower_dp,
    instance_lower_nondp,
    inverse_poisson_mean,
    minimax_dp,
    minimax_nondp_lower,
    minimax_nondp_upper,
    optimality_ratio,
    poisson_kl,
    poisson_laplace_tail_upper,
    sampling_twice_dp_upper,
    sampling_twice_upper,
)
from instance_kl.core import (
    ConditionViolatedError,
    DivideByZeroError,
    PrivacyParams,
    normalize,
    validate_prob_vector,
)
from instance_kl.data_io import concentrated, uniform
from instance_kl.sampling import NoiseSource, sample_laplace


class TestMinimax:

    def test_nondp_upper(self):
        assert minimax_nondp_upper(100, 100) == pytest.approx(math.log(2))
        assert minimax_nondp_upper(100, 50) == pytest.approx(math.log(3))
        assert minimax_nondp_upper(10, 1e9) == pytest.approx(1e-8, rel=1e-6)

    def test_nondp_lower_regimes(self):
        assert minimax_nondp_lower(11, 100) == pytest.approx(0.1)
        assert minimax_nondp_lower(1001, 100) == pytest.approx(math.log(10))

    @pytest.mark.parametrize("eps, expected", [(1.0, math.log(2)), (0.1, math.log(11)), (10.0, math.log(2))])
    def test_dp(self, eps, expected):
        assert minimax_dp(100, 100, PrivacyParams(eps)) == pytest.approx(expected)

    def test_bad_inputs(self):
        with pytest.raises(ConditionViolatedError):
            minimax_nondp_upper(0, 10)


class TestInstanceLowerNonDP:

    def test_concentrated(self):
        p = concentrated(10, [1 / 3, 2 / 3])
        bound = instance_lower_nondp(p, 10, t=1)
        assert bound.small_set_size == 8
        assert bound.small_set_mass == 0.0
        assert bound.value == pytest.approx(math.log(9) / 10 + 0.2, abs=1e-12)
        assert bound.value == pytest.approx(0.4197, abs=1e-4)

    def test_uniform_has_no_small_symbols(self):
        bound = instance_lower_nondp(uniform(10), 100, t=1)
        assert bound.small_set_size == 0
        assert bound.value == pytest.approx(0.1)

    def test_point_mass(self):
        bound = instance_lower_nondp(validate_prob_vector([1.0, 0.0]), 4, t=1)
        assert bound.value == pytest.approx(math.log(2) / 4 + 0.25)

    def test_conditions(self):
        p = uniform(10)
        for kwargs, condition in [({"n": 3, "t": 1}, "n ≥ 4"), ({"n": 10, "t": 0.5}, "t ≥ 1")]:
            with pytest.raises(ConditionViolatedError) as err:
                instance_lower_nondp(p, **kwargs)
            assert err.value.condition == condition
        with pytest.raises(ConditionViolatedError):
            instance_lower_nondp(validate_prob_vector([1.0]), 10, t=1)

    def test_monotone_in_t(self, np_rng):
        for _ in range(20):
            p = normalize(np_rng.dirichlet(np.full(30, 0.3)))
            values = [instance_lower_nondp(p, 200, t).value for t in (1, 2, 4, 8)]
            assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))

    def test_below_minimax_plus_budget(self, np_rng):
        for d in (5, 20, 50):
            for n in (100, 200, 500, 1000):
                p = normalize(np_rng.dirichlet(np.ones(d)))
                budget = float(np.minimum(p.probs, 1 / n).sum())
                assert instance_lower_nondp(p, n, t=1).value <= minimax_nondp_upper(d, n) + budget

    def test_default_t(self):
        assert default_t_nondp(2) == 1.0
        assert default_t_nondp(10 ** 6) == pytest.approx(2 * math.log(math.log(10 ** 6)))
        assert default_t_dp(100) == pytest.approx(24 * math.log(100))


class TestInstanceLowerDP:

    def test_uniform(self):
        bound = instance_lower_dp(uniform(4), 100, PrivacyParams(1.0), t=1)
        assert bound.small_set_size == 0
        assert bound.value == pytest.approx(1.6e-3)

    def test_point_mass(self):
        bound = instance_lower_dp(validate_prob_vector([1.0, 0.0]), 10, PrivacyParams(0.5), t=1)
        assert bound.value == pytest.approx(0.04 + math.log(2) / 5)
        assert bound.value == pytest.approx(0.1786, abs=1e-4)

    def test_needs_n_eps_at_least_one(self):
        with pytest.raises(ConditionViolatedError) as err:
            instance_lower_dp(uniform(10), 10, PrivacyParams(0.01), t=1)
        assert err.value.condition == "n·ε ≥ 1"
        assert "n·ε ≥ 1" in str(err.value)

    def test_delta_condition(self):
        with pytest.raises(ConditionViolatedError):
            instance_lower_dp(uniform(10), 100, PrivacyParams(0.1, delta=0.5), t=1)

    def test_monotone_in_t(self, np_rng):
        privacy = PrivacyParams(0.5)
        for _ in range(20):
            p = normalize(np_rng.dirichlet(np.full(30, 0.3)))
            values = [instance_lower_dp(p, 200, privacy, t).value for t in (1, 2, 4, 8)]
            assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))


class TestReport:

    def test_fields_and_lines(self):
        report = bound_report(uniform(100), 100, PrivacyParams(1.0))
        assert report.dp_minimax == pytest.approx(math.log(2))
        lines = report.as_lines()
        assert lines[0].startswith("nondp_minimax=")
        assert "dp_minimax=0.693147181" in lines
        assert len(lines) == 10

    def test_optimality_ratio(self):
        assert optimality_ratio(0.5, 0.25) == 2.0
        assert optimality_ratio(0.0, 3.0) == 0.0
        assert optimality_ratio(0.4197, 0.4197) == 1.0
        with pytest.raises(DivideByZeroError):
            optimality_ratio(1.0, 0.0)


class TestSamplingTwiceUpper:

    def test_empty_small_set(self):
        p = uniform(4)
        value = sampling_twice_upper(p, 100, np.zeros(4, dtype=bool))
        assert value == pytest.approx(4 * 0.01)

    def test_dp_expression(self):
        p = validate_prob_vector([0.5, 0.5, 0.0])
        privacy = PrivacyParams(1.0)
        selected = np.array([False, False, True])
        value = sampling_twice_dp_upper(p, 10, privacy, selected)
        assert value == pytest.approx(0.1 + 2 * 1 / (0.5 * 100))

    def test_expected_upper_is_finite(self):
        p = concentrated(200, [0.5, 0.5])
        value = expected_small_set_upper(p, 100, 0.5, 0.0, NoiseSource(3), draws=20)
        assert 0 < value < math.log(1 + 200 / 100) + 1


class TestPoissonOracles:

    @pytest.mark.parametrize("m, k, expected", [(3.0, 3.0, 0.0), (2.0, 1.0, 1 - math.log(2)),
                                                (1.0, 2.0, -1 + 2 * math.log(2))])
    def test_poisson_kl_examples(self, m, k, expected):
        assert poisson_kl(m, k) == pytest.approx(expected, abs=1e-12)

    def test_poisson_kl_matches_pmf_sum(self):
        support = np.arange(0, 200)
        for m in np.linspace(0.5, 10, 10):
            for k in np.linspace(0.5, 10, 10):
                log_pk = stats.poisson.logpmf(support, k)
                log_pm = stats.poisson.logpmf(support, m)
                direct = float(np.sum(np.exp(log_pk) * (log_pk - log_pm)))
                assert poisson_kl(m, k) == pytest.approx(direct, abs=1e-9)

    @given(st.floats(0.01, 50), st.floats(0.01, 50))
    def test_poisson_kl_nonnegative(self, m, k):
        assert poisson_kl(m, k) >= -1e-12

    def test_tail_examples(self):
        lower, _ = poisson_laplace_tail_upper(30, 1, 3)
        assert lower == pytest.approx(4 / 3 * math.exp(-8.5))
        _, upper = poisson_laplace_tail_upper(5, 2, 5)
        assert upper == pytest.approx(4 / 3)
        _, upper = poisson_laplace_tail_upper(1, 0, 20)
        assert upper == pytest.approx(4 / 3 * math.exp(-9.5))

    def test_tail_bounds_hold(self, np_rng):
        draws = 100_000
        for seed in range(20):
            a, b, c = np_rng.uniform(1, 40), np_rng.uniform(0.5, 4), np_rng.uniform(1, 40)
            rng = NoiseSource(seed)
            total = rng.generator.poisson(a, draws) + sample_laplace(b, rng, size=draws)
            lower, upper = poisson_laplace_tail_upper(a, b, c)
            for freq, bound in ((np.mean(total <= c), lower), (np.mean(total >= c), upper)):
                se = math.sqrt(max(freq * (1 - freq), 1 / draws) / draws)
                assert freq <= bound + 3 * se

    def test_truncated_laplace_bias(self):
        draws = 100_000
        for lam, b, c in [(0.5, 1.0, 1.0), (5.0, 2.0, 0.5), (20.0, 1.0, 3.0)]:
            rng = NoiseSource(11)
            noisy = np.maximum(rng.generator.poisson(lam, draws) + sample_laplace(b, rng, size=draws), c)
            bias = noisy - lam
            se = bias.std() / math.sqrt(draws)
            assert -3 * se <= bias.mean() <= b + c + 3 * se

    def test_inverse_poisson_mean(self):
        draws = 100_000
        for m in (0.5, 3.0, 25.0):
            rng = NoiseSource(5)
            samples = 1.0 / (rng.generator.poisson(m, draws) + 1.0)
            se = samples.std() / math.sqrt(draws)
            assert abs(samples.mean() - inverse_poisson_mean(m)) <= 3 * se
            assert inverse_poisson_mean(m) <= 1 / m
        assert inverse_poisson_mean(0.0) == 1.0
