import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from instance_kl.core import (
    DimensionMismatchError,
    EmptyHoldoutError,
    EstimatorConfig,
    Histogram,
    IncompatibleLossError,
    PrivacyParams,
    normalize,
    validate_prob_vector,
)
from instance_kl.data_io import DataSource, power_law, uniform
from instance_kl.estimators import EstimatorKind
from instance_kl.evaluation import (
    LossKind,
    SamplingScheme,
    TrialStats,
    entropy,
    kl_divergence,
    nll,
    run_trials,
)
from instance_kl.sampling import NoiseMode, NoiseSource, sample_multinomial_histogram

positive_weights = st.lists(st.floats(0.01, 100.0), min_size=2, max_size=30)


class TestLosses:

    def test_kl_examples(self):
        p = validate_prob_vector([0.5, 0.5])
        assert kl_divergence(p, p) == 0.0
        assert kl_divergence(p, validate_prob_vector([0.25, 0.75])) == pytest.approx(0.5 * math.log(4 / 3))
        assert kl_divergence(validate_prob_vector([1.0, 0.0]), validate_prob_vector([0.0, 1.0])) == math.inf

    def test_kl_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            kl_divergence(uniform(2), uniform(3))

    @given(positive_weights, st.randoms(use_true_random=False))
    def test_kl_nonnegative(self, weights, random):
        p = normalize(weights)
        shuffled = list(weights)
        random.shuffle(shuffled)
        assert kl_divergence(p, normalize(shuffled)) >= -1e-12

    def test_nll_examples(self):
        assert nll(uniform(4), Histogram.from_counts([3, 0, 1, 9])) == pytest.approx(math.log(4))
        q = validate_prob_vector([0.8, 0.2])
        assert nll(q, Histogram.from_counts([3, 1])) == pytest.approx(-(0.75 * math.log(0.8) + 0.25 * math.log(0.2)))
        assert nll(validate_prob_vector([1.0, 0.0]), Histogram.from_counts([0, 2])) == math.inf

    def test_nll_empty_holdout(self):
        with pytest.raises(EmptyHoldoutError):
            nll(uniform(2), Histogram.from_counts([0, 0]))

    def test_entropy(self):
        assert entropy(uniform(8)) == pytest.approx(math.log(8))
        assert entropy(validate_prob_vector([1.0, 0.0])) == 0.0

    def test_nll_is_entropy_plus_kl(self):
        p = validate_prob_vector([0.4, 0.3, 0.15, 0.1, 0.05])
        q = validate_prob_vector([0.1, 0.3, 0.2, 0.2, 0.2])
        rng = NoiseSource(17)
        values = np.array([nll(q, sample_multinomial_histogram(p, 50, rng)) for _ in range(10_000)])
        se = values.std() / math.sqrt(values.size)
        assert abs(values.mean() - (entropy(p) + kl_divergence(p, q))) <= 3 * se


class TestTrialStats:

    def test_population_std(self):
        stats = TrialStats.from_values([1.0, 3.0], LossKind.KL)
        assert stats.mean == 2.0
        assert stats.std == 1.0
        assert stats.trials == 2

    def test_infinity_propagates(self):
        stats = TrialStats.from_values([0.1, math.inf], LossKind.KL)
        assert stats.mean == math.inf
        assert stats.std == math.inf


class TestRunTrials:

    def test_single_zero_noise_trial(self):
        source = DataSource.synthetic(validate_prob_vector([0.5, 0.5]), "half")
        stats = run_trials(source, EstimatorKind.ADD_CONSTANT, EstimatorConfig(), None, 100, 1, 0,
                           mode=NoiseMode.ZERO_NOISE)
        assert stats.trials == 1
        assert stats.std == 0.0
        assert stats.mean == pytest.approx(0.0, abs=1e-15)

    def test_reproducible(self):
        source = DataSource.synthetic(power_law(200, 1.0), "pl")
        privacy = PrivacyParams(1.0)
        runs = [run_trials(source, EstimatorKind.SAMPLING_TWICE_DP, EstimatorConfig(alpha=0.9, tau=3.0),
                           privacy, 500, 8, 42) for _ in range(2)]
        assert runs[0] == runs[1]

    def test_worker_count_does_not_matter(self):
        source = DataSource.synthetic(power_law(200, 1.5), "pl")
        serial = run_trials(source, EstimatorKind.SAMPLING_TWICE, EstimatorConfig(), None, 300, 12, 9)
        pooled = run_trials(source, EstimatorKind.SAMPLING_TWICE, EstimatorConfig(), None, 300, 12, 9,
                            workers=4)
        assert serial.values == pooled.values

    def test_seed_changes_values(self):
        source = DataSource.synthetic(power_law(200, 1.5), "pl")
        a = run_trials(source, EstimatorKind.GOOD_TURING, EstimatorConfig(), None, 300, 5, 1)
        b = run_trials(source, EstimatorKind.GOOD_TURING, EstimatorConfig(), None, 300, 5, 2)
        assert a.values != b.values

    def test_large_n_add_constant(self):
        source = DataSource.synthetic(uniform(2), "u2")
        stats = run_trials(source, EstimatorKind.ADD_CONSTANT, EstimatorConfig(), None, 10_000, 50, 3)
        assert stats.mean <= math.log(1 + 2 / 10_000) + 3 * stats.std / math.sqrt(50)

    def test_multinomial_scheme(self):
        source = DataSource.synthetic(uniform(20), "u20")
        stats = run_trials(source, EstimatorKind.SAMPLING_TWICE, EstimatorConfig(), None, 200, 5, 0,
                           sampling=SamplingScheme.MULTINOMIAL)
        assert np.isfinite(stats.mean)

    def test_incompatible_losses(self):
        synthetic = DataSource.synthetic(uniform(3), "u3")
        empirical = DataSource.empirical(Histogram.from_counts([5, 1, 0]), "corpus")
        with pytest.raises(IncompatibleLossError):
            run_trials(synthetic, EstimatorKind.ADD_CONSTANT, EstimatorConfig(), None, 10, 2, 0, loss=LossKind.NLL)
        with pytest.raises(IncompatibleLossError):
            run_trials(empirical, EstimatorKind.ADD_CONSTANT, EstimatorConfig(), None, 10, 2, 0, loss=LossKind.KL)

    def test_empirical_nll(self):
        counts = Histogram.from_counts(np.arange(1, 101) * 20)
        source = DataSource.empirical(counts, "corpus")
        stats = run_trials(source, EstimatorKind.ADD_CONSTANT, EstimatorConfig(), None, 5_000, 4, 0,
                           loss=LossKind.NLL)
        assert stats.loss_kind is LossKind.NLL
        assert np.isfinite(stats.mean)
        assert stats.mean >= entropy(normalize(counts.counts)) - 0.05

    def test_empirical_zero_noise_split(self):
        source = DataSource.empirical(Histogram.from_counts([8, 4]), "tiny")
        stats = run_trials(source, EstimatorKind.ADD_CONSTANT, EstimatorConfig(), None, 100, 1, 0,
                           loss=LossKind.NLL, mode=NoiseMode.ZERO_NOISE)
        # train = holdout = [4, 2]; add-one estimate [5/8, 3/8]
        expected = -(4 / 6 * math.log(5 / 8) + 2 / 6 * math.log(3 / 8))
        assert stats.values == pytest.approx((expected,))
