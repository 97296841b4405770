import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairweight.biasgen import bias_score, generate
from fairweight.classifier import TrainConfig, predict_label, predict_proba, train_weighted
from fairweight.constraints import FairnessNotion, constraint_set, max_abs_violation
from fairweight.data import LabeledDataset
from fairweight.reweighting import (
    Multipliers,
    ReweighConfig,
    WeightAssignment,
    assignment_weights,
    example_weight,
    example_weight_eqodds,
    fit,
    sampling_mask,
    update_multipliers,
)

lam_vectors = st.lists(
    st.floats(min_value=-10, max_value=10, allow_nan=False), min_size=1, max_size=4
)


class TestExampleWeight:
    def test_zero_multipliers_give_half(self):
        assert example_weight([0.0], [1], 1) == 0.5
        assert example_weight([0.0], [0], 0) == 0.5

    def test_log_three_member(self):
        lam = [math.log(3.0)]
        assert abs(example_weight(lam, [1], 1) - 0.75) < 1e-15
        assert abs(example_weight(lam, [1], 0) - 0.25) < 1e-15

    def test_two_member_groups(self):
        lam = [math.log(2.0), math.log(2.0)]
        assert abs(example_weight(lam, [1, 1], 1) - 0.8) < 1e-15

    @given(lam=lam_vectors, bits=st.integers(min_value=0, max_value=15))
    @settings(max_examples=200, deadline=None)
    def test_complementarity_is_exact(self, lam, bits):
        membership = [(bits >> i) & 1 for i in range(len(lam))]
        total = example_weight(lam, membership, 1) + example_weight(lam, membership, 0)
        assert total == 1.0

    @given(
        lam=lam_vectors,
        index=st.integers(min_value=0, max_value=3),
        bump=st.floats(min_value=1e-6, max_value=2.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_raising_a_multiplier_moves_member_weights(self, lam, index, bump):
        index = index % len(lam)
        membership = [0] * len(lam)
        membership[index] = 1
        bumped = list(lam)
        bumped[index] += bump
        assert example_weight(bumped, membership, 1) > example_weight(lam, membership, 1)
        assert example_weight(bumped, membership, 0) < example_weight(lam, membership, 0)

    def test_overflow_clamp_keeps_weights_inside_unit_interval(self):
        w = example_weight([1e6], [1], 1)
        assert 0.0 < w < 1.0
        assert example_weight([-1e6], [1], 1) > 0.0


class TestExampleWeightEqOdds:
    def test_zero_multipliers_give_half(self):
        lam = Multipliers.zeros(2, equalized_odds=True)
        assert example_weight_eqodds(lam, [1, 0], 1) == 0.5
        assert example_weight_eqodds(lam, [1, 0], 0) == 0.5

    def test_positive_examples_read_only_the_tp_block(self):
        for fp_value in (-5.0, 0.0, 7.0):
            lam = Multipliers(lam=np.array([math.log(3.0)]), lam_fp=np.array([fp_value]))
            assert abs(example_weight_eqodds(lam, [1], 1) - 0.75) < 1e-15

    def test_fp_exponent_is_negated(self):
        lam = Multipliers(lam=np.zeros(1), lam_fp=np.array([math.log(3.0)]))
        # wt = exp(-log 3) = 1/3 -> weight (1/3) / (1 + 1/3)
        assert abs(example_weight_eqodds(lam, [1], 0) - 0.25) < 1e-15

    def test_requires_paired_block(self):
        with pytest.raises(ValueError, match="paired"):
            example_weight_eqodds(Multipliers(lam=np.zeros(1)), [1], 0)


class TestUpdateMultipliers:
    def test_scalar_step(self):
        lam = update_multipliers(Multipliers(lam=np.array([0.5])), np.array([0.2]), eta=1.0)
        assert abs(lam.lam[0] - 0.3) < 1e-15

    def test_zero_violation_is_a_fixed_point(self):
        lam = Multipliers(lam=np.array([0.4, -0.2]))
        after = update_multipliers(lam, np.zeros(2), eta=1.0)
        np.testing.assert_array_equal(after.lam, lam.lam)

    def test_elementwise_vector_step(self):
        lam = update_multipliers(
            Multipliers(lam=np.array([0.0, 1.0])), np.array([-0.4, 0.2]), eta=0.5
        )
        np.testing.assert_allclose(lam.lam, [0.2, 0.9], atol=1e-15)

    def test_equalized_odds_blocks_update_independently(self):
        lam = Multipliers(lam=np.array([1.0]), lam_fp=np.array([2.0]))
        after = update_multipliers(lam, np.array([0.5, -0.5]), eta=1.0)
        assert after.lam[0] == 0.5
        assert after.lam_fp[0] == 2.5

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError, match="length"):
            update_multipliers(Multipliers(lam=np.zeros(2)), np.zeros(3), eta=1.0)


class TestDebiasIdentity:
    def test_weight_times_bias_recovers_true_score(self):
        rng = np.random.default_rng(99)
        for _ in range(1000):
            k = rng.integers(1, 4)
            lam = rng.uniform(-3.0, 3.0, size=k)
            membership = (rng.random(k) < 0.5).astype(int)
            true_score = rng.random()
            # indicator-form constraint (c1 = 1) matches the weight exponent
            biased = bias_score(true_score, lam, membership, c1=1.0)
            w1 = example_weight(lam, membership, 1)
            w0 = example_weight(lam, membership, 0)
            recovered = w1 * biased / (w1 * biased + w0 * (1.0 - biased))
            assert abs(recovered - true_score) < 1e-12


class TestAssignmentWeights:
    def test_matches_scalar_weights(self):
        task = generate(n=200, d=2, group_fraction=0.4, lambda_star=[0.7, -0.3], seed=5)
        lam = Multipliers(lam=np.array([0.9, -1.1]))
        weights = assignment_weights(lam, task.dataset).weights
        for i in range(0, 200, 17):
            expected = example_weight(lam, task.dataset.groups[i], task.dataset.labels[i])
            assert weights[i] == expected

    def test_weights_strictly_inside_unit_interval(self):
        with pytest.raises(ValueError, match="strictly inside"):
            WeightAssignment(weights=np.array([0.5, 1.0]))
        with pytest.raises(ValueError, match="strictly inside"):
            WeightAssignment(weights=np.array([0.0, 0.5]))


class TestFit:
    def test_zero_loops_returns_unconstrained_model(self):
        task = generate(n=400, d=3, group_fraction=0.5, lambda_star=[1.0], seed=3)
        ds = task.dataset
        cs = constraint_set(FairnessNotion.DEMOGRAPHIC_PARITY, ds)
        tcfg = TrainConfig(max_iterations=300)
        result = fit(ds, cs, ReweighConfig(eta=1.0, loops=0), tcfg)
        expected = train_weighted(ds, np.ones(ds.n), tcfg)
        assert (result.model.coefficients == expected.coefficients).all()
        assert result.model.intercept == expected.intercept
        np.testing.assert_array_equal(result.multipliers.lam, np.zeros(1))
        assert len(result.trace) == 1

    def test_symmetric_dataset_is_a_fixed_point(self):
        # paired rows share features and labels, differing only in membership,
        # so every model has exactly balanced positive rates
        rng = np.random.default_rng(31)
        base_features = rng.standard_normal((20, 2))
        base_labels = (rng.random(20) < 0.5).astype(np.int64)
        base_labels[:2] = [0, 1]
        features = np.repeat(base_features, 2, axis=0)
        labels = np.repeat(base_labels, 2)
        groups = np.tile([[1], [0]], (20, 1))
        ds = LabeledDataset(features=features, labels=labels, groups=groups)
        cs = constraint_set(FairnessNotion.DEMOGRAPHIC_PARITY, ds)
        result = fit(ds, cs, ReweighConfig(eta=1.0, loops=100), TrainConfig(max_iterations=100))
        assert np.abs(result.multipliers.lam).max() < 1e-12
        weights = assignment_weights(result.multipliers, ds).weights
        assert np.abs(weights - 0.5).max() < 1e-12

    def test_fit_reduces_violation_on_biased_synthetic_data(self):
        task = generate(n=10000, d=3, group_fraction=0.5, lambda_star=[1.0], seed=13)
        ds = task.dataset
        cs = constraint_set(FairnessNotion.DEMOGRAPHIC_PARITY, ds)
        tcfg = TrainConfig(max_iterations=200)
        result = fit(ds, cs, ReweighConfig(eta=1.0, loops=100), tcfg)

        unconstrained = train_weighted(ds, np.ones(ds.n), tcfg)
        fitted_violation = max_abs_violation(
            cs, ds, predict_label(result.model, ds.features).astype(float)
        )
        unconstrained_violation = max_abs_violation(
            cs, ds, predict_label(unconstrained, ds.features).astype(float)
        )
        assert fitted_violation <= 0.02
        assert fitted_violation < unconstrained_violation
        # trace sanity: the returned model's soft violation does not exceed
        # the unconstrained starting point's
        assert np.abs(result.trace[-1]).max() <= np.abs(result.trace[0]).max()

    def test_trace_has_one_entry_per_retrain(self):
        task = generate(n=300, d=2, group_fraction=0.5, lambda_star=[0.5], seed=7)
        cs = constraint_set(FairnessNotion.DEMOGRAPHIC_PARITY, task.dataset)
        result = fit(
            task.dataset, cs, ReweighConfig(eta=1.0, loops=5), TrainConfig(max_iterations=50)
        )
        assert len(result.trace) == 6

    def test_group_count_mismatch_rejected(self):
        task = generate(n=100, d=2, group_fraction=0.5, lambda_star=[0.5, 0.5], seed=7)
        other = generate(n=100, d=2, group_fraction=0.5, lambda_star=[0.5], seed=7)
        cs = constraint_set(FairnessNotion.DEMOGRAPHIC_PARITY, other.dataset)
        with pytest.raises(ValueError, match="group count"):
            fit(task.dataset, cs)


class TestSamplingMask:
    def test_zero_multipliers_keep_about_half(self):
        task = generate(n=100000, d=1, group_fraction=0.5, lambda_star=[0.0], seed=17)
        mask = sampling_mask(Multipliers(lam=np.zeros(1)), task.dataset, seed=4)
        assert abs(mask.mean() - 0.5) < 0.005

    def test_deterministic_given_seed(self):
        task = generate(n=1000, d=1, group_fraction=0.5, lambda_star=[0.5], seed=19)
        lam = Multipliers(lam=np.array([0.8]))
        np.testing.assert_array_equal(
            sampling_mask(lam, task.dataset, seed=3), sampling_mask(lam, task.dataset, seed=3)
        )

    def test_acceptance_rates_match_weights_within_three_sigma(self):
        task = generate(n=100000, d=1, group_fraction=0.5, lambda_star=[0.7], seed=23)
        ds = task.dataset
        lam = Multipliers(lam=np.array([math.log(3.0)]))
        mask = sampling_mask(lam, ds, seed=29)
        for g in (0, 1):
            for y in (0, 1):
                cell = (ds.groups[:, 0] == g) & (ds.labels == y)
                count = cell.sum()
                expected = example_weight(lam, [g], y)
                stderr = math.sqrt(expected * (1.0 - expected) / count)
                assert abs(mask[cell].mean() - expected) <= 3.0 * stderr

    def test_rejects_equalized_odds_multipliers(self):
        task = generate(n=100, d=1, group_fraction=0.5, lambda_star=[0.0], seed=2)
        lam = Multipliers.zeros(1, equalized_odds=True)
        with pytest.raises(ValueError, match="single-block"):
            sampling_mask(lam, task.dataset, seed=1)
