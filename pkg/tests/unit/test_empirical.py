"""Unit tests for the sample-based estimators."""

import math

import numpy as np
import pytest

from tail_risk_index.distributions import Exponential, Normal
from tail_risk_index.empirical import (
    KernelConfig,
    Sample,
    consistency_probe,
    empirical_dx_bound,
    empirical_es,
    empirical_quantile,
    empirical_theta,
    kernel_theta,
    kernel_weights,
    order_index,
    silverman_bandwidth,
    smoothed_theta_curve,
    theta_anchor_grid,
    theta_anchors,
)
from tail_risk_index.exceptions import ComputationError, RiskDomainError


@pytest.fixture
def one_to_ten() -> Sample:
    return Sample(np.arange(10, 0, -1, dtype=float))


class TestSample:
    """Test sample construction and validation."""

    def test_values_are_read_only(self, one_to_ten):
        """Test a sample cannot be mutated after construction."""
        with pytest.raises(ValueError):
            one_to_ten.values[0] = 0.0

    def test_mean_and_size(self, one_to_ten):
        """Test basic summaries."""
        assert one_to_ten.n == len(one_to_ten) == 10
        assert one_to_ten.mean == pytest.approx(5.5)

    @pytest.mark.parametrize(
        "values,message",
        [
            ([1.0], "at least 2"),
            ([1.0, float("nan")], "non-finite"),
            ([[1.0, 2.0], [3.0, 4.0]], "one-dimensional"),
            (["a", "b"], "numeric"),
        ],
    )
    def test_invalid_samples(self, values, message):
        """Test malformed samples are rejected."""
        with pytest.raises(RiskDomainError, match=message):
            Sample(values)


class TestOrderStatistics:
    """Test the upper empirical quantile and exceedance mean."""

    def test_order_index_rule(self):
        """Test ⌈np⌉ with clipping to [1, n]."""
        assert order_index(10, 0.9) == 9
        assert order_index(10, 0.91) == 10
        assert order_index(10, 0.01) == 1
        assert order_index(100, 0.95) == 95

    def test_quantiles(self, one_to_ten):
        """Test the quantile picks the ⌈np⌉-th smallest observation."""
        assert empirical_quantile(one_to_ten, 0.9) == 9.0
        assert empirical_quantile(one_to_ten, 0.5) == 5.0
        assert empirical_quantile(one_to_ten, 0.95) == 10.0

    def test_es_uses_strict_exceedances(self, one_to_ten):
        """Test ES averages the observations strictly above the quantile."""
        assert empirical_es(one_to_ten, 0.8) == pytest.approx(9.5)

    def test_es_with_ties_excludes_quantile(self):
        """Test tied observations at the quantile are not in the tail."""
        sample = Sample([1.0, 2.0, 3.0, 3.0, 3.0, 7.0])
        assert empirical_quantile(sample, 0.5) == 3.0
        assert empirical_es(sample, 0.5) == pytest.approx(7.0)

    def test_es_without_exceedances_raises(self, one_to_ten):
        """Test the top order statistic leaves no tail."""
        with pytest.raises(RiskDomainError, match="no observation lies strictly above"):
            empirical_es(one_to_ten, 0.95)

    def test_domain_bound(self, one_to_ten):
        """Test F̂(X̄) counts observations not above the mean."""
        assert empirical_dx_bound(one_to_ten) == pytest.approx(0.5)


class TestEmpiricalTheta:
    """Test the plug-in θ-index."""

    def test_small_sample_value(self, one_to_ten):
        """Test (1-p)(ÊS - x̂)/(x̂ - X̄) on 1..10."""
        assert empirical_theta(one_to_ten, 0.8) == pytest.approx(0.12)

    def test_quantile_below_mean_raises(self, one_to_ten):
        """Test θ is undefined when the quantile does not exceed the mean."""
        with pytest.raises(RiskDomainError, match="does not exceed the sample mean") as info:
            empirical_theta(one_to_ten, 0.5)
        assert info.value.bound == pytest.approx(0.5)

    def test_close_to_closed_form(self, exponential_sample):
        """Test a 20 000 draw estimate is close to the exponential value."""
        truth = Exponential(lam=0.01).theta_closed(0.95)
        assert empirical_theta(exponential_sample, 0.95) == pytest.approx(truth, abs=0.004)


class TestKernelSmoothing:
    """Test the Nadaraya-Watson smoother."""

    def test_silverman_rule(self):
        """Test 0.9 min(sd, IQR/1.34) m^(-1/5) on 1..5."""
        assert silverman_bandwidth(np.array([1.0, 2.0, 3.0, 4.0, 5.0])) == pytest.approx(0.973585, rel=1e-5)

    def test_silverman_without_spread_raises(self):
        """Test a constant grid has no bandwidth."""
        with pytest.raises(RiskDomainError, match="without spread"):
            silverman_bandwidth(np.array([0.9, 0.9, 0.9]))

    def test_weights_are_normalized(self):
        """Test kernel weights sum to one and peak at the closest anchor."""
        weights = kernel_weights(np.array([0.9, 0.95, 0.99]), 0.95, 0.02)
        assert weights.sum() == pytest.approx(1.0)
        assert int(np.argmax(weights)) == 1

    def test_vanishing_weights_raise(self):
        """Test an absurdly small bandwidth is reported."""
        with pytest.raises(ComputationError, match="kernel weights vanished"):
            kernel_weights(np.array([0.1, 0.2]), 0.9, 1e-6)

    def test_constant_estimates_reproduced(self):
        """Test smoothing a constant curve returns the constant."""
        estimates = [(0.9, 0.05), (0.95, 0.05), (0.99, 0.05)]
        assert kernel_theta(estimates, 0.93) == pytest.approx(0.05)

    def test_query_outside_anchor_range(self):
        """Test queries are restricted to the anchor range."""
        with pytest.raises(RiskDomainError, match="outside the anchor range"):
            kernel_theta([(0.9, 0.1), (0.95, 0.05)], 0.99)

    def test_too_few_anchors(self):
        """Test one anchor cannot be smoothed."""
        with pytest.raises(RiskDomainError, match="at least 2 anchor"):
            kernel_theta([(0.9, 0.1)], 0.9)

    def test_explicit_bandwidth(self):
        """Test an explicit bandwidth overrides Silverman's rule."""
        estimates = [(0.9, 0.2), (0.95, 0.1)]
        wide = kernel_theta(estimates, 0.9, KernelConfig(bandwidth=10.0))
        assert wide == pytest.approx(0.15, abs=1e-4)

    def test_unknown_kernel(self):
        """Test only the Gaussian kernel is available."""
        with pytest.raises(RiskDomainError, match="unsupported kernel"):
            KernelConfig(kernel="epanechnikov")

    def test_anchor_grid_starts_above_bound(self, exponential_sample):
        """Test anchors start just above the empirical D_X bound."""
        grid = theta_anchor_grid(exponential_sample)
        assert grid[0] == pytest.approx(empirical_dx_bound(exponential_sample) + 0.01)
        assert grid[-1] == pytest.approx(0.999)
        assert len(theta_anchors(exponential_sample)) == len(grid)

    def test_smoothed_curve(self, exponential_sample):
        """Test the smoothed curve tracks the closed form and leaves out-of-range levels empty."""
        curve = dict(smoothed_theta_curve(exponential_sample, [0.5, 0.9, 0.95]))
        assert curve[0.5] is None
        truth = Exponential(lam=0.01).theta_closed(0.9)
        assert curve[0.9] == pytest.approx(truth, abs=0.03)
        assert curve[0.9] > curve[0.95] > 0.0


class TestConsistencyProbe:
    """Test the Monte Carlo error curve."""

    def test_error_shrinks_with_size(self):
        """Test the mean absolute error decreases from 100 to 10 000 draws."""
        curve = consistency_probe(Exponential(lam=0.01), 0.95, [100, 1_000, 10_000], seed=3, replications=20)
        assert curve.sizes == [100, 1_000, 10_000]
        assert curve.true_theta == pytest.approx(Exponential(lam=0.01).theta_closed(0.95))
        assert curve.is_nonincreasing()
        assert curve.mae[-1] < 0.01

    def test_reproducible(self):
        """Test a probe is reproducible from its seed."""
        first = consistency_probe(Normal(), 0.9, [200], seed=8, replications=5)
        second = consistency_probe(Normal(), 0.9, [200], seed=8, replications=5)
        assert first.mae == second.mae

    def test_level_outside_domain(self):
        """Test the closed form must exist at the probe level."""
        with pytest.raises(RiskDomainError):
            consistency_probe(Normal(), 0.4, [100], seed=1)

    @pytest.mark.slow
    def test_acceptance_scale(self):
        """Test the error falls below 0.002 for 100 000 exponential draws."""
        curve = consistency_probe(Exponential(lam=1.0), 0.95, [1_000, 10_000, 100_000], seed=42, replications=50)
        assert curve.is_nonincreasing()
        assert curve.mae[-1] < 0.002
        assert math.isfinite(curve.mae[0])
