"""Unit tests for Euler allocation of the tail measures."""

import json
import math

import numpy as np
import pytest

from tail_risk_index.allocation import (
    PortfolioSample,
    allocate,
    es_contribution,
    fes_contribution,
    marginal_theta,
    pelvar_contribution,
    theta_contribution,
    var_contribution_kernel,
    var_contribution_linear,
)
from tail_risk_index.empirical import empirical_es, empirical_quantile, empirical_theta
from tail_risk_index.exceptions import RiskDomainError
from tail_risk_index.rng import stream


class TestPortfolioSample:
    """Test construction of joint scenario matrices."""

    def test_default_labels_and_aggregate(self, random_portfolio):
        """Test labels default to X1..Xd and the aggregate is the row sum."""
        assert random_portfolio.labels == ("X1", "X2", "X3")
        assert random_portfolio.dim == 3
        np.testing.assert_allclose(random_portfolio.aggregate, random_portfolio.scenarios.sum(axis=1))

    def test_too_few_scenarios(self):
        """Test a minimum number of scenarios is required."""
        with pytest.raises(RiskDomainError, match="at least 100 scenarios"):
            PortfolioSample(np.ones((50, 2)))

    def test_non_finite_losses(self):
        """Test NaN scenarios are rejected."""
        matrix = np.ones((200, 2))
        matrix[3, 1] = np.nan
        with pytest.raises(RiskDomainError, match="non-finite"):
            PortfolioSample(matrix)

    def test_label_count_mismatch(self):
        """Test one label per component is required."""
        with pytest.raises(RiskDomainError, match="got 1 labels for 2 components"):
            PortfolioSample(np.ones((200, 2)), labels=("only",))

    def test_scenarios_are_read_only(self, random_portfolio):
        """Test the scenario matrix is frozen."""
        with pytest.raises(ValueError):
            random_portfolio.scenarios[0, 0] = 1.0


class TestFullAllocation:
    """Test that contributions add up to the aggregate measures."""

    @pytest.mark.parametrize("p", [0.9, 0.95, 0.99])
    def test_es_contributions_sum_to_es(self, portfolio_sample, p):
        """Test tail-conditional means add up to the empirical ES."""
        parts = es_contribution(portfolio_sample, p)
        assert parts.sum() == pytest.approx(empirical_es(portfolio_sample.aggregate_sample, p), rel=1e-10)

    @pytest.mark.parametrize("p", [0.9, 0.95, 0.99])
    def test_linear_var_contributions_sum_to_var(self, portfolio_sample, p):
        """Test the covariance scheme allocates VaR exactly."""
        parts = var_contribution_linear(portfolio_sample, p)
        assert parts.sum() == pytest.approx(empirical_quantile(portfolio_sample.aggregate_sample, p), rel=1e-10)

    @pytest.mark.parametrize("scheme", ["linear", "kernel"])
    def test_theta_contributions_sum_to_zero(self, portfolio_sample, scheme):
        """Test θ contributions cancel out."""
        parts = theta_contribution(portfolio_sample, 0.95, var_scheme=scheme, seed=1)
        assert parts.sum() == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("scheme", ["linear", "kernel"])
    def test_pelvar_contributions_sum_to_pelvar(self, portfolio_sample, scheme):
        """Test PELVaR contributions add up to PELVaR, the empirical VaR."""
        parts = pelvar_contribution(portfolio_sample, 0.95, var_scheme=scheme, seed=1)
        var = empirical_quantile(portfolio_sample.aggregate_sample, 0.95)
        assert parts.sum() == pytest.approx(var, rel=1e-10)

    def test_linear_pelvar_equals_linear_var(self, portfolio_sample):
        """Test PELVaR and VaR contributions coincide under the covariance scheme."""
        pel = pelvar_contribution(portfolio_sample, 0.95, var_scheme="linear")
        var = var_contribution_linear(portfolio_sample, 0.95)
        np.testing.assert_allclose(pel, var, rtol=1e-9)

    def test_fes_contributions(self, portfolio_sample):
        """Test FES contributions at a fixed flexibility and at the limits."""
        sample = portfolio_sample.aggregate_sample
        parts = fes_contribution(portfolio_sample, 0.95, 0.1)
        expected = (0.05 * empirical_es(sample, 0.95) + 0.1 * sample.mean) / 0.15
        assert parts.sum() == pytest.approx(expected, rel=1e-10)
        np.testing.assert_allclose(
            fes_contribution(portfolio_sample, 0.95, 1e-12), es_contribution(portfolio_sample, 0.95), rtol=1e-9
        )
        np.testing.assert_allclose(fes_contribution(portfolio_sample, 0.95, math.inf), portfolio_sample.component_means())

    def test_fes_contributions_reject_zero_flexibility(self, portfolio_sample):
        """Test θ = 0 is outside the FES domain."""
        with pytest.raises(RiskDomainError, match="theta"):
            fes_contribution(portfolio_sample, 0.95, 0.0)
        with pytest.raises(RiskDomainError, match="flexibility"):
            allocate(portfolio_sample, 0.95, var_scheme="linear", flexibility=0.0)

    def test_too_few_tail_scenarios(self, random_portfolio):
        """Test ES contributions need enough tail scenarios."""
        with pytest.raises(RiskDomainError, match="at least 30 are needed"):
            es_contribution(random_portfolio, 0.999)


class TestAllocationInvariance:
    """Test contributions under reordering, rescaling and degenerate portfolios."""

    @pytest.fixture
    def losses(self):
        return stream(5, 3).exponential(scale=10.0, size=5_000)

    @pytest.mark.parametrize("scheme", ["linear", "kernel"])
    def test_permuting_components_permutes_contributions(self, portfolio_sample, scheme):
        """Test reordering the columns reorders every contribution the same way."""
        order = [2, 0, 1]
        labels = tuple(portfolio_sample.labels[j] for j in order)
        shuffled = PortfolioSample(portfolio_sample.scenarios[:, order], labels=labels)
        base = allocate(portfolio_sample, 0.95, var_scheme=scheme, seed=3)
        moved = allocate(shuffled, 0.95, var_scheme=scheme, seed=3)
        assert moved.labels == ("exponential", "normal", "student_t4")
        for measure in ("var", "pelvar", "es", "fes", "theta"):
            np.testing.assert_allclose(
                moved.contributions[measure], base.contributions[measure][order], rtol=1e-9, atol=1e-12, err_msg=measure
            )

    @pytest.mark.parametrize("scheme", ["linear", "kernel"])
    def test_positive_scaling(self, portfolio_sample, scheme):
        """Test monetary contributions scale with the losses and θ contributions do not."""
        factor = 3.0
        bigger = PortfolioSample(factor * portfolio_sample.scenarios, labels=portfolio_sample.labels)
        base = allocate(portfolio_sample, 0.95, var_scheme=scheme, seed=3)
        scaled_report = allocate(bigger, 0.95, var_scheme=scheme, seed=3)
        for measure in ("var", "pelvar", "es", "fes"):
            np.testing.assert_allclose(
                scaled_report.contributions[measure], factor * base.contributions[measure], rtol=1e-9, err_msg=measure
            )
        theta_parts = scaled_report.contributions["theta"]
        np.testing.assert_allclose(theta_parts, base.contributions["theta"], rtol=1e-8, atol=1e-12)
        assert scaled_report.aggregate["theta"] == pytest.approx(base.aggregate["theta"], rel=1e-10)

    def test_comonotone_pair_splits_one_to_two(self, losses):
        """Test X and 2X receive contributions in ratio 1:2."""
        ps = PortfolioSample(np.column_stack([losses, 2.0 * losses]))
        es_parts = es_contribution(ps, 0.95)
        assert es_parts[1] == pytest.approx(2.0 * es_parts[0], rel=1e-12)
        var_parts = var_contribution_linear(ps, 0.95)
        assert var_parts[1] == pytest.approx(2.0 * var_parts[0], rel=1e-12)
        theta_parts = theta_contribution(ps, 0.95, var_scheme="linear")
        np.testing.assert_allclose(theta_parts, 0.0, atol=1e-12)

    def test_constant_component(self, losses):
        """Test a riskless column gets its constant as VaR and ES contribution and no θ contribution."""
        other = stream(5, 4).gamma(shape=2.0, scale=5.0, size=losses.size)
        ps = PortfolioSample(np.column_stack([losses, other, np.full(losses.size, 5.0)]))
        assert var_contribution_linear(ps, 0.95)[2] == pytest.approx(5.0, rel=1e-12)
        assert es_contribution(ps, 0.95)[2] == pytest.approx(5.0, rel=1e-12)
        assert theta_contribution(ps, 0.95, var_scheme="linear")[2] == pytest.approx(0.0, abs=1e-12)
        report = allocate(ps, 0.95, var_scheme="linear")
        assert report.contributions["pelvar"][2] == pytest.approx(5.0, rel=1e-9)
        assert report.negative_contribution[2] is None

    def test_single_component_reduces_to_scalar_measures(self, losses):
        """Test d=1 gives back the aggregate VaR, ES, θ-index and PELVaR."""
        ps = PortfolioSample(losses)
        sample = ps.aggregate_sample
        var = empirical_quantile(sample, 0.95)
        theta = empirical_theta(sample, 0.95)
        assert es_contribution(ps, 0.95)[0] == pytest.approx(empirical_es(sample, 0.95), rel=1e-12)
        assert var_contribution_linear(ps, 0.95)[0] == pytest.approx(var, rel=1e-12)
        assert theta_contribution(ps, 0.95, var_scheme="linear")[0] == pytest.approx(0.0, abs=1e-12)
        assert pelvar_contribution(ps, 0.95, var_scheme="linear")[0] == pytest.approx(var, rel=1e-12)
        assert fes_contribution(ps, 0.95, theta)[0] == pytest.approx(var, rel=1e-12)
        report = allocate(ps, 0.95, var_scheme="linear")
        assert report.aggregate["theta"] == theta
        assert report.marginal_theta[0] == pytest.approx(theta, rel=1e-10)
        for measure, residual in report.residuals.items():
            assert residual <= 1e-12 * max(1.0, abs(report.aggregate[measure])), measure


class TestKernelVaR:
    """Test the kernel VaR contribution scheme."""

    def test_close_to_aggregate_var(self, portfolio_sample):
        """Test the kernel contributions add up to roughly the aggregate VaR."""
        result = var_contribution_kernel(portfolio_sample, 0.95, seed=4)
        var = empirical_quantile(portfolio_sample.aggregate_sample, 0.95)
        assert result.values.sum() == pytest.approx(var, rel=0.05)
        assert result.bandwidth > 0
        assert result.effective_sample_size > 30
        assert result.warnings == []

    def test_reproducible_from_seed(self, portfolio_sample):
        """Test the noise stream is keyed by the seed."""
        first = var_contribution_kernel(portfolio_sample, 0.95, seed=4)
        second = var_contribution_kernel(portfolio_sample, 0.95, seed=4)
        np.testing.assert_array_equal(first.values, second.values)
        assert first.center == second.center

    def test_narrow_bandwidth_warns(self, portfolio_sample):
        """Test a small effective sample is flagged."""
        result = var_contribution_kernel(portfolio_sample, 0.95, bandwidth=0.05, seed=4)
        assert result.effective_sample_size < 30
        assert "effective sample" in result.warnings[0]


class TestMarginalTheta:
    """Test the conditional tail index per component."""

    def test_undefined_where_var_below_mean(self):
        """Test components with VaR_j ≤ E[X_j] get NaN."""
        values = marginal_theta(np.array([5.0, 10.0]), np.array([8.0, 12.0]), np.array([4.0, 10.0]), 0.9)
        assert values[0] == pytest.approx(0.1 * 3.0 / 1.0)
        assert math.isnan(values[1])


class TestAllocationReport:
    """Test the assembled report."""

    def test_linear_report(self, portfolio_sample):
        """Test residuals, proportions and the negative-contribution criterion."""
        report = allocate(portfolio_sample, 0.95, var_scheme="linear")
        sample = portfolio_sample.aggregate_sample
        assert report.aggregate["var"] == pytest.approx(empirical_quantile(sample, 0.95))
        assert report.aggregate["pelvar"] == pytest.approx(report.aggregate["var"], rel=1e-10)
        assert report.aggregate["theta"] == pytest.approx(empirical_theta(sample, 0.95))
        for measure, residual in report.residuals.items():
            assert residual < 1e-8 * max(1.0, abs(report.aggregate[measure])), measure
        for measure, shares in report.proportions.items():
            assert shares.sum() == pytest.approx(1.0, rel=1e-10), measure
        assert report.criterion_holds
        assert report.warnings == []

    def test_exponential_component_dominates_tail(self, portfolio_sample):
        """Test the exponential carries most of the ES of the mixture."""
        report = allocate(portfolio_sample, 0.95, var_scheme="kernel", seed=2)
        es_share = dict(zip(report.labels, report.proportions["es"]))
        assert es_share["exponential"] > 0.5
        assert report.criterion_holds

    def test_flexibility_only_changes_fes(self, portfolio_sample):
        """Test an explicit flexibility leaves PELVaR untouched."""
        base = allocate(portfolio_sample, 0.95, var_scheme="linear")
        flexed = allocate(portfolio_sample, 0.95, var_scheme="linear", flexibility=0.05)
        expected = 0.5 * flexed.contributions["es"] + 0.5 * portfolio_sample.component_means()
        np.testing.assert_allclose(flexed.contributions["fes"], expected)
        np.testing.assert_allclose(flexed.contributions["pelvar"], base.contributions["pelvar"])

    def test_unknown_scheme(self, portfolio_sample):
        """Test only the linear and kernel schemes exist."""
        with pytest.raises(RiskDomainError, match="unknown VaR contribution scheme 'exact'"):
            allocate(portfolio_sample, 0.95, var_scheme="exact")

    def test_rows_and_dict(self, portfolio_sample):
        """Test tabular and JSON forms of the report."""
        report = allocate(portfolio_sample, 0.95, var_scheme="linear")
        rows = report.to_rows()
        assert [row["component"] for row in rows] == ["normal", "student_t4", "exponential", "total"]
        assert rows[-1]["var"] == report.aggregate["var"]
        assert rows[-1]["es_share"] == 1.0
        payload = report.to_dict()
        assert payload["labels"] == ["normal", "student_t4", "exponential"]
        json.dumps(payload)
