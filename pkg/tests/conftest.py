"""Pytest configuration and shared fixtures for tail-risk-index tests."""

import os
import tempfile
from pathlib import Path

import numpy as np
import pytest

from tail_risk_index.allocation import PortfolioSample
from tail_risk_index.claims import ClaimsTable
from tail_risk_index.copulas import CopulaSpec, sample_copula
from tail_risk_index.distributions import Exponential, LogNormal, Normal, ParetoII, StudentT
from tail_risk_index.empirical import Sample
from tail_risk_index.rng import stream

from tests.fixtures.mock_data import ClaimsDataGenerator

TEST_DATA_DIR = Path(__file__).parent / "fixtures"
NORWEGIAN_CSV_ENV = "TAIL_RISK_NORWEGIAN_CSV"


@pytest.fixture
def exponential_model() -> Exponential:
    """Exponential loss with mean 100."""
    return Exponential(lam=0.01)


@pytest.fixture
def analytic_models():
    """One representative model per family with a closed-form θ-index."""
    return [
        Exponential(lam=0.01),
        Normal(mu=100.0, sigma=10.0),
        StudentT(nu=4.0, loc=100.0, scale=10.0),
        LogNormal(mu=0.0, sigma=0.5),
        ParetoII(alpha=4.0, kappa=300.0),
    ]


@pytest.fixture
def exponential_sample() -> Sample:
    """20 000 Exponential(0.01) draws from a fixed stream."""
    return Sample(Exponential(lam=0.01).rvs(20_000, stream(2024, 0)))


@pytest.fixture
def scenario_a_marginals():
    return (
        Normal(mu=100.0, sigma=10.0),
        StudentT(nu=4.0, loc=100.0, scale=10.0),
        Exponential(lam=0.01),
    )


@pytest.fixture
def portfolio_sample(scenario_a_marginals) -> PortfolioSample:
    """20 000 Gaussian-copula scenarios (r=0.5) of the normal / t / exponential mix."""
    return sample_copula(
        CopulaSpec.gaussian(0.5),
        scenario_a_marginals,
        n=20_000,
        seed=7,
        labels=("normal", "student_t4", "exponential"),
    )


@pytest.fixture
def random_portfolio() -> PortfolioSample:
    """Independent lognormal components with different scales."""
    rng = stream(99, 5)
    scenarios = np.column_stack(
        [
            rng.lognormal(mean=0.0, sigma=0.4, size=5_000) * 50,
            rng.lognormal(mean=0.0, sigma=0.8, size=5_000) * 30,
            rng.gamma(shape=2.0, scale=40.0, size=5_000),
        ]
    )
    return PortfolioSample(scenarios)


@pytest.fixture
def stationary_claims() -> ClaimsTable:
    """Ten years of 2 000 Exponential(0.01) claims each."""
    return ClaimsDataGenerator.stationary_panel(years=10, claims_per_year=2_000)


@pytest.fixture
def claims_csv(tmp_path) -> Path:
    """Five years of 300 claims written with a header row."""
    years, amounts = ClaimsDataGenerator.stationary_records(years=5, claims_per_year=300)
    return ClaimsDataGenerator.write_csv(tmp_path / "claims.csv", years, amounts)


@pytest.fixture
def temp_output_dir() -> Path:
    """Create a temporary directory for test outputs."""
    with tempfile.TemporaryDirectory() as temp_dir:
        yield Path(temp_dir)


@pytest.fixture
def norwegian_claims_path() -> Path:
    """User-supplied Norwegian fire claims CSV; skips when absent."""
    value = os.environ.get(NORWEGIAN_CSV_ENV)
    if not value or not Path(value).is_file():
        pytest.skip(f"set {NORWEGIAN_CSV_ENV} to the Norwegian fire claims CSV to run real-data checks")
    return Path(value)
