"""
Tail Risk Index toolkit

Quantifies tail risk with Value at Risk, Expected Shortfall, Flexible
Expected Shortfall, the θ-index and PELVaR, for parametric loss models and
empirical samples. Includes Euler allocation of every measure across
portfolio components, copula Monte Carlo stress tests of subadditivity and
rolling-window VaR backtests on insurance claims data.
"""

__version__ = "1.0.0"
__author__ = "Tail Risk Index Project"

from .allocation import AllocationReport, PortfolioSample, allocate
from .claims import BacktestConfig, ClaimsTable, describe, load_claims, predict_var, tune_windows
from .copulas import CopulaSpec, ScenarioConfig, run_allocation_scenario, run_stress, sample_copula
from .distributions import LossModel, build_model, parse_model_spec
from .empirical import Sample, empirical_es, empirical_quantile, empirical_theta, kernel_theta
from .exceptions import ComputationError, RiskDomainError, TailRiskError
from .measures import assess, fes, fes_maximizer, pelvar, solve_p_theta, theta_index, theta_order_holds
from .reporter import generate_report, save_results

__all__ = [
    "AllocationReport",
    "BacktestConfig",
    "ClaimsTable",
    "ComputationError",
    "CopulaSpec",
    "LossModel",
    "PortfolioSample",
    "RiskDomainError",
    "Sample",
    "ScenarioConfig",
    "TailRiskError",
    "allocate",
    "assess",
    "build_model",
    "describe",
    "empirical_es",
    "empirical_quantile",
    "empirical_theta",
    "fes",
    "fes_maximizer",
    "generate_report",
    "kernel_theta",
    "load_claims",
    "parse_model_spec",
    "pelvar",
    "predict_var",
    "run_allocation_scenario",
    "run_stress",
    "sample_copula",
    "save_results",
    "solve_p_theta",
    "theta_index",
    "theta_order_holds",
    "tune_windows",
]
