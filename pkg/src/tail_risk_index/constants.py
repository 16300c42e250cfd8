"""
Constants and reference settings for tail-risk quantification runs.
"""

import math
from typing import Dict, List, Tuple

# Probability levels reported throughout
DEFAULT_LEVELS: Tuple[float, ...] = (0.9, 0.95, 0.975, 0.99, 0.995)

# Reference grid of closed-form θ-index columns: (label, family, params)
THETA_TABLE_COLUMNS: List[Tuple[str, str, Dict[str, float]]] = [
    ("Exponential", "exponential", {"lam": 1.0}),
    ("Normal", "normal", {"mu": 0.0, "sigma": 1.0}),
    ("Uniform", "uniform", {"a": 0.0, "b": 1.0}),
    ("Student-t nu=2", "student_t", {"nu": 2.0}),
    ("Student-t nu=4", "student_t", {"nu": 4.0}),
    ("Student-t nu=20", "student_t", {"nu": 20.0}),
    ("LogNormal sigma=0.2", "lognormal", {"mu": 0.0, "sigma": 0.2}),
    ("LogNormal sigma=0.5", "lognormal", {"mu": 0.0, "sigma": 0.5}),
    ("LogNormal sigma=1", "lognormal", {"mu": 0.0, "sigma": 1.0}),
    ("Weibull alpha=0.75", "weibull", {"alpha": 0.75}),
    ("Weibull alpha=1.5", "weibull", {"alpha": 1.5}),
    ("Weibull alpha=10", "weibull", {"alpha": 10.0}),
    ("Gamma alpha=0.25", "gamma", {"alpha": 0.25}),
    ("Gamma alpha=0.5", "gamma", {"alpha": 0.5}),
    ("Gamma alpha=1.5", "gamma", {"alpha": 1.5}),
    ("Gamma alpha=20", "gamma", {"alpha": 20.0}),
    ("GEV xi=-1", "gev", {"xi": -1.0}),
    ("GEV xi=0", "gev", {"xi": 0.0}),
    ("GEV xi=0.2", "gev", {"xi": 0.2}),
    ("GEV xi=0.4", "gev", {"xi": 0.4}),
    ("Pareto II alpha=1.5", "pareto_ii", {"alpha": 1.5}),
    ("Pareto II alpha=2", "pareto_ii", {"alpha": 2.0}),
    ("Pareto II alpha=4", "pareto_ii", {"alpha": 4.0}),
    ("Pareto II alpha=10", "pareto_ii", {"alpha": 10.0}),
]

# Copula correlation by dependence intensity
DEPENDENCE_LEVELS: Dict[str, float] = {
    "low": 0.25,
    "medium": 0.5,
    "high": 0.75,
}

# Weibull(1.4) rate giving mean 100
WEIBULL_SCENARIO_RATE = math.gamma(1.0 + 1.0 / 1.4) / 100.0

# Allocation scenarios; every component has mean 100
SCENARIO_PRESETS: Dict[str, List[Tuple[str, str, Dict[str, float]]]] = {
    "a": [
        ("normal", "normal", {"mu": 100.0, "sigma": 10.0}),
        ("student_t4", "student_t", {"nu": 4.0, "loc": 100.0, "scale": 10.0}),
        ("exponential", "exponential", {"lam": 0.01}),
    ],
    "b": [
        ("normal", "normal", {"mu": 100.0, "sigma": 10.0}),
        ("exponential", "exponential", {"lam": 0.01}),
        ("weibull", "weibull", {"alpha": 1.4, "lam": WEIBULL_SCENARIO_RATE}),
    ],
    "c": [
        ("student_t4", "student_t", {"nu": 4.0, "loc": 100.0, "scale": 10.0}),
        ("exponential", "exponential", {"lam": 0.01}),
        ("pareto", "pareto_ii", {"alpha": 2.0, "kappa": 100.0}),
    ],
    "d": [
        ("exponential", "exponential", {"lam": 0.01}),
        ("weibull", "weibull", {"alpha": 1.4, "lam": WEIBULL_SCENARIO_RATE}),
        ("pareto", "pareto_ii", {"alpha": 2.0, "kappa": 100.0}),
    ],
}

DEFAULT_SCENARIO_SIZE = 100_000

# Subadditivity stress grid
STRESS_MARGINALS: List[Tuple[str, str, Dict[str, float]]] = [
    ("exponential", "exponential", {"lam": 0.01}),
    ("normal", "normal", {"mu": 100.0, "sigma": 20.0}),
    ("pareto", "pareto_ii", {"alpha": 2.0, "kappa": 100.0}),
]
STRESS_CORRELATIONS: Tuple[float, ...] = (0.75, 0.90, 0.95, 0.98)
STRESS_T_DOF = 2
STRESS_GUMBEL_XI: Tuple[float, ...] = (1.5, 2.0, 5.0, 10.0)
STRESS_SAMPLE_SIZE = 10_000
STRESS_REPETITIONS = 1_000

# Claims backtesting
DEFAULT_LAMBDA_UNDER = 2.0
MIN_CLAIMS_PER_YEAR = 50

# Column name variants accepted when a claims file has a header
CLAIMS_COLUMN_ALIASES: Dict[str, List[str]] = {
    "year": ["year", "yr", "accident_year", "period"],
    "amount": ["amount", "claim", "claims", "loss", "size", "value"],
}

# Rescaled 1981 fire-claims reference row: (records, mean, max)
NORWEGIAN_1981_REFERENCE = {
    "records": 429,
    "mean": 994.06,
    "max": 32320.69,
}

OUTPUT_FORMATS = ("csv", "json", "table")
TABLE_DECIMALS = 4
MISSING_CELL = "n/a"
