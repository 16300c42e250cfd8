"""
Copula Monte Carlo: joint scenario generation, allocation scenarios and the
subadditivity stress harness.

Samplers produce survival uniforms V = 1 - U computed directly in the upper
tail (ndtr(-Z), t-cdf of -T, -expm1(-w)) and map them through the marginal
inverse survival functions, so extreme quantiles keep full precision.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy import special as sc

from . import rng as rng_streams
from .allocation import AllocationReport, PortfolioSample, VarScheme, allocate
from .distributions import LossModel, model_to_dict
from .empirical import Sample, empirical_es, empirical_quantile, empirical_theta
from .exceptions import RiskDomainError
from .validator import require, require_count, require_levels, validate_correlation, validate_numeric_value

logger = logging.getLogger(__name__)

CopulaKind = Literal["gaussian", "t", "gumbel"]
COPULA_KINDS = ("gaussian", "t", "gumbel")

MIN_SCENARIO_SIZE = 1000
SUBADDITIVITY_SLACK = 1e-12
STRESS_MEASURES = ("var", "pelvar", "es")


@dataclass(frozen=True)
class CopulaSpec:
    """Gaussian(R), Student-t(R, ν) or Gumbel(ξ) copula in ``dim`` dimensions."""

    kind: CopulaKind
    dim: int = 3
    r: float = 0.0
    nu: int = 2
    xi: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in COPULA_KINDS:
            raise RiskDomainError(f"unknown copula '{self.kind}' (expected one of {', '.join(COPULA_KINDS)})")
        require_count(self.dim, "dim", 1)
        if self.kind in ("gaussian", "t"):
            require(validate_correlation(self.r, self.dim))
        if self.kind == "t":
            require_count(self.nu, "nu", 1)
        if self.kind == "gumbel":
            require(validate_numeric_value(self.xi, "xi", 1.0, math.inf))

    @classmethod
    def gaussian(cls, r: float, dim: int = 3) -> "CopulaSpec":
        return cls(kind="gaussian", dim=dim, r=r)

    @classmethod
    def student_t(cls, r: float, nu: int = 2, dim: int = 3) -> "CopulaSpec":
        return cls(kind="t", dim=dim, r=r, nu=nu)

    @classmethod
    def gumbel(cls, xi: float, dim: int = 3) -> "CopulaSpec":
        return cls(kind="gumbel", dim=dim, xi=xi)

    def correlation(self) -> np.ndarray:
        """Compound-symmetric matrix with unit diagonal and off-diagonal r."""
        matrix = np.full((self.dim, self.dim), float(self.r))
        np.fill_diagonal(matrix, 1.0)
        return matrix

    def cholesky(self) -> np.ndarray:
        try:
            return np.linalg.cholesky(self.correlation())
        except np.linalg.LinAlgError as exc:
            raise RiskDomainError(f"correlation matrix with r={self.r} is not positive definite") from exc

    def label(self) -> str:
        if self.kind == "gaussian":
            return f"gaussian(r={self.r:g})"
        if self.kind == "t":
            return f"t(r={self.r:g}, nu={self.nu})"
        return f"gumbel(xi={self.xi:g})"

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"kind": self.kind, "dim": self.dim}
        if self.kind == "gumbel":
            payload["xi"] = self.xi
        else:
            payload["r"] = self.r
        if self.kind == "t":
            payload["nu"] = self.nu
        return payload


@dataclass(frozen=True)
class ScenarioConfig:
    """Marginals, copula, sample size, levels and seed of one allocation run."""

    marginals: Tuple[LossModel, ...]
    copula: CopulaSpec
    n: int
    levels: Tuple[float, ...]
    seed: int = 0
    labels: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "marginals", tuple(self.marginals))
        object.__setattr__(self, "levels", tuple(require_levels(self.levels)))
        object.__setattr__(self, "labels", tuple(self.labels))
        require_count(self.n, "n", MIN_SCENARIO_SIZE)
        require_count(self.seed, "seed", 0)
        if len(self.marginals) != self.copula.dim:
            raise RiskDomainError(f"{len(self.marginals)} marginals given for a {self.copula.dim}-dimensional copula")
        for model in self.marginals:
            if not math.isfinite(model.mean()):
                raise RiskDomainError(f"marginal {model} has no finite mean")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "marginals": [model_to_dict(model) for model in self.marginals],
            "labels": list(self.labels),
            "copula": self.copula.to_dict(),
            "n": self.n,
            "levels": list(self.levels),
            "seed": self.seed,
        }


@dataclass
class StressReport:
    """Subadditivity violation counts per level for one copula."""

    copula: CopulaSpec
    levels: List[float]
    n: int
    repetitions: int
    seed: int
    counts: Dict[float, Dict[str, int]]
    undefined: Dict[float, int] = field(default_factory=dict)
    marginals: List[str] = field(default_factory=list)

    def to_rows(self) -> List[Dict[str, Any]]:
        rows = []
        for p in self.levels:
            row: Dict[str, Any] = {"copula": self.copula.label(), "p": p}
            row.update({measure: self.counts[p][measure] for measure in STRESS_MEASURES})
            row["repetitions"] = self.repetitions
            row["pelvar_undefined"] = self.undefined.get(p, 0)
            rows.append(row)
        return rows

    def to_dict(self) -> Dict[str, Any]:
        return {
            "copula": self.copula.to_dict(),
            "marginals": list(self.marginals),
            "n": self.n,
            "repetitions": self.repetitions,
            "seed": self.seed,
            "levels": list(self.levels),
            "counts": {str(p): dict(self.counts[p]) for p in self.levels},
            "pelvar_undefined": {str(p): self.undefined.get(p, 0) for p in self.levels},
        }


def _latent_normals(spec: CopulaSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((n, spec.dim)) @ spec.cholesky().T


def _positive_stable(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Positive α-stable draws with Laplace transform exp(-s^α) (Kanter representation)."""
    angle = np.pi * (1.0 - rng.random(n))
    expo = rng.standard_exponential(n)
    left = np.sin(alpha * angle) / np.sin(angle) ** (1.0 / alpha)
    right = (np.sin((1.0 - alpha) * angle) / expo) ** ((1.0 - alpha) / alpha)
    return left * right


def survival_uniforms(spec: CopulaSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """n×dim matrix of V = 1 - U where U has the copula's distribution."""
    if spec.kind == "gaussian":
        return sc.ndtr(-_latent_normals(spec, n, rng))
    if spec.kind == "t":
        z = _latent_normals(spec, n, rng)
        w = rng.chisquare(spec.nu, n)
        t = z / np.sqrt(w / spec.nu)[:, None]
        return sc.stdtr(spec.nu, -t)

    # Marshall-Olkin frailty: U_j = exp(-(E_j/S)^(1/ξ)) with positive stable S of index 1/ξ.
    expo = rng.standard_exponential((n, spec.dim))
    if spec.xi == 1.0:
        return -np.expm1(-expo)
    alpha = 1.0 / spec.xi
    frailty = _positive_stable(alpha, n, rng)
    return -np.expm1(-((expo / frailty[:, None]) ** alpha))


def _simulate(spec: CopulaSpec, marginals: Sequence[LossModel], n: int, rng: np.random.Generator) -> np.ndarray:
    if len(marginals) != spec.dim:
        raise RiskDomainError(f"{len(marginals)} marginals given for a {spec.dim}-dimensional copula")
    v = survival_uniforms(spec, n, rng)
    np.maximum(v, np.finfo(float).tiny, out=v)
    columns = [np.asarray(model.isf(v[:, j]), dtype=float) for j, model in enumerate(marginals)]
    return np.column_stack(columns)


def sample_copula(
    spec: CopulaSpec,
    marginals: Sequence[LossModel],
    n: int,
    seed: int,
    labels: Sequence[str] = (),
) -> PortfolioSample:
    """Joint scenarios with the given marginals, drawn from stream ``(seed, 0)``."""
    n = require_count(n, "n", 2)
    scenarios = _simulate(spec, marginals, n, rng_streams.stream(seed, rng_streams.SCENARIO_STREAM))
    logger.info("sampled %d scenarios from %s", n, spec.label())
    return PortfolioSample(scenarios, labels=tuple(labels))


def run_allocation_scenario(
    cfg: ScenarioConfig,
    var_scheme: VarScheme = "kernel",
    bandwidth: Optional[float] = None,
) -> List[AllocationReport]:
    """One allocation report per configured level, deterministic given the seed."""
    ps = sample_copula(cfg.copula, cfg.marginals, cfg.n, cfg.seed, labels=cfg.labels)
    reports = []
    for p in cfg.levels:
        reports.append(allocate(ps, p, var_scheme=var_scheme, seed=cfg.seed, bandwidth=bandwidth))
        logger.info("allocated p=%s: theta=%.6g", p, reports[-1].aggregate["theta"])
    return reports


def _exceeds(lhs: float, rhs: float) -> bool:
    return lhs - rhs > SUBADDITIVITY_SLACK * max(1.0, abs(rhs))


def _repetition_violations(
    spec: CopulaSpec,
    marginals: Sequence[LossModel],
    levels: Sequence[float],
    n: int,
    rng: np.random.Generator,
) -> Dict[float, Dict[str, Optional[bool]]]:
    scenarios = _simulate(spec, marginals, n, rng)
    total = Sample(scenarios.sum(axis=1))
    parts = [Sample(scenarios[:, j]) for j in range(scenarios.shape[1])]
    outcome: Dict[float, Dict[str, Optional[bool]]] = {}
    for p in levels:
        tail = 1.0 - p
        var_sum = sum(empirical_quantile(part, p) for part in parts)
        es_sum = sum(empirical_es(part, p) for part in parts)
        result: Dict[str, Optional[bool]] = {
            "var": _exceeds(empirical_quantile(total, p), var_sum),
            "es": _exceeds(empirical_es(total, p), es_sum),
        }
        # PELVaR of the sum is FES at its own θ-index; the components are
        # charged FES at that same flexibility.
        try:
            theta = empirical_theta(total, p)
        except RiskDomainError:
            result["pelvar"] = None
        else:
            pel_total = (tail * empirical_es(total, p) + theta * total.mean) / (tail + theta)
            pel_sum = (tail * es_sum + theta * sum(part.mean for part in parts)) / (tail + theta)
            result["pelvar"] = _exceeds(pel_total, pel_sum)
        outcome[p] = result
    return outcome


def run_stress(
    marginals: Sequence[LossModel],
    copulas: Sequence[CopulaSpec],
    levels: Sequence[float],
    n: int,
    B: int,
    seed: int,
    threads: Optional[int] = None,
) -> List[StressReport]:
    """
    Count subadditivity violations of VaR, PELVaR and ES over ``B`` repetitions.

    Repetition ``b`` of copula ``k`` uses stream ``(seed, k, b)``; repetitions
    run on a thread pool and are tallied in repetition order.
    """
    levels = require_levels(levels)
    n = require_count(n, "n", 2)
    B = require_count(B, "B", 1)
    seed = require_count(seed, "seed", 0)
    workers = None if threads is None else require_count(threads, "threads", 1)

    reports = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for index, spec in enumerate(copulas):
            outcomes = pool.map(
                lambda b, k=index, c=spec: _repetition_violations(c, marginals, levels, n, rng_streams.stream(seed, k, b)),
                range(B),
            )
            counts = {p: {measure: 0 for measure in STRESS_MEASURES} for p in levels}
            undefined = {p: 0 for p in levels}
            for outcome in outcomes:
                for p, flags in outcome.items():
                    for measure, violated in flags.items():
                        if violated is None:
                            undefined[p] += 1
                        elif violated:
                            counts[p][measure] += 1
            logger.info("stress %s: %s", spec.label(), {p: counts[p]["var"] for p in levels})
            reports.append(
                StressReport(
                    copula=spec,
                    levels=list(levels),
                    n=n,
                    repetitions=B,
                    seed=seed,
                    counts=counts,
                    undefined=undefined,
                    marginals=[model.describe() for model in marginals],
                )
            )
    return reports
