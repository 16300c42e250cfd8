"""
Euler allocation of VaR, ES, FES, the θ-index and PELVaR to portfolio components.

Given joint loss scenarios X = (X_1, ..., X_d) with aggregate X = ΣX_j, each
measure is split into per-component contributions R(X_j | X) that add up to
R(X) (to 0 for the θ-index). ES contributions are tail-conditional means;
VaR contributions use either a linear (covariance) approximation or a
Gaussian-kernel estimate around the perturbed aggregate quantile.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Sequence

import numpy as np

from . import rng as rng_streams
from .empirical import Sample, empirical_es, empirical_quantile, empirical_theta, kernel_weights, silverman_bandwidth
from .exceptions import RiskDomainError
from .validator import require_count, require_positive, require_probability

logger = logging.getLogger(__name__)

VarScheme = Literal["linear", "kernel"]
VAR_SCHEMES = ("linear", "kernel")

MIN_SCENARIOS = 100
MIN_TAIL_SCENARIOS = 30
MIN_EFFECTIVE_SAMPLE = 30.0
MEASURES = ("var", "pelvar", "es", "fes", "theta")


@dataclass(frozen=True, eq=False)
class PortfolioSample:
    """N×d matrix of joint loss scenarios with component labels."""

    scenarios: np.ndarray
    labels: tuple = ()
    aggregate: np.ndarray = field(init=False, repr=False)
    aggregate_sample: Sample = field(init=False, repr=False)

    def __post_init__(self) -> None:
        matrix = np.array(self.scenarios, dtype=float)
        if matrix.ndim == 1:
            matrix = matrix[:, None]
        if matrix.ndim != 2:
            raise RiskDomainError(f"scenarios must be an N×d matrix (got shape {matrix.shape})")
        rows, dim = matrix.shape
        if rows < MIN_SCENARIOS:
            raise RiskDomainError(f"a portfolio sample needs at least {MIN_SCENARIOS} scenarios (got {rows})")
        if dim < 1:
            raise RiskDomainError("a portfolio sample needs at least one component")
        if not np.all(np.isfinite(matrix)):
            raise RiskDomainError("scenarios contain non-finite losses")
        labels = tuple(self.labels) if self.labels else tuple(f"X{j + 1}" for j in range(dim))
        if len(labels) != dim:
            raise RiskDomainError(f"got {len(labels)} labels for {dim} components")
        matrix.setflags(write=False)
        aggregate = matrix.sum(axis=1)
        aggregate.setflags(write=False)
        object.__setattr__(self, "scenarios", matrix)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "aggregate", aggregate)
        object.__setattr__(self, "aggregate_sample", Sample(aggregate))

    @property
    def n(self) -> int:
        return int(self.scenarios.shape[0])

    @property
    def dim(self) -> int:
        return int(self.scenarios.shape[1])

    def component(self, j: int) -> Sample:
        return Sample(self.scenarios[:, j])

    def component_means(self) -> np.ndarray:
        return self.scenarios.mean(axis=0)


@dataclass
class KernelContribution:
    """Kernel VaR contributions with the diagnostics of the weighting."""

    values: np.ndarray
    bandwidth: float
    center: float
    effective_sample_size: float
    warnings: List[str] = field(default_factory=list)


@dataclass
class AllocationReport:
    """Per-component Euler contributions at one probability level."""

    p: float
    labels: tuple
    var_scheme: str
    aggregate: Dict[str, float]
    contributions: Dict[str, np.ndarray]
    residuals: Dict[str, float]
    proportions: Dict[str, np.ndarray]
    marginal_theta: np.ndarray
    negative_contribution: List[Optional[bool]]
    criterion_holds: bool
    warnings: List[str] = field(default_factory=list)

    def to_rows(self) -> List[Dict[str, Any]]:
        rows: List[Dict[str, Any]] = []
        for j, label in enumerate(self.labels):
            row: Dict[str, Any] = {"p": self.p, "component": label}
            for measure in MEASURES:
                row[measure] = float(self.contributions[measure][j])
            for measure, shares in self.proportions.items():
                row[f"{measure}_share"] = float(shares[j])
            row["marginal_theta"] = float(self.marginal_theta[j])
            rows.append(row)
        total: Dict[str, Any] = {"p": self.p, "component": "total"}
        for measure in MEASURES:
            total[measure] = self.aggregate[measure]
        for measure in self.proportions:
            total[f"{measure}_share"] = 1.0
        total["marginal_theta"] = self.aggregate["theta"]
        rows.append(total)
        return rows

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "labels": list(self.labels),
            "var_scheme": self.var_scheme,
            "aggregate": dict(self.aggregate),
            "contributions": {k: v.tolist() for k, v in self.contributions.items()},
            "proportions": {k: v.tolist() for k, v in self.proportions.items()},
            "residuals": dict(self.residuals),
            "marginal_theta": self.marginal_theta.tolist(),
            "negative_contribution": list(self.negative_contribution),
            "criterion_holds": self.criterion_holds,
            "warnings": list(self.warnings),
        }


def _tail_mask(ps: PortfolioSample, p: float) -> np.ndarray:
    var = empirical_quantile(ps.aggregate_sample, p)
    mask = ps.aggregate > var
    count = int(np.count_nonzero(mask))
    if count < MIN_TAIL_SCENARIOS:
        raise RiskDomainError(
            f"only {count} scenarios exceed the aggregate VaR at p={p}; "
            f"at least {MIN_TAIL_SCENARIOS} are needed for ES contributions"
        )
    return mask


def es_contribution(ps: PortfolioSample, p: float) -> np.ndarray:
    """E[X_j | X > VaR_p(X)] per component; sums to the empirical ES."""
    p = require_probability(p)
    mask = _tail_mask(ps, p)
    return ps.scenarios[mask].mean(axis=0)


def var_contribution_linear(ps: PortfolioSample, p: float) -> np.ndarray:
    """E[X_j] + Cov(X_j, X)/Var(X) (VaR_p(X) - E[X]); sums to VaR_p(X)."""
    p = require_probability(p)
    aggregate = ps.aggregate
    centered_total = aggregate - aggregate.mean()
    variance = float(np.dot(centered_total, centered_total))
    if not variance > 0:
        raise RiskDomainError("the aggregate loss has zero variance; linear VaR contributions are undefined")
    centered = ps.scenarios - ps.component_means()
    covariances = centered.T @ centered_total
    var = empirical_quantile(ps.aggregate_sample, p)
    return ps.component_means() + covariances / variance * (var - aggregate.mean())


def var_contribution_kernel(
    ps: PortfolioSample,
    p: float,
    bandwidth: Optional[float] = None,
    seed: int = 0,
) -> KernelContribution:
    """
    Kernel-weighted component means around the perturbed aggregate VaR.

    The center is the empirical quantile of X + ηZ with standard normal Z
    drawn from stream ``(seed, 1)``; η defaults to Silverman's rule on X.
    """
    p = require_probability(p)
    eta = silverman_bandwidth(ps.aggregate) if bandwidth is None else require_positive(bandwidth, "bandwidth")
    noise = rng_streams.stream(seed, rng_streams.KERNEL_NOISE_STREAM).standard_normal(ps.n)
    center = empirical_quantile(Sample(ps.aggregate + eta * noise), p)
    weights = kernel_weights(ps.aggregate, center, eta)
    ess = 1.0 / float(np.sum(weights**2))
    notes = []
    if ess < MIN_EFFECTIVE_SAMPLE:
        notes.append(
            f"kernel VaR contributions at p={p} rest on an effective sample of {ess:.1f} scenarios (bandwidth {eta:.6g})"
        )
        logger.warning(notes[-1])
    logger.debug("kernel VaR p=%s eta=%.6g center=%.6g ess=%.1f", p, eta, center, ess)
    return KernelContribution(
        values=weights @ ps.scenarios,
        bandwidth=eta,
        center=center,
        effective_sample_size=ess,
        warnings=notes,
    )


def fes_contribution(ps: PortfolioSample, p: float, theta: float) -> np.ndarray:
    """((1-p) ES_j|X + θ E[X_j]) / (1-p+θ); sums to FES_p(X; θ)."""
    p = require_probability(p)
    theta = require_positive(theta, "theta", allow_infinite=True)
    means = ps.component_means()
    if math.isinf(theta):
        return means
    tail = 1.0 - p
    return (tail * es_contribution(ps, p) + theta * means) / (tail + theta)


def _var_contributions(
    ps: PortfolioSample, p: float, var_scheme: str, seed: int, bandwidth: Optional[float]
) -> KernelContribution:
    if var_scheme == "linear":
        values = var_contribution_linear(ps, p)
        return KernelContribution(values=values, bandwidth=0.0, center=float(values.sum()), effective_sample_size=float(ps.n))
    if var_scheme == "kernel":
        return var_contribution_kernel(ps, p, bandwidth=bandwidth, seed=seed)
    raise RiskDomainError(f"unknown VaR contribution scheme '{var_scheme}' (expected one of {', '.join(VAR_SCHEMES)})")


def _theta_parts(
    ps: PortfolioSample, p: float, var_parts: np.ndarray, es_parts: np.ndarray
) -> np.ndarray:
    theta = empirical_theta(ps.aggregate_sample, p)
    means = ps.component_means()
    var_total = float(var_parts.sum())
    es_total = float(es_parts.sum())
    mean_total = float(means.sum())
    if not var_total > mean_total or not es_total > var_total:
        raise RiskDomainError(
            f"allocated VaR {var_total:.6g} must lie strictly between the mean {mean_total:.6g} "
            f"and ES {es_total:.6g} at p={p}"
        )
    return theta * ((es_parts - var_parts) / (es_total - var_total) - (var_parts - means) / (var_total - mean_total))


def theta_contribution(
    ps: PortfolioSample,
    p: float,
    var_scheme: VarScheme = "kernel",
    seed: int = 0,
    bandwidth: Optional[float] = None,
) -> np.ndarray:
    """
    θ_p(X) [(ES_j - VaR_j)/(ES - V) - (VaR_j - E[X_j])/(V - E[X])] per component.

    V is the sum of the VaR contributions of the chosen scheme, so the
    contributions add up to zero exactly. Negative entries mark components
    that lighten the tail of the aggregate.
    """
    p = require_probability(p)
    var_parts = _var_contributions(ps, p, var_scheme, seed, bandwidth).values
    return _theta_parts(ps, p, var_parts, es_contribution(ps, p))


def _pelvar_parts(ps: PortfolioSample, p: float, es_parts: np.ndarray, theta_parts: np.ndarray) -> np.ndarray:
    theta = empirical_theta(ps.aggregate_sample, p)
    means = ps.component_means()
    tail = 1.0 - p
    pel = (tail * empirical_es(ps.aggregate_sample, p) + theta * ps.aggregate_sample.mean) / (tail + theta)
    return (tail * es_parts + theta * means - theta_parts * (pel - ps.aggregate_sample.mean)) / (tail + theta)


def pelvar_contribution(
    ps: PortfolioSample,
    p: float,
    var_scheme: VarScheme = "kernel",
    seed: int = 0,
    bandwidth: Optional[float] = None,
) -> np.ndarray:
    """((1-p) ES_j + θ_p E[X_j])/(1-p+θ_p) - θ_j (PELVaR - E[X])/(1-p+θ_p); sums to PELVaR."""
    p = require_probability(p)
    es_parts = es_contribution(ps, p)
    var_parts = _var_contributions(ps, p, var_scheme, seed, bandwidth).values
    return _pelvar_parts(ps, p, es_parts, _theta_parts(ps, p, var_parts, es_parts))


def marginal_theta(var_parts: np.ndarray, es_parts: np.ndarray, means: np.ndarray, p: float) -> np.ndarray:
    """Conditional tail index (1-p)(ES_j - VaR_j)/(VaR_j - E[X_j]); NaN where VaR_j <= E[X_j]."""
    gap = var_parts - means
    with np.errstate(divide="ignore", invalid="ignore"):
        values = (1.0 - p) * (es_parts - var_parts) / gap
    return np.where(gap > 0, values, np.nan)


def allocate(
    ps: PortfolioSample,
    p: float,
    var_scheme: VarScheme = "kernel",
    seed: int = 0,
    flexibility: Optional[float] = None,
    bandwidth: Optional[float] = None,
) -> AllocationReport:
    """
    Assemble every contribution with full-allocation residuals.

    FES contributions use ``flexibility`` when given and θ_p(X) otherwise.
    """
    p = require_probability(p)
    seed = require_count(seed, "seed", 0)
    sample = ps.aggregate_sample
    tail = 1.0 - p

    var = empirical_quantile(sample, p)
    es = empirical_es(sample, p)
    mean = sample.mean
    theta = empirical_theta(sample, p)
    flex = theta if flexibility is None else require_positive(flexibility, "flexibility")
    fes_value = (tail * es + flex * mean) / (tail + flex)
    pel = (tail * es + theta * mean) / (tail + theta)

    var_result = _var_contributions(ps, p, var_scheme, seed, bandwidth)
    var_parts = var_result.values
    es_parts = es_contribution(ps, p)
    theta_parts = _theta_parts(ps, p, var_parts, es_parts)
    contributions = {
        "var": var_parts,
        "pelvar": _pelvar_parts(ps, p, es_parts, theta_parts),
        "es": es_parts,
        "fes": (tail * es_parts + flex * ps.component_means()) / (tail + flex),
        "theta": theta_parts,
    }
    aggregate = {"var": var, "pelvar": pel, "es": es, "fes": fes_value, "theta": theta, "mean": mean, "flexibility": flex}
    residuals = {
        measure: abs(float(contributions[measure].sum()) - (0.0 if measure == "theta" else aggregate[measure]))
        for measure in MEASURES
    }
    proportions = {measure: contributions[measure] / aggregate[measure] for measure in ("var", "pelvar", "es", "fes")}

    # θ_j < 0 exactly when the conditional tail index falls below the
    # scheme-consistent aggregate index (equal to θ_p(X) under the linear scheme).
    var_total = float(var_parts.sum())
    reference = tail * (es - var_total) / (var_total - mean)
    tilde = marginal_theta(var_parts, es_parts, ps.component_means(), p)
    negative: List[Optional[bool]] = []
    holds = True
    for j in range(ps.dim):
        if math.isnan(tilde[j]):
            negative.append(None)
            continue
        is_negative = bool(theta_parts[j] < 0)
        negative.append(is_negative)
        if is_negative != bool(tilde[j] < reference) and abs(tilde[j] - reference) > 1e-12 * max(1.0, reference):
            holds = False

    report_warnings = list(var_result.warnings)
    if not holds:
        report_warnings.append(f"negative-contribution criterion failed at p={p}")
        logger.warning(report_warnings[-1])
    return AllocationReport(
        p=p,
        labels=ps.labels,
        var_scheme=var_scheme,
        aggregate=aggregate,
        contributions=contributions,
        residuals=residuals,
        proportions=proportions,
        marginal_theta=tilde,
        negative_contribution=negative,
        criterion_holds=holds,
        warnings=report_warnings,
    )
