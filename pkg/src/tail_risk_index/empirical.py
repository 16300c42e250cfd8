"""
Sample-based estimators of VaR, Expected Shortfall and the θ-index.

The empirical quantile at level p is the ⌈np⌉-th ascending order statistic
(the upper quantile), the empirical ES is the mean of the observations
strictly above it, and the empirical θ-index combines both with the sample
mean. A Nadaraya-Watson smoother with a Gaussian kernel turns θ estimates
on a grid of anchor levels into a smooth curve.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from . import rng as rng_streams
from .distributions import LossModel
from .exceptions import ComputationError, RiskDomainError
from .validator import require, require_count, require_positive, require_probability, validate_sample_values

logger = logging.getLogger(__name__)

# Guards ceil(n p) against p values that are not exactly representable.
_INDEX_SLACK = 1e-9

DEFAULT_ANCHOR_COUNT = 41
DEFAULT_ANCHOR_TOP = 0.999


@dataclass(frozen=True, eq=False)
class Sample:
    """A materialized vector of at least two finite observations."""

    values: np.ndarray

    def __post_init__(self) -> None:
        array = require(validate_sample_values(self.values))
        array = np.array(array, dtype=float)
        array.setflags(write=False)
        object.__setattr__(self, "values", array)

    @cached_property
    def sorted_values(self) -> np.ndarray:
        ordered = np.sort(self.values)
        ordered.setflags(write=False)
        return ordered

    @property
    def n(self) -> int:
        return int(self.values.size)

    @cached_property
    def mean(self) -> float:
        return float(np.mean(self.values))

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class KernelConfig:
    """Gaussian kernel smoother; ``bandwidth=None`` selects Silverman's rule."""

    kernel: str = "gaussian"
    bandwidth: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kernel != "gaussian":
            raise RiskDomainError(f"unsupported kernel '{self.kernel}' (only 'gaussian' is available)")
        if self.bandwidth is not None:
            require_positive(self.bandwidth, "bandwidth")


@dataclass
class ConsistencyCurve:
    """Mean absolute error of the empirical θ-index per sample size."""

    model: str
    p: float
    true_theta: float
    sizes: List[int]
    mae: List[float]
    replications: int
    failures: List[int] = field(default_factory=list)

    def is_nonincreasing(self, allowed_inversions: int = 0) -> bool:
        inversions = sum(1 for a, b in zip(self.mae, self.mae[1:]) if b > a)
        return inversions <= allowed_inversions


def as_sample(values: "Sample | Sequence[float] | np.ndarray") -> Sample:
    return values if isinstance(values, Sample) else Sample(np.asarray(values, dtype=float))


def order_index(n: int, p: float) -> int:
    """1-based index ⌈np⌉ of the upper empirical quantile, clipped to [1, n]."""
    return min(max(math.ceil(n * p - _INDEX_SLACK), 1), n)


def empirical_quantile(s: Sample, p: float) -> float:
    """Return X_(⌈np⌉) from the ascending order statistics."""
    p = require_probability(p)
    return float(s.sorted_values[order_index(s.n, p) - 1])


def _exceedances(s: Sample, p: float) -> Tuple[float, np.ndarray]:
    q = empirical_quantile(s, p)
    start = int(np.searchsorted(s.sorted_values, q, side="right"))
    tail = s.sorted_values[start:]
    if tail.size == 0:
        raise RiskDomainError(
            f"no observation lies strictly above the empirical quantile {q:.6g} at p={p}; "
            f"use a level below {(s.n - 1) / s.n:.6g} or a larger sample"
        )
    return q, tail


def empirical_es(s: Sample, p: float) -> float:
    """Mean of the observations strictly above the empirical quantile."""
    _, tail = _exceedances(s, p)
    return float(np.mean(tail))


def empirical_dx_bound(s: Sample) -> float:
    """Empirical D_X lower bound F̂(X̄), the share of observations not above the mean."""
    return int(np.searchsorted(s.sorted_values, s.mean, side="right")) / s.n


def empirical_theta(s: Sample, p: float) -> float:
    """(1-p)(ÊS_p - x̂_p)/(x̂_p - X̄) with the strict exceedance set."""
    p = require_probability(p)
    q, tail = _exceedances(s, p)
    if q <= s.mean:
        bound = empirical_dx_bound(s)
        raise RiskDomainError(
            f"empirical quantile {q:.6g} does not exceed the sample mean {s.mean:.6g} at p={p}; "
            f"p must lie above the empirical D_X bound {bound:.6g}",
            bound=bound,
        )
    return (1.0 - p) * (float(np.mean(tail)) - q) / (q - s.mean)


def silverman_bandwidth(points: np.ndarray) -> float:
    """0.9 min(sd, IQR/1.34) m^(-1/5)."""
    points = np.asarray(points, dtype=float)
    sd = float(np.std(points, ddof=1)) if points.size > 1 else 0.0
    q75, q25 = np.percentile(points, [75, 25])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    if not spread > 0:
        raise RiskDomainError("cannot choose a bandwidth for points without spread; pass an explicit bandwidth")
    return 0.9 * spread * points.size ** (-0.2)


def kernel_weights(points: np.ndarray, center: float, bandwidth: float) -> np.ndarray:
    """Normalized Gaussian kernel weights K((center - x_k)/h)."""
    raw = stats.norm.pdf((center - np.asarray(points, dtype=float)) / bandwidth)
    total = float(np.sum(raw))
    if not total > 0 or not math.isfinite(total):
        raise ComputationError(
            "all kernel weights vanished; the bandwidth is too small for the data",
            diagnostics={"bandwidth": bandwidth, "center": center, "points": int(np.size(points))},
        )
    return raw / total


def kernel_theta(
    estimates: Sequence[Tuple[float, float]],
    query: float,
    cfg: Optional[KernelConfig] = None,
) -> float:
    """Nadaraya-Watson average of anchor estimates (p_k, θ̂_k) at ``query``."""
    cfg = cfg or KernelConfig()
    if len(estimates) < 2:
        raise RiskDomainError(f"kernel smoothing needs at least 2 anchor points (got {len(estimates)})")
    anchors = np.asarray([p for p, _ in estimates], dtype=float)
    thetas = np.asarray([theta for _, theta in estimates], dtype=float)
    query = require_probability(query, "query")
    if query < anchors.min() or query > anchors.max():
        raise RiskDomainError(
            f"query level {query} lies outside the anchor range [{anchors.min():.6g}, {anchors.max():.6g}]"
        )
    bandwidth = cfg.bandwidth if cfg.bandwidth is not None else silverman_bandwidth(anchors)
    weights = kernel_weights(anchors, query, bandwidth)
    return float(np.dot(weights, thetas))


def theta_anchor_grid(s: Sample, count: int = DEFAULT_ANCHOR_COUNT, top: float = DEFAULT_ANCHOR_TOP) -> np.ndarray:
    """Equispaced anchor levels from just above the empirical D_X bound to ``top``."""
    lower = empirical_dx_bound(s) + 0.01
    upper = min(top, (s.n - 1) / s.n - _INDEX_SLACK)
    if lower >= upper:
        raise RiskDomainError(
            f"sample of size {s.n} leaves no room for θ anchors between {lower:.6g} and {upper:.6g}",
            bound=lower,
        )
    return np.linspace(lower, upper, count)


def theta_anchors(s: Sample, levels: Optional[np.ndarray] = None) -> List[Tuple[float, float]]:
    """Empirical θ estimates on the anchor grid, skipping levels outside the empirical D_X."""
    grid = theta_anchor_grid(s) if levels is None else np.asarray(levels, dtype=float)
    anchors = []
    for p in grid:
        try:
            anchors.append((float(p), empirical_theta(s, float(p))))
        except RiskDomainError:
            logger.debug("anchor p=%.6f skipped: outside the empirical domain", p)
    return anchors


def smoothed_theta_curve(
    s: Sample,
    levels: Sequence[float],
    cfg: Optional[KernelConfig] = None,
) -> List[Tuple[float, Optional[float]]]:
    """Kernel-smoothed θ at each level; levels outside the anchor range map to None."""
    anchors = theta_anchors(s)
    if len(anchors) < 2:
        raise RiskDomainError("too few valid θ anchors to smooth")
    low, high = anchors[0][0], anchors[-1][0]
    curve: List[Tuple[float, Optional[float]]] = []
    for p in levels:
        if low <= p <= high:
            curve.append((float(p), kernel_theta(anchors, p, cfg)))
        else:
            curve.append((float(p), None))
    return curve


def consistency_probe(
    model: LossModel,
    p: float,
    sizes: Sequence[int],
    seed: int,
    replications: int = 50,
) -> ConsistencyCurve:
    """
    Monte Carlo error curve of the empirical θ-index against the closed form.

    Replication ``r`` at size index ``i`` draws from stream ``(seed, i, r)``.
    """
    p = require_probability(p)
    replications = require_count(replications, "replications", 1)
    true_theta = model.theta_closed(p)
    mae: List[float] = []
    failures: List[int] = []
    for size_index, n in enumerate(sizes):
        n = require_count(n, "sample size", 2)
        errors = []
        failed = 0
        for replication in range(replications):
            draws = model.rvs(n, rng_streams.stream(seed, size_index, replication))
            try:
                errors.append(abs(empirical_theta(Sample(draws), p) - true_theta))
            except RiskDomainError:
                failed += 1
        if not errors:
            raise ComputationError(
                f"no replication at n={n} produced an empirical θ-index",
                diagnostics={"p": p, "n": n, "replications": replications},
            )
        mae.append(float(np.mean(errors)))
        failures.append(failed)
        logger.info("consistency probe %s p=%s n=%d mae=%.6g", model, p, n, mae[-1])
    return ConsistencyCurve(
        model=model.describe(),
        p=p,
        true_theta=true_theta,
        sizes=[int(n) for n in sizes],
        mae=mae,
        replications=replications,
        failures=failures,
    )
