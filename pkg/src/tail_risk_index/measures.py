"""
Flexible Expected Shortfall, the θ-index and PELVaR.

FES mixes Expected Shortfall with the mean,

    FES_p(X; θ) = (1-p)/(1-p+θ) ES_p(X) + θ/(1-p+θ) E[X],

and the θ-index is the flexibility at which FES equals VaR. PELVaR is FES
evaluated at the θ-index, a coherent measure that reproduces VaR on D_X.
Every operation accepts either an analytic :class:`LossModel` or an
empirical :class:`Sample`.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from . import empirical
from .distributions import LossModel, theta_from_parts
from .empirical import Sample
from .exceptions import ComputationError, RiskDomainError
from .validator import require_levels, require_positive, require_probability

logger = logging.getLogger(__name__)

RiskSource = Union[LossModel, Sample]

LEVEL_EPSILON = 1e-9
ORDER_SLACK = 1e-10


@dataclass(frozen=True)
class RiskAssessment:
    """VaR, ES, mean, θ-index, FES and PELVaR at one probability level."""

    p: float
    var: float
    es: float
    mean: float
    theta: float
    fes: float
    pelvar: float
    flexibility: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass
class ThetaOrderResult:
    """Right-spread ratio trace and pointwise θ comparison for X ≤_θ Y."""

    holds: bool
    levels: List[float]
    ratios: List[float]
    theta_x: List[float]
    theta_y: List[float]
    pointwise_holds: bool
    skipped: List[float] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.holds

    @property
    def consistent(self) -> bool:
        return self.holds == self.pointwise_holds


def _var(source: RiskSource, p: float) -> float:
    if isinstance(source, Sample):
        return empirical.empirical_quantile(source, p)
    return source.quantile(p)


def _es(source: RiskSource, p: float) -> float:
    if isinstance(source, Sample):
        return empirical.empirical_es(source, p)
    return source.es(p)


def _mean(source: RiskSource) -> float:
    return source.mean if isinstance(source, Sample) else source.mean()


def domain_lower_bound(source: RiskSource) -> float:
    """Lower end of D_X, analytic or empirical."""
    if isinstance(source, Sample):
        return empirical.empirical_dx_bound(source)
    return source.dx_lower_bound()


def _level_bracket(source: RiskSource, lower: float) -> Tuple[float, float]:
    if isinstance(source, Sample):
        return lower + LEVEL_EPSILON, (source.n - 1) / source.n - LEVEL_EPSILON
    return lower + LEVEL_EPSILON, 1.0 - LEVEL_EPSILON


def fes(source: RiskSource, p: float, theta: float) -> float:
    """Flexible Expected Shortfall at level ``p`` with flexibility ``theta``."""
    p = require_probability(p)
    theta = require_positive(theta, "theta", allow_infinite=True)
    m = _mean(source)
    if math.isinf(theta):
        return m
    tail = 1.0 - p
    return (tail * _es(source, p) + theta * m) / (tail + theta)


def theta_index(source: RiskSource, p: float) -> float:
    """
    θ_p(X) = E[(X - VaR_p)+]/(VaR_p - E[X]) = (1-p)(ES_p - VaR_p)/(VaR_p - E[X]).

    Analytic sources return +inf, with a warning, at the D_X boundary.
    """
    p = require_probability(p)
    if isinstance(source, Sample):
        return empirical.empirical_theta(source, p)

    bound = source.dx_lower_bound()
    if p < bound:
        raise RiskDomainError(
            f"p={p} lies below the D_X bound {bound:.6g} of {source}; the θ-index is undefined", bound=bound
        )
    var, es_value, m = source.quantile(p), source.es(p), source.mean()
    if var - m <= 0.0:
        logger.warning("θ-index of %s at p=%s sits on the D_X boundary (VaR = mean); reporting +inf", source, p)
        return math.inf
    return theta_from_parts(p, var, es_value, m)


def pelvar(source: RiskSource, p: float) -> float:
    """FES at the θ-index; equals VaR_p on D_X."""
    return fes(source, p, theta_index(source, p))


def assess(source: RiskSource, p: float, flexibility: Optional[float] = None) -> RiskAssessment:
    """
    Evaluate every measure at ``p``.

    ``fes`` uses ``flexibility`` when given and the θ-index otherwise.
    """
    p = require_probability(p)
    theta = theta_index(source, p)
    flex = theta if flexibility is None else require_positive(flexibility, "flexibility")
    return RiskAssessment(
        p=p,
        var=_var(source, p),
        es=_es(source, p),
        mean=_mean(source),
        theta=theta,
        fes=fes(source, p, flex),
        pelvar=fes(source, p, theta),
        flexibility=flex,
    )


def risk_curve(
    source: RiskSource,
    levels: Sequence[float],
    flexibility: Optional[float] = None,
) -> Tuple[List[RiskAssessment], List[float]]:
    """Assess every level in D_X; returns the assessments and the skipped levels."""
    assessments: List[RiskAssessment] = []
    skipped: List[float] = []
    if flexibility is not None:
        flexibility = require_positive(flexibility, "flexibility")
    for p in require_levels(levels):
        try:
            assessments.append(assess(source, p, flexibility))
        except RiskDomainError as exc:
            logger.info("level %s skipped: %s", p, exc)
            skipped.append(p)
    return assessments, skipped


def _find_root(func: Callable[[float], float], lo: float, hi: float, what: str, **context: Any) -> float:
    f_lo, f_hi = func(lo), func(hi)
    if not (f_lo > 0.0 > f_hi):
        raise ComputationError(
            f"could not bracket the {what}",
            diagnostics={"lower": lo, "upper": hi, "f_lower": f_lo, "f_upper": f_hi, **context},
        )
    root, info = optimize.brentq(func, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, full_output=True)
    if not info.converged:
        raise ComputationError(
            f"root search for the {what} did not converge",
            diagnostics={"iterations": info.iterations, "flag": info.flag, **context},
        )
    logger.debug("%s found at p=%.15g after %d iterations", what, root, info.iterations)
    return float(root)


def solve_p_theta(source: RiskSource, theta: float) -> float:
    """
    Probability-equal level p_θ: the unique p in D_X whose θ-index equals ``theta``.

    The θ-index decreases strictly on D_X, so bracketing the interval
    (bound + ε, 1 - ε) is globally safe.
    """
    theta = require_positive(theta, "theta")
    lo, hi = _level_bracket(source, domain_lower_bound(source))

    def gap(p: float) -> float:
        return theta_index(source, p) - theta

    return _find_root(gap, lo, hi, "probability-equal level", theta=theta)


def fes_maximizer(source: RiskSource, theta: float) -> Tuple[float, float]:
    """
    Level maximizing p -> FES_p(X; θ) and the maximal value.

    The maximizer is where FES meets VaR; it is located by rooting
    FES_p - VaR_p directly, independently of the θ-index.
    """
    theta = require_positive(theta, "theta")
    if not math.isfinite(_mean(source)):
        raise RiskDomainError(f"{source} has no finite mean; FES is undefined")
    lo, hi = _level_bracket(source, 0.0)

    def gap(p: float) -> float:
        return fes(source, p, theta) - _var(source, p)

    p_star = _find_root(gap, lo, hi, "FES maximizer", theta=theta)
    return p_star, fes(source, p_star, theta)


def right_spread_ratio(x: RiskSource, y: RiskSource, p: float) -> float:
    """(ES_p(Y) - E[Y]) / (ES_p(X) - E[X])."""
    return (_es(y, p) - _mean(y)) / (_es(x, p) - _mean(x))


def theta_order_holds(x: RiskSource, y: RiskSource, grid: Sequence[float]) -> ThetaOrderResult:
    """
    Check X ≤_θ Y on ``grid``: the right-spread ratio must be nondecreasing.

    Grid points outside D_X ∩ D_Y are skipped; an empty intersection is an error.
    """
    levels = sorted(require_levels(grid))
    bound = max(domain_lower_bound(x), domain_lower_bound(y))
    inside = [p for p in levels if p > bound]
    skipped = [p for p in levels if p <= bound]
    if not inside:
        raise RiskDomainError(f"no grid level lies in D_X ∩ D_Y = ({bound:.6g}, 1)", bound=bound)

    ratios = [right_spread_ratio(x, y, p) for p in inside]
    theta_x = [theta_index(x, p) for p in inside]
    theta_y = [theta_index(y, p) for p in inside]

    holds = all(b >= a - ORDER_SLACK * max(1.0, abs(a)) for a, b in zip(ratios, ratios[1:]))
    pointwise = all(tx <= ty + ORDER_SLACK * max(1.0, abs(ty)) for tx, ty in zip(theta_x, theta_y))
    if holds != pointwise:
        logger.info("right-spread ratio verdict (%s) and pointwise θ verdict (%s) differ on this grid", holds, pointwise)
    return ThetaOrderResult(
        holds=holds,
        levels=inside,
        ratios=ratios,
        theta_x=theta_x,
        theta_y=theta_y,
        pointwise_holds=pointwise,
        skipped=skipped,
    )
