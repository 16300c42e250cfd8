"""
Parametric loss families with exact or semi-closed risk quantities.

Every family exposes its distribution function, quantile (VaR), mean,
Expected Shortfall, closed-form θ-index and the lower bound of
D_X = {p : VaR_p(X) > E[X]}. Distribution functions and sampling are
delegated to frozen :mod:`scipy.stats` distributions; tail quantities use
the family formulas from :mod:`tail_risk_index.special`.

GeneralizedPareto uses the mean-excess parameterization e(x) = αx + β.
Conversion to the location-scale-shape convention of ``scipy.stats.genpareto``:

    ==================  ==========================
    mean-excess (α, β)  scipy genpareto (c, scale)
    ==================  ==========================
    α                   c = α / (1 + α)
    β                   scale = β / (1 + α)
    α = 0               exponential with mean β
    α = 1/(a-1)         Lomax shape a, scale κ (β = κ/(a-1))
    α = -1/(c+1)        rescaled Beta on [0, ω] (β = ω/(c+1))
    ==================  ==========================
"""

import logging
import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, fields
from functools import cached_property
from typing import Any, ClassVar, Dict, Mapping, Optional, Tuple, Type, Union

import numpy as np
from scipy import integrate, stats

from . import special
from .exceptions import ComputationError, InfiniteMeanWarning, RiskDomainError
from .validator import require_finite, require_greater, require_positive, require_probability

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def _as_output(values: Any) -> ArrayLike:
    array = np.asarray(values, dtype=float)
    return float(array) if array.ndim == 0 else array


def theta_from_parts(p: float, var: float, es: float, mean: float) -> float:
    """θ-index by definition, (1-p)(ES - VaR)/(VaR - mean)."""
    return (1.0 - p) * (es - var) / (var - mean)


class LossModel(ABC):
    """Absolutely continuous loss distribution with finite mean."""

    family: ClassVar[str] = "abstract"

    @abstractmethod
    def _scipy(self) -> Any:
        """Return the equivalent frozen scipy.stats distribution."""

    @cached_property
    def dist(self) -> Any:
        return self._scipy()

    def params(self) -> Dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}  # type: ignore[arg-type]

    def describe(self) -> str:
        args = ", ".join(f"{key}={value:g}" for key, value in self.params().items())
        return f"{self.family}({args})"

    def __str__(self) -> str:
        return self.describe()

    # distribution function layer (vectorized, unvalidated)

    def cdf(self, x: ArrayLike) -> ArrayLike:
        return _as_output(self.dist.cdf(x))

    def sf(self, x: ArrayLike) -> ArrayLike:
        return _as_output(self.dist.sf(x))

    def pdf(self, x: ArrayLike) -> ArrayLike:
        return _as_output(self.dist.pdf(x))

    def isf(self, q: ArrayLike) -> ArrayLike:
        """Inverse survival function, VaR at level 1 - q."""
        return _as_output(self.dist.isf(q))

    def rvs(self, size: Union[int, Tuple[int, ...]], rng: np.random.Generator) -> np.ndarray:
        """Draw by inverse transform of the survival function."""
        u = rng.random(size)
        np.maximum(u, np.finfo(float).tiny, out=u)
        return np.asarray(self.isf(u), dtype=float)

    # risk quantities

    def quantile(self, p: float) -> float:
        p = require_probability(p)
        return float(self.dist.ppf(p))

    def mean(self) -> float:
        return float(self.dist.mean())

    def es(self, p: float) -> float:
        return self.es_numeric(p)

    def es_numeric(self, p: float, epsrel: float = 1e-10) -> float:
        """
        Expected Shortfall by adaptive quadrature of the quantile over (p, 1).

        The substitution u = 1 - exp(-t) moves the integrable singularity at
        u = 1 to infinity, giving ∫ isf(e^{-t}) e^{-t} dt over (-ln(1-p), ∞).
        """
        p = require_probability(p)

        def integrand(t: float) -> float:
            q = math.exp(-t)
            if q == 0.0:
                return 0.0
            return float(self.dist.isf(q)) * q

        lower = -math.log1p(-p)
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                value, abserr = integrate.quad(integrand, lower, math.inf, epsabs=0.0, epsrel=epsrel, limit=200)
            except integrate.IntegrationWarning as exc:
                raise ComputationError(
                    f"quadrature for ES of {self} did not converge at p={p}",
                    diagnostics={"method": "quad", "epsrel": epsrel, "reason": str(exc).splitlines()[0]},
                ) from exc

        if not math.isfinite(value) or abserr > max(1e-6, 1e-6 * abs(value)):
            raise ComputationError(
                f"quadrature for ES of {self} is unreliable at p={p}",
                diagnostics={"method": "quad", "estimate": value, "abserr": abserr},
            )
        logger.debug("quad ES %s p=%s value=%.12g abserr=%.3g", self, p, value, abserr)
        return value / (1.0 - p)

    def dx_lower_bound(self) -> float:
        """inf D_X = F(E[X])."""
        return float(self.cdf(self.mean()))

    def theta_closed(self, p: float) -> float:
        p = self._require_in_domain(p)
        return self._theta(p)

    def _theta(self, p: float) -> float:
        return theta_from_parts(p, self.quantile(p), self.es(p), self.mean())

    def _require_in_domain(self, p: float) -> float:
        p = require_probability(p)
        bound = self.dx_lower_bound()
        if p <= bound:
            raise RiskDomainError(
                f"p={p} is outside D_X = ({bound:.6g}, 1) of {self}; the θ-index is undefined there",
                bound=bound,
            )
        return p


@dataclass(frozen=True)
class Uniform(LossModel):
    a: float = 0.0
    b: float = 1.0

    family: ClassVar[str] = "uniform"

    def __post_init__(self) -> None:
        require_finite(self.a, "a")
        require_greater(self.b, "b", self.a)

    def _scipy(self) -> Any:
        return stats.uniform(loc=self.a, scale=self.b - self.a)

    def mean(self) -> float:
        return 0.5 * (self.a + self.b)

    def es(self, p: float) -> float:
        return 0.5 * (self.quantile(p) + self.b)

    def dx_lower_bound(self) -> float:
        return 0.5

    def _theta(self, p: float) -> float:
        return (1.0 - p) ** 2 / (2.0 * p - 1.0)


@dataclass(frozen=True)
class Normal(LossModel):
    mu: float = 0.0
    sigma: float = 1.0

    family: ClassVar[str] = "normal"

    def __post_init__(self) -> None:
        require_finite(self.mu, "mu")
        require_positive(self.sigma, "sigma")

    def _scipy(self) -> Any:
        return stats.norm(loc=self.mu, scale=self.sigma)

    def mean(self) -> float:
        return self.mu

    def es(self, p: float) -> float:
        p = require_probability(p)
        z = special.norm_ppf(p)
        return self.mu + self.sigma * special.norm_pdf(z) / (1.0 - p)

    def dx_lower_bound(self) -> float:
        return 0.5

    def _theta(self, p: float) -> float:
        z = special.norm_ppf(p)
        return special.norm_pdf(z) / z - (1.0 - p)


@dataclass(frozen=True)
class Exponential(LossModel):
    lam: float = 1.0

    family: ClassVar[str] = "exponential"

    def __post_init__(self) -> None:
        require_positive(self.lam, "lam")

    def _scipy(self) -> Any:
        return stats.expon(scale=1.0 / self.lam)

    def quantile(self, p: float) -> float:
        p = require_probability(p)
        return -math.log1p(-p) / self.lam

    def mean(self) -> float:
        return 1.0 / self.lam

    def es(self, p: float) -> float:
        return self.quantile(p) + 1.0 / self.lam

    def dx_lower_bound(self) -> float:
        return -math.expm1(-1.0)

    def _theta(self, p: float) -> float:
        return (1.0 - p) / (-math.log1p(-p) - 1.0)


@dataclass(frozen=True)
class StudentT(LossModel):
    nu: float
    loc: float = 0.0
    scale: float = 1.0

    family: ClassVar[str] = "student_t"

    def __post_init__(self) -> None:
        require_greater(self.nu, "nu", 1.0)
        require_finite(self.loc, "loc")
        require_positive(self.scale, "scale")

    def _scipy(self) -> Any:
        return stats.t(df=self.nu, loc=self.loc, scale=self.scale)

    def mean(self) -> float:
        return self.loc

    def _standard_tail(self, p: float) -> Tuple[float, float]:
        t = special.t_ppf(self.nu, p)
        return t, special.t_pdf(self.nu, t) * (self.nu + t * t) / (self.nu - 1.0)

    def es(self, p: float) -> float:
        p = require_probability(p)
        _, tail = self._standard_tail(p)
        return self.loc + self.scale * tail / (1.0 - p)

    def dx_lower_bound(self) -> float:
        return 0.5

    def _theta(self, p: float) -> float:
        t, tail = self._standard_tail(p)
        return tail / t - (1.0 - p)


@dataclass(frozen=True)
class LogNormal(LossModel):
    mu: float = 0.0
    sigma: float = 1.0

    family: ClassVar[str] = "lognormal"

    def __post_init__(self) -> None:
        require_finite(self.mu, "mu")
        require_positive(self.sigma, "sigma")

    def _scipy(self) -> Any:
        return stats.lognorm(s=self.sigma, scale=math.exp(self.mu))

    def mean(self) -> float:
        return math.exp(self.mu + 0.5 * self.sigma**2)

    def es(self, p: float) -> float:
        p = require_probability(p)
        z = special.norm_ppf(p)
        return self.mean() * special.norm_sf(z - self.sigma) / (1.0 - p)

    def dx_lower_bound(self) -> float:
        return special.norm_cdf(0.5 * self.sigma)

    def _theta(self, p: float) -> float:
        z = special.norm_ppf(p)
        s = self.sigma
        half_var = math.exp(0.5 * s * s)
        numerator = half_var * special.norm_sf(z - s) - (1.0 - p) * math.exp(s * z)
        return numerator / (math.exp(s * z) - half_var)


@dataclass(frozen=True)
class Gamma(LossModel):
    """Gamma with shape ``alpha`` and rate ``lam``."""

    alpha: float
    lam: float = 1.0

    family: ClassVar[str] = "gamma"

    def __post_init__(self) -> None:
        require_positive(self.alpha, "alpha")
        require_positive(self.lam, "lam")

    def _scipy(self) -> Any:
        return stats.gamma(a=self.alpha, scale=1.0 / self.lam)

    def quantile(self, p: float) -> float:
        p = require_probability(p)
        return special.gammaincinv(self.alpha, p) / self.lam

    def mean(self) -> float:
        return self.alpha / self.lam

    def es(self, p: float) -> float:
        var = self.quantile(p)
        return self.alpha / self.lam * special.gammaincc(self.alpha + 1.0, self.lam * var) / (1.0 - p)

    def dx_lower_bound(self) -> float:
        return special.gammainc(self.alpha, self.alpha)


@dataclass(frozen=True)
class Weibull(LossModel):
    """Weibull with F(x) = 1 - exp(-(lam x)^alpha)."""

    alpha: float
    lam: float = 1.0

    family: ClassVar[str] = "weibull"

    def __post_init__(self) -> None:
        require_positive(self.alpha, "alpha")
        require_positive(self.lam, "lam")

    def _scipy(self) -> Any:
        return stats.weibull_min(c=self.alpha, scale=1.0 / self.lam)

    def quantile(self, p: float) -> float:
        p = require_probability(p)
        return (-math.log1p(-p)) ** (1.0 / self.alpha) / self.lam

    def mean(self) -> float:
        return special.gamma(1.0 + 1.0 / self.alpha) / self.lam

    def es(self, p: float) -> float:
        p = require_probability(p)
        k = 1.0 + 1.0 / self.alpha
        return special.gamma(k) * special.gammaincc(k, -math.log1p(-p)) / (self.lam * (1.0 - p))

    def dx_lower_bound(self) -> float:
        return -math.expm1(-(special.gamma(1.0 + 1.0 / self.alpha) ** self.alpha))


@dataclass(frozen=True)
class ParetoII(LossModel):
    """Pareto type II (Lomax) with F(x) = 1 - (kappa/(kappa + x))^alpha."""

    alpha: float
    kappa: float = 1.0

    family: ClassVar[str] = "pareto_ii"

    def __post_init__(self) -> None:
        require_greater(self.alpha, "alpha", 1.0)
        require_positive(self.kappa, "kappa")

    def _scipy(self) -> Any:
        return stats.lomax(c=self.alpha, scale=self.kappa)

    def quantile(self, p: float) -> float:
        p = require_probability(p)
        return self.kappa * math.expm1(-math.log1p(-p) / self.alpha)

    def mean(self) -> float:
        return self.kappa / (self.alpha - 1.0)

    def es(self, p: float) -> float:
        var = self.quantile(p)
        return var + (self.kappa + var) / (self.alpha - 1.0)

    def dx_lower_bound(self) -> float:
        return 1.0 - ((self.alpha - 1.0) / self.alpha) ** self.alpha

    def _theta(self, p: float) -> float:
        a = self.alpha
        return (1.0 - p) / ((a - 1.0) - a * (1.0 - p) ** (1.0 / a))


@dataclass(frozen=True)
class GeneralizedPareto(LossModel):
    """Generalized Pareto with affine mean-excess function e(x) = alpha x + beta."""

    alpha: float
    beta: float = 1.0

    family: ClassVar[str] = "generalized_pareto"

    def __post_init__(self) -> None:
        require_greater(self.alpha, "alpha", -1.0)
        require_positive(self.beta, "beta")

    @classmethod
    def from_exponential(cls, lam: float) -> "GeneralizedPareto":
        return cls(alpha=0.0, beta=1.0 / require_positive(lam, "lam"))

    @classmethod
    def from_lomax(cls, a: float, kappa: float) -> "GeneralizedPareto":
        a = require_greater(a, "a", 1.0)
        return cls(alpha=1.0 / (a - 1.0), beta=kappa / (a - 1.0))

    @classmethod
    def from_rescaled_beta(cls, c: float, omega: float) -> "GeneralizedPareto":
        """F(x) = 1 - (1 - x/omega)^c on [0, omega]; c = 1 is Uniform[0, omega]."""
        c = require_positive(c, "c")
        return cls(alpha=-1.0 / (c + 1.0), beta=require_positive(omega, "omega") / (c + 1.0))

    def _scipy(self) -> Any:
        return stats.genpareto(c=self.alpha / (1.0 + self.alpha), scale=self.beta / (1.0 + self.alpha))

    def mean(self) -> float:
        return self.beta

    def es(self, p: float) -> float:
        return (1.0 + self.alpha) * self.quantile(p) + self.beta

    def mean_excess(self, x: float) -> float:
        return self.alpha * x + self.beta

    def dx_lower_bound(self) -> float:
        if self.alpha == 0.0:
            return -math.expm1(-1.0)
        return -math.expm1(-(1.0 + self.alpha) / self.alpha * math.log1p(self.alpha))

    def _theta(self, p: float) -> float:
        var = self.quantile(p)
        return (1.0 - p) * (self.alpha * var + self.beta) / (var - self.beta)


@dataclass(frozen=True)
class GEV(LossModel):
    """Generalized extreme value with F(x) = exp(-(1 + xi (x - mu)/sigma)^(-1/xi))."""

    mu: float = 0.0
    sigma: float = 1.0
    xi: float = 0.0

    family: ClassVar[str] = "gev"

    def __post_init__(self) -> None:
        require_finite(self.mu, "mu")
        require_positive(self.sigma, "sigma")
        require_finite(self.xi, "xi")
        if self.xi >= 1.0:
            message = f"GEV with xi={self.xi} >= 1 has infinite mean; its θ-index is 0 by convention"
            logger.warning(message)
            warnings.warn(message, InfiniteMeanWarning, stacklevel=3)

    @property
    def infinite_mean(self) -> bool:
        return self.xi >= 1.0

    def _scipy(self) -> Any:
        return stats.genextreme(c=-self.xi, loc=self.mu, scale=self.sigma)

    def quantile(self, p: float) -> float:
        p = require_probability(p)
        log_term = -math.log(p)
        if self.xi == 0.0:
            return self.mu - self.sigma * math.log(log_term)
        return self.mu + self.sigma * (log_term ** (-self.xi) - 1.0) / self.xi

    def mean(self) -> float:
        if self.infinite_mean:
            return math.inf
        if self.xi == 0.0:
            return self.mu + self.sigma * special.EULER_GAMMA
        return self.mu + self.sigma * (special.gamma(1.0 - self.xi) - 1.0) / self.xi

    def es(self, p: float) -> float:
        p = require_probability(p)
        if self.infinite_mean:
            return math.inf
        if self.xi == 0.0:
            tail = p * math.log(-math.log(p)) - special.logarithmic_integral(p) + special.EULER_GAMMA
            return self.mu + self.sigma * tail / (1.0 - p)
        partial = special.lower_gamma(1.0 - self.xi, -math.log(p))
        return self.mu + self.sigma / self.xi * (partial / (1.0 - p) - 1.0)

    def dx_lower_bound(self) -> float:
        if self.infinite_mean:
            return 1.0
        if self.xi == 0.0:
            return math.exp(-math.exp(-special.EULER_GAMMA))
        return math.exp(-(special.gamma(1.0 - self.xi) ** (-1.0 / self.xi)))

    def theta_closed(self, p: float) -> float:
        if self.infinite_mean:
            require_probability(p)
            return 0.0
        return super().theta_closed(p)

    def _theta(self, p: float) -> float:
        log_term = -math.log(p)
        if self.xi == 0.0:
            return special.logarithmic_integral(p) / (math.log(log_term) + special.EULER_GAMMA) - 1.0
        power = log_term ** (-self.xi)
        partial = special.lower_gamma(1.0 - self.xi, log_term)
        return (partial - (1.0 - p) * power) / (power - special.gamma(1.0 - self.xi))


@dataclass(frozen=True)
class AffineLossModel(LossModel):
    """The loss ``scale * base + shift`` for ``scale > 0``."""

    base: LossModel
    scale: float = 1.0
    shift: float = 0.0

    family: ClassVar[str] = "affine"

    def __post_init__(self) -> None:
        require_positive(self.scale, "scale")
        require_finite(self.shift, "shift")

    def _scipy(self) -> Any:
        return None

    def params(self) -> Dict[str, float]:
        return {"scale": self.scale, "shift": self.shift}

    def describe(self) -> str:
        return f"{self.scale:g}*{self.base.describe()}+{self.shift:g}"

    def _standardize(self, x: ArrayLike) -> ArrayLike:
        return (np.asarray(x, dtype=float) - self.shift) / self.scale

    def cdf(self, x: ArrayLike) -> ArrayLike:
        return self.base.cdf(self._standardize(x))

    def sf(self, x: ArrayLike) -> ArrayLike:
        return self.base.sf(self._standardize(x))

    def pdf(self, x: ArrayLike) -> ArrayLike:
        return _as_output(np.asarray(self.base.pdf(self._standardize(x))) / self.scale)

    def isf(self, q: ArrayLike) -> ArrayLike:
        return _as_output(self.scale * np.asarray(self.base.isf(q)) + self.shift)

    def quantile(self, p: float) -> float:
        return self.scale * self.base.quantile(p) + self.shift

    def mean(self) -> float:
        return self.scale * self.base.mean() + self.shift

    def es(self, p: float) -> float:
        return self.scale * self.base.es(p) + self.shift

    def es_numeric(self, p: float, epsrel: float = 1e-10) -> float:
        return self.scale * self.base.es_numeric(p, epsrel=epsrel) + self.shift

    def dx_lower_bound(self) -> float:
        return self.base.dx_lower_bound()

    def theta_closed(self, p: float) -> float:
        return self.base.theta_closed(p)


def scaled(model: LossModel, scale: float, shift: float = 0.0) -> AffineLossModel:
    """Return the affine transform ``scale * model + shift``."""
    return AffineLossModel(base=model, scale=scale, shift=shift)


FAMILIES: Dict[str, Type[LossModel]] = {
    "uniform": Uniform,
    "normal": Normal,
    "exponential": Exponential,
    "student_t": StudentT,
    "lognormal": LogNormal,
    "gamma": Gamma,
    "weibull": Weibull,
    "pareto_ii": ParetoII,
    "generalized_pareto": GeneralizedPareto,
    "gev": GEV,
}

FAMILY_ALIASES = {
    "exp": "exponential",
    "t": "student_t",
    "studentt": "student_t",
    "ln": "lognormal",
    "pareto": "pareto_ii",
    "lomax": "pareto_ii",
    "gp": "generalized_pareto",
    "gpd": "generalized_pareto",
}

PARAM_ALIASES = {"lambda": "lam", "rate": "lam", "df": "nu", "shape": "alpha"}


def build_model(family: str, params: Optional[Mapping[str, Any]] = None) -> LossModel:
    """Construct a loss model from a family name and keyword parameters."""
    key = family.strip().lower().replace("-", "_")
    key = FAMILY_ALIASES.get(key, key)
    if key not in FAMILIES:
        raise RiskDomainError(f"unknown loss family '{family}' (known: {', '.join(sorted(FAMILIES))})")

    cls = FAMILIES[key]
    names = {f.name for f in fields(cls)}  # type: ignore[arg-type]
    kwargs: Dict[str, float] = {}
    for name, value in (params or {}).items():
        canonical = PARAM_ALIASES.get(name, name)
        if canonical not in names:
            raise RiskDomainError(f"unknown parameter '{name}' for {key} (expected: {', '.join(sorted(names))})")
        try:
            kwargs[canonical] = float(value)
        except (TypeError, ValueError):
            raise RiskDomainError(f"parameter '{name}' of {key} must be numeric (got {value!r})")
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise RiskDomainError(f"invalid parameters for {key}: {exc}") from exc


def parse_model_spec(text: str) -> LossModel:
    """
    Parse a compact model string such as ``pareto_ii:alpha=2,kappa=100``.

    A bare family name uses the family defaults.
    """
    family, _, rest = text.partition(":")
    params: Dict[str, str] = {}
    for item in filter(None, (chunk.strip() for chunk in rest.split(","))):
        name, sep, value = item.partition("=")
        if not sep:
            raise RiskDomainError(f"malformed parameter '{item}' in model spec '{text}' (expected name=value)")
        params[name.strip()] = value.strip()
    return build_model(family, params)


def model_to_dict(model: LossModel) -> Dict[str, Any]:
    if isinstance(model, AffineLossModel):
        return {"family": model.family, "base": model_to_dict(model.base), **model.params()}
    return {"family": model.family, "params": asdict(model)}  # type: ignore[call-overload]


# functional surface


def quantile(model: LossModel, p: float) -> float:
    """VaR_p(X) = F⁻¹(p)."""
    return model.quantile(p)


def mean(model: LossModel) -> float:
    return model.mean()


def es(model: LossModel, p: float) -> float:
    """Expected Shortfall (1/(1-p)) ∫_p^1 F⁻¹(u) du."""
    return model.es(p)


def theta_closed(model: LossModel, p: float) -> float:
    """Closed or semi-closed θ-index of the family at level ``p``."""
    return model.theta_closed(p)


def dx_lower_bound(model: LossModel) -> float:
    return model.dx_lower_bound()


def gp_theta(alpha: float, beta: float, p: float) -> float:
    """θ-index of GP(alpha, beta): (1-p)(alpha VaR_p + beta)/(VaR_p - beta)."""
    return GeneralizedPareto(alpha=alpha, beta=beta).theta_closed(p)
