"""
Special functions used by the closed-form loss families.

Thin layer over :mod:`scipy.special` so that every family formula reads in
the same vocabulary (normal cdf/pdf, Student-t, incomplete gamma, li).
"""

import math

import numpy as np
from scipy import special as sc

EULER_GAMMA = float(np.euler_gamma)

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def norm_cdf(x: float) -> float:
    """Standard normal distribution function Φ(x)."""
    return float(sc.ndtr(x))


def norm_sf(x: float) -> float:
    """Standard normal survival function Φ̄(x) = Φ(-x)."""
    return float(sc.ndtr(-x))


def norm_ppf(p: float) -> float:
    """Standard normal quantile Φ⁻¹(p)."""
    return float(sc.ndtri(p))


def norm_pdf(x: float) -> float:
    """Standard normal density φ(x)."""
    return math.exp(-0.5 * x * x) / _SQRT_2PI


def t_cdf(nu: float, x: float) -> float:
    """Student-t distribution function with ``nu`` degrees of freedom."""
    return float(sc.stdtr(nu, x))


def t_ppf(nu: float, p: float) -> float:
    """Student-t quantile with ``nu`` degrees of freedom."""
    return float(sc.stdtrit(nu, p))


def t_pdf(nu: float, x: float) -> float:
    """Student-t density with ``nu`` degrees of freedom."""
    log_norm = sc.gammaln((nu + 1.0) / 2.0) - sc.gammaln(nu / 2.0) - 0.5 * math.log(nu * math.pi)
    return float(math.exp(log_norm - (nu + 1.0) / 2.0 * math.log1p(x * x / nu)))


def gamma(x: float) -> float:
    """Euler gamma function Γ(x)."""
    return float(sc.gamma(x))


def gammainc(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x)."""
    return float(sc.gammainc(a, x))


def gammaincc(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x)."""
    return float(sc.gammaincc(a, x))


def gammaincinv(a: float, p: float) -> float:
    """Inverse of the regularized lower incomplete gamma in its second argument."""
    return float(sc.gammaincinv(a, p))


def lower_gamma(a: float, x: float) -> float:
    """Non-regularized lower incomplete gamma γ(a, x)."""
    return float(sc.gammainc(a, x) * sc.gamma(a))


def logarithmic_integral(x: float) -> float:
    """
    Logarithmic integral li(x) for 0 < x < 1.

    Uses li(x) = Ei(ln x); the principal-value point x = 1 never occurs here.
    """
    if not 0.0 < x < 1.0:
        raise ValueError(f"logarithmic integral is only evaluated on (0, 1), got {x}")
    return float(sc.expi(math.log(x)))
