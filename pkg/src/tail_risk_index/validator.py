"""
Input validation for risk measure calculations.

The ``validate_*`` functions report problems as dictionaries with ``valid``,
``value``, ``errors`` and ``warnings`` keys. The ``require_*`` helpers wrap
them and raise :class:`RiskDomainError` on the first failed check.
"""

import math
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from .exceptions import RiskDomainError

Number = Union[float, int]


def validate_numeric_value(
    value: Any,
    name: str,
    min_val: float = -math.inf,
    max_val: float = math.inf,
    min_inclusive: bool = True,
    max_inclusive: bool = True,
    allow_infinite: bool = False,
) -> Dict[str, Any]:
    """Validate a single numeric value against an interval."""
    errors: List[str] = []
    warnings: List[str] = []

    if isinstance(value, bool):
        return {
            "valid": False,
            "value": value,
            "errors": [f"{name} must be a numeric value, got bool"],
            "warnings": [],
        }
    try:
        float_value = float(value)
    except (ValueError, TypeError):
        return {
            "valid": False,
            "value": value,
            "errors": [f"{name} must be a numeric value, got {type(value).__name__}"],
            "warnings": [],
        }

    if math.isnan(float_value):
        errors.append(f"{name} must not be NaN")
    elif math.isinf(float_value) and not allow_infinite:
        errors.append(f"{name} must be finite (got {float_value})")
    else:
        below = float_value < min_val if min_inclusive else float_value <= min_val
        above = float_value > max_val if max_inclusive else float_value >= max_val
        if below or above:
            left = "[" if min_inclusive else "("
            right = "]" if max_inclusive else ")"
            errors.append(f"{name} must lie in {left}{min_val}, {max_val}{right} (got {float_value})")

    return {
        "valid": len(errors) == 0,
        "value": float_value,
        "errors": errors,
        "warnings": warnings,
    }


def validate_probability(p: Any, name: str = "p") -> Dict[str, Any]:
    """Validate a probability level in the open interval (0, 1)."""
    result = validate_numeric_value(p, name, 0.0, 1.0, min_inclusive=False, max_inclusive=False)
    if result["valid"] and result["value"] > 0.9999:
        result["warnings"].append(f"{name}={result['value']} sits far in the tail; empirical estimates need very large samples")
    return result


def validate_levels(levels: Iterable[Any]) -> Dict[str, Any]:
    """Validate a list of probability levels."""
    values: List[float] = []
    errors: List[str] = []
    warnings: List[str] = []
    for index, level in enumerate(levels):
        result = validate_probability(level, name=f"levels[{index}]")
        errors.extend(result["errors"])
        warnings.extend(result["warnings"])
        if result["valid"]:
            values.append(result["value"])

    if not values and not errors:
        errors.append("at least one probability level is required")
    if len(set(values)) != len(values):
        warnings.append("duplicate probability levels will be evaluated more than once")

    return {
        "valid": len(errors) == 0,
        "value": values,
        "errors": errors,
        "warnings": warnings,
    }


def validate_sample_values(values: Any, name: str = "sample", min_size: int = 2) -> Dict[str, Any]:
    """Validate a vector of observations."""
    errors: List[str] = []
    warnings: List[str] = []
    try:
        array = np.asarray(values, dtype=float)
    except (ValueError, TypeError):
        return {
            "valid": False,
            "value": values,
            "errors": [f"{name} must contain numeric values"],
            "warnings": [],
        }

    if array.ndim != 1:
        errors.append(f"{name} must be one-dimensional (got shape {array.shape})")
    elif array.size < min_size:
        errors.append(f"{name} needs at least {min_size} observations (got {array.size})")
    elif not np.all(np.isfinite(array)):
        bad = int(np.count_nonzero(~np.isfinite(array)))
        errors.append(f"{name} contains {bad} non-finite values")
    elif np.all(array == array[0]):
        warnings.append(f"{name} is constant")

    return {
        "valid": len(errors) == 0,
        "value": array,
        "errors": errors,
        "warnings": warnings,
    }


def validate_correlation(r: Any, dim: int) -> Dict[str, Any]:
    """Validate the off-diagonal value of a compound-symmetric correlation matrix."""
    if dim < 2:
        return validate_numeric_value(r, "r", -1.0, 1.0, min_inclusive=True, max_inclusive=False)
    lower = -1.0 / (dim - 1)
    result = validate_numeric_value(r, "r", lower, 1.0, min_inclusive=False, max_inclusive=False)
    if result["errors"]:
        result["errors"] = [
            f"correlation r={r} does not give a positive definite {dim}x{dim} compound-symmetric matrix "
            f"(need {lower:.6g} < r < 1)"
        ]
    return result


def require(result: Dict[str, Any], bound: Optional[float] = None) -> Any:
    """Return the validated value or raise with the collected error messages."""
    if not result["valid"]:
        raise RiskDomainError("; ".join(result["errors"]), bound=bound)
    return result["value"]


def require_probability(p: Any, name: str = "p") -> float:
    return require(validate_probability(p, name))


def require_positive(value: Any, name: str, allow_infinite: bool = False) -> float:
    return require(
        validate_numeric_value(value, name, 0.0, math.inf, min_inclusive=False, allow_infinite=allow_infinite)
    )


def require_greater(value: Any, name: str, lower: float) -> float:
    return require(validate_numeric_value(value, name, lower, math.inf, min_inclusive=False))


def require_finite(value: Any, name: str) -> float:
    return require(validate_numeric_value(value, name))


def require_levels(levels: Sequence[Number]) -> List[float]:
    return require(validate_levels(levels))


def require_count(value: Any, name: str, minimum: int) -> int:
    """Validate an integer count bounded below."""
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise RiskDomainError(f"{name} must be an integer (got {value!r})")
    if value < minimum:
        raise RiskDomainError(f"{name} must be at least {minimum} (got {value})")
    return int(value)
