"""
Exception types raised by the tail risk toolkit.
"""

from typing import Any, Dict, Optional


class TailRiskError(Exception):
    """Base class for all toolkit errors."""


class RiskDomainError(TailRiskError, ValueError):
    """An input lies outside the domain where a quantity is defined."""

    def __init__(self, message: str, bound: Optional[float] = None, row: Optional[int] = None):
        super().__init__(message)
        self.bound = bound
        self.row = row


class ComputationError(TailRiskError, RuntimeError):
    """A numerical procedure failed to produce a trustworthy value."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        details = ", ".join(f"{key}={value}" for key, value in self.diagnostics.items())
        return f"{base} ({details})"


class InfiniteMeanWarning(RuntimeWarning):
    """A constructed loss model has no finite mean."""
