"""
Declarative JSON run configurations.

Each file model validates the raw document and converts it into the domain
objects the pipelines consume. Marginals are written either as
``{"family": ..., "params": {...}}`` objects or as compact strings such as
``"pareto_ii:alpha=2,kappa=100"``.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Type, TypeVar, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .claims import BacktestConfig
from .constants import (
    DEFAULT_LAMBDA_UNDER,
    DEFAULT_LEVELS,
    DEFAULT_SCENARIO_SIZE,
    STRESS_CORRELATIONS,
    STRESS_GUMBEL_XI,
    STRESS_MARGINALS,
    STRESS_REPETITIONS,
    STRESS_SAMPLE_SIZE,
    STRESS_T_DOF,
)
from .copulas import CopulaSpec, ScenarioConfig
from .distributions import LossModel, build_model, parse_model_spec
from .exceptions import RiskDomainError

logger = logging.getLogger(__name__)

ConfigModel = TypeVar("ConfigModel", bound=BaseModel)


class MarginalConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: Optional[str] = None
    params: Dict[str, float] = Field(default_factory=dict)
    spec: Optional[str] = None
    label: Optional[str] = None

    @model_validator(mode="before")
    @classmethod
    def _accept_compact_string(cls, data: Any) -> Any:
        if isinstance(data, str):
            return {"spec": data}
        return data

    @model_validator(mode="after")
    def _require_family(self) -> "MarginalConfig":
        if (self.family is None) == (self.spec is None):
            raise ValueError("give either 'family' (with 'params') or a compact 'spec' string")
        return self

    def to_model(self) -> LossModel:
        if self.spec is not None:
            return parse_model_spec(self.spec)
        return build_model(self.family or "", self.params)

    def display_label(self) -> str:
        if self.label:
            return self.label
        return self.family or (self.spec or "").partition(":")[0]


class CopulaConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["gaussian", "t", "gumbel"]
    r: float = 0.0
    nu: int = STRESS_T_DOF
    xi: float = 1.0

    def to_spec(self, dim: int) -> CopulaSpec:
        return CopulaSpec(kind=self.kind, dim=dim, r=self.r, nu=self.nu, xi=self.xi)


def _default_stress_marginals() -> List[MarginalConfig]:
    return [MarginalConfig(family=family, params=params, label=label) for label, family, params in STRESS_MARGINALS]


def _default_stress_copulas() -> List[CopulaConfig]:
    grid = [CopulaConfig(kind="gaussian", r=r) for r in STRESS_CORRELATIONS]
    grid += [CopulaConfig(kind="t", r=r, nu=STRESS_T_DOF) for r in STRESS_CORRELATIONS]
    grid += [CopulaConfig(kind="gumbel", xi=xi) for xi in STRESS_GUMBEL_XI]
    return grid


class ScenarioFileConfig(BaseModel):
    """Allocation scenario: marginals, copula, n, levels, seed."""

    model_config = ConfigDict(extra="forbid")

    marginals: List[MarginalConfig] = Field(min_length=1)
    labels: Optional[List[str]] = None
    copula: CopulaConfig
    n: int = DEFAULT_SCENARIO_SIZE
    levels: List[float] = Field(default_factory=lambda: list(DEFAULT_LEVELS), min_length=1)
    seed: int = Field(default=0, ge=0)
    var_scheme: Literal["linear", "kernel"] = "kernel"
    bandwidth: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _labels_match(self) -> "ScenarioFileConfig":
        if self.labels is not None and len(self.labels) != len(self.marginals):
            raise ValueError(f"{len(self.labels)} labels given for {len(self.marginals)} marginals")
        return self

    def to_scenario(self) -> ScenarioConfig:
        labels = self.labels or [marginal.display_label() for marginal in self.marginals]
        return ScenarioConfig(
            marginals=tuple(marginal.to_model() for marginal in self.marginals),
            copula=self.copula.to_spec(len(self.marginals)),
            n=self.n,
            levels=tuple(self.levels),
            seed=self.seed,
            labels=tuple(labels),
        )


class StressFileConfig(BaseModel):
    """Subadditivity stress grid; every key is optional."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    marginals: List[MarginalConfig] = Field(default_factory=_default_stress_marginals, min_length=1)
    copulas: List[CopulaConfig] = Field(default_factory=_default_stress_copulas, min_length=1)
    n: int = STRESS_SAMPLE_SIZE
    repetitions: int = Field(default=STRESS_REPETITIONS, alias="B", ge=1)
    levels: List[float] = Field(default_factory=lambda: list(DEFAULT_LEVELS), min_length=1)
    seed: int = Field(default=0, ge=0)

    def to_marginals(self) -> List[LossModel]:
        return [marginal.to_model() for marginal in self.marginals]

    def to_copulas(self) -> List[CopulaSpec]:
        return [copula.to_spec(len(self.marginals)) for copula in self.copulas]


class WindowGrid(BaseModel):
    model_config = ConfigDict(extra="forbid")

    window_var: List[int] = Field(min_length=1)
    window_theta: List[int] = Field(min_length=1)


class BacktestFileConfig(BaseModel):
    """Backtest settings with an optional window-tuning grid and column mapping."""

    model_config = ConfigDict(extra="forbid")

    target_years: Tuple[int, int]
    level: float = 0.95
    window_var: int = 1
    window_theta: int = 1
    lambda_under: float = DEFAULT_LAMBDA_UNDER
    tune: Optional[WindowGrid] = None
    columns: Optional[Dict[str, str]] = None

    @field_validator("columns")
    @classmethod
    def _known_roles(cls, value: Optional[Dict[str, str]]) -> Optional[Dict[str, str]]:
        if value is not None:
            unknown = set(value) - {"year", "amount"}
            if unknown:
                raise ValueError(f"unknown column roles: {', '.join(sorted(unknown))} (expected year, amount)")
        return value

    def to_backtest(self) -> BacktestConfig:
        return BacktestConfig(
            target_years=self.target_years,
            level=self.level,
            window_var=self.window_var,
            window_theta=self.window_theta,
            lambda_under=self.lambda_under,
        )


def _format_errors(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(item) for item in error["loc"]) or "<root>"
        parts.append(f"{location}: {error['msg']}")
    return "; ".join(parts)


def parse_config(data: Union[str, bytes, Dict[str, Any]], model: Type[ConfigModel]) -> ConfigModel:
    """Validate a JSON document or an already decoded mapping."""
    try:
        if isinstance(data, (str, bytes)):
            return model.model_validate_json(data)
        return model.model_validate(data)
    except ValidationError as exc:
        raise RiskDomainError(f"invalid {model.__name__}: {_format_errors(exc)}") from exc


def load_config(path: Union[str, Path], model: Type[ConfigModel]) -> ConfigModel:
    """Read and validate a JSON config file."""
    path = Path(path)
    if not path.is_file():
        raise RiskDomainError(f"config file not found: {path}")
    logger.debug("loading %s from %s", model.__name__, path)
    return parse_config(path.read_text(encoding="utf-8"), model)
