"""
Claims ingestion, per-year statistics and one-year-ahead VaR backtesting.

Two predictors are compared for each target year t:

* VaR-hat, the empirical quantile of the claims pooled over the
  ``window_var`` years preceding t;
* PELVaR-hat, FES built from the ES and mean of that same pool with the
  θ-index estimated on the ``window_theta`` years preceding t.

With equal windows the two coincide. Window pairs are tuned under an
asymmetric loss that charges underestimation ``lambda_under`` times more
than overestimation.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Literal, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats

from .constants import CLAIMS_COLUMN_ALIASES, DEFAULT_LAMBDA_UNDER, DEFAULT_LEVELS, MIN_CLAIMS_PER_YEAR
from .empirical import (
    KernelConfig,
    Sample,
    empirical_dx_bound,
    empirical_es,
    empirical_quantile,
    empirical_theta,
    smoothed_theta_curve,
)
from .exceptions import RiskDomainError
from .measures import fes
from .validator import require, require_count, require_levels, require_probability, validate_numeric_value

logger = logging.getLogger(__name__)

Predictor = Literal["var", "pelvar"]
DELIMITERS = {"csv": ",", "tsv": "\t"}


@dataclass(frozen=True, eq=False)
class ClaimsTable:
    """Positive claim amounts indexed by year."""

    frame: pd.DataFrame
    source: Optional[str] = None
    index: Dict[int, np.ndarray] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        frame = self.frame.loc[:, ["year", "amount"]].copy()
        if frame.empty:
            raise RiskDomainError("a claims table needs at least one record")
        frame["year"] = frame["year"].astype(int)
        frame["amount"] = frame["amount"].astype(float)
        if not np.all(np.isfinite(frame["amount"])) or (frame["amount"] <= 0).any():
            raise RiskDomainError("claim amounts must be finite and positive")
        index: Dict[int, np.ndarray] = {}
        for year, group in frame.groupby("year", sort=True):
            amounts = np.sort(group["amount"].to_numpy(dtype=float))
            amounts.setflags(write=False)
            index[int(year)] = amounts
        object.__setattr__(self, "frame", frame.reset_index(drop=True))
        object.__setattr__(self, "index", index)

    @classmethod
    def from_records(cls, years: Iterable[int], amounts: Iterable[float], source: Optional[str] = None) -> "ClaimsTable":
        return cls(pd.DataFrame({"year": list(years), "amount": list(amounts)}), source=source)

    @property
    def years(self) -> List[int]:
        return list(self.index)

    def __len__(self) -> int:
        return int(len(self.frame))

    def amounts(self, year: int) -> np.ndarray:
        """Sorted claims of ``year``."""
        if year not in self.index:
            raise RiskDomainError(f"no claims recorded for year {year} (available: {self._coverage()})")
        return self.index[year]

    def pooled(self, years: Iterable[int]) -> np.ndarray:
        """Claims of every year in ``years``; each year must be present."""
        chunks = [self.amounts(year) for year in years]
        if not chunks:
            raise RiskDomainError("cannot pool an empty range of years")
        return np.concatenate(chunks)

    def _coverage(self) -> str:
        years = self.years
        return f"{years[0]}-{years[-1]}" if years else "none"


@dataclass
class ClaimStatistics:
    """Descriptive statistics of one year of claims."""

    year: int
    records: int
    mean: float
    sd: float
    skewness: Optional[float]
    kurtosis: Optional[float]
    iqr: float
    cv: float
    min: float
    max: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class AnnualRiskCurves:
    """Empirical VaR, ES and θ-index curves of one year."""

    year: int
    levels: List[float]
    var: List[float]
    es: List[Optional[float]]
    theta: List[Optional[float]]
    smoothed_theta: List[Optional[float]]
    dx_bound: float

    def to_rows(self) -> List[Dict[str, Any]]:
        return [
            {"year": self.year, "p": p, "var": v, "es": e, "theta": t, "smoothed_theta": s}
            for p, v, e, t, s in zip(self.levels, self.var, self.es, self.theta, self.smoothed_theta)
        ]


@dataclass(frozen=True)
class BacktestConfig:
    """
    Target years, level and look-back windows of a one-year-ahead backtest.

    ``target_years`` is an inclusive (first, last) pair. The windows count
    the years immediately preceding each target year.
    """

    target_years: Tuple[int, int]
    level: float = 0.95
    window_var: int = 1
    window_theta: int = 1
    lambda_under: float = DEFAULT_LAMBDA_UNDER

    def __post_init__(self) -> None:
        first, last = (int(year) for year in self.target_years)
        if first > last:
            raise RiskDomainError(f"target years {first}-{last} are reversed")
        object.__setattr__(self, "target_years", (first, last))
        object.__setattr__(self, "level", require_probability(self.level, "level"))
        require_count(self.window_var, "window_var", 1)
        require_count(self.window_theta, "window_theta", 1)
        lam = require(validate_numeric_value(self.lambda_under, "lambda_under", 1.0, math.inf, allow_infinite=True))
        object.__setattr__(self, "lambda_under", lam)

    def years(self) -> range:
        return range(self.target_years[0], self.target_years[1] + 1)

    def with_windows(self, window_var: int, window_theta: int) -> "BacktestConfig":
        return BacktestConfig(self.target_years, self.level, window_var, window_theta, self.lambda_under)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "target_years": list(self.target_years),
            "level": self.level,
            "window_var": self.window_var,
            "window_theta": self.window_theta,
            "lambda_under": self.lambda_under,
        }


@dataclass
class PredictionRecord:
    """Actual and predicted VaR of one target year."""

    year: int
    actual_var: float
    predicted_var_hat: float
    predicted_pelvar_hat: float
    theta_hat: float

    @property
    def var_error(self) -> float:
        return self.predicted_var_hat - self.actual_var

    @property
    def pelvar_error(self) -> float:
        return self.predicted_pelvar_hat - self.actual_var

    def error(self, predictor: Predictor) -> float:
        return self.var_error if predictor == "var" else self.pelvar_error

    def to_dict(self) -> Dict[str, Any]:
        return {
            "year": self.year,
            "actual_var": self.actual_var,
            "predicted_var_hat": self.predicted_var_hat,
            "predicted_pelvar_hat": self.predicted_pelvar_hat,
            "theta_hat": self.theta_hat,
            "var_error": self.var_error,
            "pelvar_error": self.pelvar_error,
            "var_abs_error": abs(self.var_error),
            "pelvar_abs_error": abs(self.pelvar_error),
        }


@dataclass
class WindowScore:
    """Score of one (window_var, window_theta) pair."""

    window_var: int
    window_theta: int
    loss: float
    mae: float
    mean_bias: float
    underestimations: int
    feasible: bool = True
    reason: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class TuningResult:
    best: BacktestConfig
    best_score: WindowScore
    scores: List[WindowScore]
    predictor: str


def _resolve_columns(header: List[str], columns: Optional[Mapping[str, str]]) -> Dict[str, int]:
    normalized = [name.strip().lower() for name in header]
    positions: Dict[str, int] = {}
    for role in ("year", "amount"):
        if columns and role in columns:
            candidates = [columns[role].strip().lower()]
        else:
            candidates = CLAIMS_COLUMN_ALIASES[role]
        found = next((normalized.index(name) for name in candidates if name in normalized), None)
        if found is None:
            raise RiskDomainError(
                f"claims file has no '{role}' column (looked for {', '.join(candidates)}; header: {', '.join(header)})",
                row=1,
            )
        positions[role] = found
    return positions


def _cell(value: Any) -> str:
    return "" if pd.isna(value) else str(value)


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _parse_row(cells: List[str], positions: Dict[str, int], line: int) -> Tuple[int, float]:
    try:
        year_text = cells[positions["year"]].strip()
        amount_text = cells[positions["amount"]].strip()
    except IndexError:
        raise RiskDomainError(f"row {line}: expected at least {max(positions.values()) + 1} columns", row=line)
    try:
        year_value = float(year_text)
        amount = float(amount_text)
    except ValueError:
        raise RiskDomainError(f"row {line}: malformed record '{','.join(cells)}'", row=line)
    if not year_value.is_integer():
        raise RiskDomainError(f"row {line}: year must be an integer (got {year_text})", row=line)
    if not math.isfinite(amount) or amount <= 0:
        raise RiskDomainError(f"row {line}: claim amount must be positive (got {amount_text})", row=line)
    return int(year_value), amount


def load_claims(
    path: Union[str, Path],
    format: str = "csv",
    columns: Optional[Mapping[str, str]] = None,
) -> ClaimsTable:
    """
    Load (year, amount) records from a delimited text file.

    A first row that is not fully numeric is read as a header and the year
    and amount columns are located by name (``columns`` overrides the
    defaults). Without a header the first two columns are used. Row numbers
    in errors are 1-based file line numbers.
    """
    path = Path(path)
    if format not in DELIMITERS:
        raise RiskDomainError(f"unsupported claims format '{format}' (expected one of {', '.join(DELIMITERS)})")
    if not path.is_file():
        raise RiskDomainError(f"claims file not found: {path}")

    try:
        raw = pd.read_csv(
            path,
            sep=DELIMITERS[format],
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        raise RiskDomainError(f"claims file {path} is empty")
    except pd.errors.ParserError as exc:
        raise RiskDomainError(f"claims file {path} could not be parsed: {exc}") from exc

    rows = [[_cell(value) for value in record] for record in raw.itertuples(index=False, name=None)]
    lines = [(number, cells) for number, cells in enumerate(rows, start=1) if any(cell.strip() for cell in cells)]
    if not lines:
        raise RiskDomainError(f"claims file {path} is empty")

    _, first_cells = lines[0]
    if all(_is_number(cell) for cell in first_cells if cell.strip()):
        if columns:
            raise RiskDomainError(f"claims file {path} has no header, so column names cannot be mapped")
        positions = {"year": 0, "amount": 1}
    else:
        positions = _resolve_columns(first_cells, columns)
        lines = lines[1:]
        if not lines:
            raise RiskDomainError(f"claims file {path} has a header but no records")

    years: List[int] = []
    amounts: List[float] = []
    for line, cells in lines:
        year, amount = _parse_row(cells, positions, line)
        years.append(year)
        amounts.append(amount)

    table = ClaimsTable.from_records(years, amounts, source=str(path))
    logger.info("loaded %d claims over %d years from %s", len(table), len(table.years), path)
    return table


def describe(table: ClaimsTable, year: int) -> ClaimStatistics:
    """
    Mean, sd (ddof=1), skewness, raw kurtosis m4/m2², type-7 IQR, CV in percent, min and max.

    Skewness and kurtosis are None for a constant year.
    """
    values = table.amounts(year)
    n = int(values.size)
    mean = float(np.mean(values))
    sd = float(np.std(values, ddof=1)) if n > 1 else 0.0
    constant = bool(np.all(values == values[0]))
    skewness = None if constant or n < 2 else float(stats.skew(values, bias=True))
    kurtosis = None if constant or n < 2 else float(stats.kurtosis(values, fisher=False, bias=True))
    q75, q25 = np.percentile(values, [75, 25])
    return ClaimStatistics(
        year=year,
        records=n,
        mean=mean,
        sd=sd,
        skewness=skewness,
        kurtosis=kurtosis,
        iqr=float(q75 - q25),
        cv=sd / mean * 100.0,
        min=float(values[0]),
        max=float(values[-1]),
    )


def describe_all(table: ClaimsTable) -> List[ClaimStatistics]:
    return [describe(table, year) for year in table.years]


def annual_risk_curves(
    table: ClaimsTable,
    year: int,
    levels: Sequence[float] = DEFAULT_LEVELS,
    kernel: Optional[KernelConfig] = None,
) -> AnnualRiskCurves:
    """
    Empirical VaR, ES and θ curves of one year.

    θ is reported only above the empirical D_X bound; ES is None where no
    claim exceeds the quantile.
    """
    levels = require_levels(levels)
    values = table.amounts(year)
    if values.size < MIN_CLAIMS_PER_YEAR:
        raise RiskDomainError(
            f"year {year} has {values.size} claims; risk curves need at least {MIN_CLAIMS_PER_YEAR}"
        )
    s = Sample(values)
    var = [empirical_quantile(s, p) for p in levels]
    es_curve: List[Optional[float]] = []
    theta_curve: List[Optional[float]] = []
    for p in levels:
        try:
            es_curve.append(empirical_es(s, p))
        except RiskDomainError:
            es_curve.append(None)
        try:
            theta_curve.append(empirical_theta(s, p))
        except RiskDomainError:
            theta_curve.append(None)
    try:
        smoothed = [value for _, value in smoothed_theta_curve(s, levels, kernel)]
    except RiskDomainError as exc:
        logger.info("year %d: no smoothed θ curve (%s)", year, exc)
        smoothed = [None] * len(levels)
    return AnnualRiskCurves(
        year=year,
        levels=list(levels),
        var=var,
        es=es_curve,
        theta=theta_curve,
        smoothed_theta=smoothed,
        dx_bound=empirical_dx_bound(s),
    )


def _window(table: ClaimsTable, year: int, width: int, what: str) -> Sample:
    span = range(year - width, year)
    try:
        return Sample(table.pooled(span))
    except RiskDomainError as exc:
        raise RiskDomainError(f"{what} window {span.start}-{span.stop - 1} for target year {year} is incomplete: {exc}")


def predict_var(table: ClaimsTable, cfg: BacktestConfig) -> List[PredictionRecord]:
    """One-year-ahead VaR-hat and PELVaR-hat for every target year."""
    p = cfg.level
    records = []
    for year in cfg.years():
        actual = empirical_quantile(Sample(table.amounts(year)), p)
        base = _window(table, year, cfg.window_var, "VaR")
        theta_pool = base if cfg.window_theta == cfg.window_var else _window(table, year, cfg.window_theta, "θ")
        theta_hat = empirical_theta(theta_pool, p)
        records.append(
            PredictionRecord(
                year=year,
                actual_var=actual,
                predicted_var_hat=empirical_quantile(base, p),
                predicted_pelvar_hat=fes(base, p, theta_hat),
                theta_hat=theta_hat,
            )
        )
    logger.debug("predicted %d years with windows (%d, %d)", len(records), cfg.window_var, cfg.window_theta)
    return records


def asymmetric_loss(error: float, lambda_under: float) -> float:
    """e for overestimation, lambda_under |e| for underestimation."""
    return error if error >= 0 else lambda_under * -error


def score_predictions(
    records: Sequence[PredictionRecord],
    lambda_under: float = DEFAULT_LAMBDA_UNDER,
    predictor: Predictor = "pelvar",
) -> Dict[str, float]:
    """Total asymmetric loss, MAE, mean signed bias and underestimation count."""
    if not records:
        raise RiskDomainError("no predictions to score")
    errors = np.array([record.error(predictor) for record in records], dtype=float)
    under = int(np.count_nonzero(errors < 0))
    if math.isinf(lambda_under):
        loss = math.inf if under else float(np.sum(errors))
    else:
        loss = float(sum(asymmetric_loss(e, lambda_under) for e in errors))
    return {
        "loss": loss,
        "mae": float(np.mean(np.abs(errors))),
        "mean_bias": float(np.mean(errors)),
        "underestimations": under,
    }


def tune_windows(
    table: ClaimsTable,
    cfg: BacktestConfig,
    var_windows: Sequence[int],
    theta_windows: Sequence[int],
    predictor: Predictor = "pelvar",
) -> TuningResult:
    """
    Grid search over window pairs minimizing the asymmetric loss.

    Ties go to longer windows. With ``lambda_under = inf`` the pair with the
    fewest underestimations wins and the MAE breaks ties. Every grid point
    appears in the score table, infeasible ones flagged with the reason.
    """
    if len(cfg.years()) < 3:
        raise RiskDomainError(f"window tuning needs at least 3 target years (got {len(cfg.years())})")
    if not var_windows or not theta_windows:
        raise RiskDomainError("window grids must not be empty")

    scores: List[WindowScore] = []
    for window_var in sorted(set(var_windows)):
        for window_theta in sorted(set(theta_windows)):
            candidate = cfg.with_windows(window_var, window_theta)
            try:
                records = predict_var(table, candidate)
            except RiskDomainError as exc:
                scores.append(WindowScore(window_var, window_theta, math.nan, math.nan, math.nan, 0, False, str(exc)))
                continue
            summary = score_predictions(records, cfg.lambda_under, predictor)
            scores.append(
                WindowScore(
                    window_var=window_var,
                    window_theta=window_theta,
                    loss=summary["loss"],
                    mae=summary["mae"],
                    mean_bias=summary["mean_bias"],
                    underestimations=summary["underestimations"],
                )
            )

    feasible = [score for score in scores if score.feasible]
    if not feasible:
        raise RiskDomainError(
            f"no feasible window pair for target years {cfg.target_years[0]}-{cfg.target_years[1]}: "
            f"{scores[0].reason}"
        )

    if math.isinf(cfg.lambda_under):
        best = min(feasible, key=lambda s: (s.underestimations, s.mae, -s.window_var, -s.window_theta))
    else:
        best = min(feasible, key=lambda s: (s.loss, -s.window_var, -s.window_theta))
    logger.info(
        "selected windows var=%d theta=%d (loss %.6g over %d pairs)",
        best.window_var,
        best.window_theta,
        best.loss,
        len(scores),
    )
    return TuningResult(
        best=cfg.with_windows(best.window_var, best.window_theta),
        best_score=best,
        scores=scores,
        predictor=predictor,
    )
