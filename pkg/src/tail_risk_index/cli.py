"""
Command line interface for the Tail Risk Index toolkit.

Data goes to stdout (or to files under ``--out``); diagnostics and logs go
to stderr. Exit codes: 0 success, 2 usage or domain error, 3 computation
error.
"""

import functools
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import click
import numpy as np
import pandas as pd
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel

from . import __version__
from .allocation import VAR_SCHEMES
from .claims import describe_all, load_claims, predict_var, tune_windows
from .config import BacktestFileConfig, ScenarioFileConfig, StressFileConfig, load_config, parse_config
from .constants import (
    DEFAULT_LEVELS,
    DEFAULT_SCENARIO_SIZE,
    DEPENDENCE_LEVELS,
    OUTPUT_FORMATS,
    SCENARIO_PRESETS,
    STRESS_CORRELATIONS,
    STRESS_GUMBEL_XI,
    STRESS_MARGINALS,
    THETA_TABLE_COLUMNS,
)
from .copulas import run_allocation_scenario, run_stress
from .distributions import build_model, parse_model_spec
from .empirical import Sample
from .exceptions import ComputationError, RiskDomainError
from .measures import risk_curve
from .reporter import RunManifest, generate_report, save_results
from .validator import require_levels

logger = logging.getLogger(__name__)

console = Console()
err_console = Console(stderr=True)

EXIT_DOMAIN = 2
EXIT_COMPUTATION = 3


def _configure_logging(verbose: bool) -> None:
    handler = RichHandler(console=err_console, show_time=False, show_path=False)
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[handler],
        force=True,
    )


def _parse_levels(ctx: click.Context, param: click.Parameter, value: Optional[str]) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        return require_levels([float(item) for item in value.split(",") if item.strip()])
    except (ValueError, RiskDomainError) as exc:
        raise click.BadParameter(str(exc))


def _parse_windows(ctx: click.Context, param: click.Parameter, value: Optional[str]) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers (got '{value}')")


def output_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """Shared --out, --format and --verbose options."""

    @click.option("--out", "-o", "out_dir", type=click.Path(file_okay=False), help="Directory for data files and manifests")
    @click.option("--format", "output_format", type=click.Choice(OUTPUT_FORMATS), default="csv", help="Output format")
    @click.option("--verbose", "-v", is_flag=True, help="Log numerical details to stderr")
    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        _configure_logging(kwargs["verbose"])
        return func(*args, **kwargs)

    return wrapper


def run_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """Shared --seed and --threads options; commands without random draws or workers only record them."""
    func = click.option("--threads", type=click.IntRange(min=1), help="Worker thread cap")(func)
    return click.option("--seed", type=int, help="Random seed")(func)


def handle_errors(func: Callable[..., Any]) -> Callable[..., Any]:
    """Map toolkit exceptions onto exit codes with a stderr diagnostic."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except RiskDomainError as exc:
            err_console.print(f"[red]Error:[/red] {exc}", highlight=False)
            raise SystemExit(EXIT_DOMAIN)
        except ComputationError as exc:
            err_console.print(f"[red]Computation failed:[/red] {exc}", highlight=False)
            raise SystemExit(EXIT_COMPUTATION)

    return wrapper


def _emit(
    rows: List[Dict[str, Any]],
    output_format: str,
    out_dir: Optional[str],
    name: str,
    manifest: RunManifest,
    title: Optional[str] = None,
    payload: Optional[Any] = None,
    footnotes: Sequence[str] = (),
) -> None:
    click.echo(generate_report(rows, output_format, title=title, payload=payload, footnotes=footnotes), nl=False)
    if out_dir:
        path = save_results(rows, out_dir, name, output_format, manifest=manifest, payload=payload)
        err_console.print(f"[bold green]✓[/bold green] Results saved to: {path}", highlight=False)


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """
    Tail Risk Index

    VaR, Expected Shortfall, Flexible Expected Shortfall, the θ-index and
    PELVaR for parametric loss models, samples, simulated portfolios and
    insurance claims.
    """


@main.command("theta-table")
@click.option("--family", "families", multiple=True, help="Model spec, e.g. 'pareto_ii:alpha=2' (repeatable)")
@click.option("--levels", callback=_parse_levels, help="Comma-separated probability levels")
@run_options
@output_options
@handle_errors
def theta_table(
    families: Sequence[str],
    levels: Optional[List[float]],
    seed: Optional[int],
    threads: Optional[int],
    out_dir: Optional[str],
    output_format: str,
    verbose: bool,
) -> None:
    """Closed-form θ-index of standard loss models at several levels."""
    levels = levels or list(DEFAULT_LEVELS)
    if families:
        columns = [(spec, parse_model_spec(spec)) for spec in families]
    else:
        columns = [(label, build_model(family, params)) for label, family, params in THETA_TABLE_COLUMNS]

    rows = []
    outside = False
    for p in levels:
        row: Dict[str, Any] = {"p": p}
        for label, model in columns:
            try:
                row[label] = model.theta_closed(p)
            except RiskDomainError:
                row[label] = None
                outside = True
        rows.append(row)

    footnotes = ["n/a: level below the model's D_X bound, θ-index undefined"] if outside else []
    manifest = RunManifest(
        command="theta-table",
        config={
            "levels": levels,
            "columns": {label: model.describe() for label, model in columns},
            "threads": threads,
        },
        seed=seed,
    )
    _emit(rows, output_format, out_dir, "theta_table", manifest, title="θ-index", footnotes=footnotes)


def _read_values(path: str, year: Optional[int]) -> np.ndarray:
    if year is not None:
        return np.asarray(load_claims(path).amounts(year))
    try:
        frame = pd.read_csv(path, header=None)
    except pd.errors.EmptyDataError:
        raise RiskDomainError(f"sample file {path} is empty")
    column = pd.to_numeric(frame.iloc[:, -1], errors="coerce")
    if pd.isna(column.iloc[0]):
        column = column.iloc[1:]
    if column.isna().any():
        bad = int(column.index[column.isna()][0]) + 1
        raise RiskDomainError(f"row {bad} of {path} is not numeric", row=bad)
    return column.to_numpy(dtype=float)


@main.command()
@click.option("--model", "model_spec", help="Model spec, e.g. 'lognormal:sigma=1'")
@click.option("--sample", "sample_path", type=click.Path(exists=True, dir_okay=False), help="File of observations")
@click.option("--year", type=int, help="Read the sample as a claims file and use this year")
@click.option("--p-min", type=float, default=0.9, show_default=True)
@click.option("--p-max", type=float, default=0.995, show_default=True)
@click.option("--step", type=float, default=0.005, show_default=True)
@click.option("--flexibility", type=float, help="Flexibility θ* for the FES column (default: the θ-index)")
@run_options
@output_options
@handle_errors
def curves(
    model_spec: Optional[str],
    sample_path: Optional[str],
    year: Optional[int],
    p_min: float,
    p_max: float,
    step: float,
    flexibility: Optional[float],
    seed: Optional[int],
    threads: Optional[int],
    out_dir: Optional[str],
    output_format: str,
    verbose: bool,
) -> None:
    """VaR, ES, θ-index, FES and PELVaR over a grid of levels."""
    if (model_spec is None) == (sample_path is None):
        raise click.UsageError("give exactly one of --model or --sample")
    if step <= 0 or p_min > p_max:
        raise click.UsageError("need step > 0 and p-min <= p-max")

    source = parse_model_spec(model_spec) if model_spec else Sample(_read_values(sample_path or "", year))
    grid = [round(float(p), 10) for p in np.arange(p_min, p_max + step / 2, step)]
    assessments, skipped = risk_curve(source, grid, flexibility)
    rows = [
        {"p": a.p, "var": a.var, "es": a.es, "theta": a.theta, "fes": a.fes, "pelvar": a.pelvar}
        for a in assessments
    ]
    if skipped:
        logger.warning("%d levels outside D_X skipped: %s", len(skipped), ", ".join(f"{p:g}" for p in skipped))
    if not rows:
        raise RiskDomainError("no level of the grid lies in D_X")

    manifest = RunManifest(
        command="curves",
        config={
            "source": model_spec or sample_path,
            "year": year,
            "grid": grid,
            "flexibility": flexibility,
            "skipped": skipped,
            "threads": threads,
        },
        seed=seed,
    )
    _emit(rows, output_format, out_dir, "curves", manifest, title="Risk curves")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="Scenario JSON file")
@click.option("--preset", type=click.Choice(sorted(SCENARIO_PRESETS)), help="Built-in marginal scenario")
@click.option("--dependence", type=click.Choice(list(DEPENDENCE_LEVELS)), default="low", show_default=True)
@click.option("--n", "size", type=int, help="Number of simulated scenarios")
@click.option("--levels", callback=_parse_levels, help="Comma-separated probability levels")
@click.option("--var-scheme", type=click.Choice(VAR_SCHEMES), help="VaR contribution estimator")
@run_options
@output_options
@handle_errors
def allocate(
    config_path: Optional[str],
    preset: Optional[str],
    dependence: str,
    size: Optional[int],
    levels: Optional[List[float]],
    var_scheme: Optional[str],
    seed: Optional[int],
    threads: Optional[int],
    out_dir: Optional[str],
    output_format: str,
    verbose: bool,
) -> None:
    """Euler allocation of every measure across copula-simulated components."""
    if (config_path is None) == (preset is None):
        raise click.UsageError("give exactly one of --config or --preset")

    if config_path:
        file_config = load_config(config_path, ScenarioFileConfig)
    else:
        file_config = parse_config(
            {
                "marginals": [
                    {"family": family, "params": params, "label": label}
                    for label, family, params in SCENARIO_PRESETS[preset or ""]
                ],
                "copula": {"kind": "gaussian", "r": DEPENDENCE_LEVELS[dependence]},
                "n": DEFAULT_SCENARIO_SIZE,
            },
            ScenarioFileConfig,
        )
    overrides = {"n": size, "levels": levels, "var_scheme": var_scheme, "seed": seed}
    file_config = file_config.model_copy(update={k: v for k, v in overrides.items() if v is not None})

    scenario = file_config.to_scenario()
    with err_console.status("[bold green]Simulating scenarios..."):
        reports = run_allocation_scenario(scenario, var_scheme=file_config.var_scheme, bandwidth=file_config.bandwidth)

    rows = [row for report in reports for row in report.to_rows()]
    for report in reports:
        for warning in report.warnings:
            err_console.print(f"[yellow]Warning (p={report.p}):[/yellow] {warning}", highlight=False)
    config_echo = {
        **scenario.to_dict(),
        "var_scheme": file_config.var_scheme,
        "bandwidth": file_config.bandwidth,
        "threads": threads,
    }
    manifest = RunManifest(command="allocate", config=config_echo, seed=scenario.seed)
    payload = {"config": config_echo, "reports": [report.to_dict() for report in reports]}
    _emit(rows, output_format, out_dir, "allocation", manifest, title="Euler allocation", payload=payload)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="Stress JSON file")
@click.option("--n", "size", type=int, help="Sample size per repetition")
@click.option("--B", "repetitions", type=int, help="Number of repetitions")
@click.option("--levels", callback=_parse_levels, help="Comma-separated probability levels")
@run_options
@output_options
@handle_errors
def stress(
    config_path: Optional[str],
    size: Optional[int],
    repetitions: Optional[int],
    levels: Optional[List[float]],
    seed: Optional[int],
    threads: Optional[int],
    out_dir: Optional[str],
    output_format: str,
    verbose: bool,
) -> None:
    """Count subadditivity violations of VaR, PELVaR and ES under copula stress."""
    file_config = load_config(config_path, StressFileConfig) if config_path else StressFileConfig()
    overrides = {"n": size, "repetitions": repetitions, "levels": levels, "seed": seed}
    file_config = file_config.model_copy(update={k: v for k, v in overrides.items() if v is not None})

    with err_console.status("[bold green]Running stress repetitions..."):
        reports = run_stress(
            file_config.to_marginals(),
            file_config.to_copulas(),
            file_config.levels,
            file_config.n,
            file_config.repetitions,
            file_config.seed,
            threads=threads,
        )

    rows = [row for report in reports for row in report.to_rows()]
    config_echo = file_config.model_dump(mode="json", by_alias=True)
    manifest = RunManifest(command="stress", config=config_echo, seed=file_config.seed)
    payload = {"config": config_echo, "reports": [report.to_dict() for report in reports]}
    _emit(rows, output_format, out_dir, "stress", manifest, title="Subadditivity violations", payload=payload)


@main.command()
@click.argument("claims_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="Backtest JSON file")
@click.option("--first-year", type=int, help="First target year")
@click.option("--last-year", type=int, help="Last target year")
@click.option("--level", type=float, help="Probability level")
@click.option("--window-var", type=int, help="Years pooled for VaR-hat")
@click.option("--window-theta", type=int, help="Years pooled for the θ estimate")
@click.option("--lambda-under", type=float, help="Underestimation penalty (inf for lexicographic)")
@click.option("--tune-var", callback=_parse_windows, help="Comma-separated VaR windows to tune over")
@click.option("--tune-theta", callback=_parse_windows, help="Comma-separated θ windows to tune over")
@run_options
@output_options
@handle_errors
def backtest(
    claims_path: str,
    config_path: Optional[str],
    first_year: Optional[int],
    last_year: Optional[int],
    level: Optional[float],
    window_var: Optional[int],
    window_theta: Optional[int],
    lambda_under: Optional[float],
    tune_var: Optional[List[int]],
    tune_theta: Optional[List[int]],
    seed: Optional[int],
    threads: Optional[int],
    out_dir: Optional[str],
    output_format: str,
    verbose: bool,
) -> None:
    """One-year-ahead VaR-hat and PELVaR-hat predictions on a claims file."""
    base: Dict[str, Any] = {}
    if config_path:
        base = load_config(config_path, BacktestFileConfig).model_dump(exclude_none=True)
    table = load_claims(claims_path, columns=base.get("columns"))

    windows = [window_var or base.get("window_var", 1), window_theta or base.get("window_theta", 1)]
    if tune_var or tune_theta:
        base["tune"] = {"window_var": tune_var or [windows[0]], "window_theta": tune_theta or [windows[1]]}
    grid = base.get("tune")
    deepest = max([*windows, *(grid["window_var"] if grid else []), *(grid["window_theta"] if grid else [])])
    years = table.years
    default_span = (years[0] + deepest, years[-1])
    span = base.get("target_years", default_span)
    base["target_years"] = (first_year or span[0], last_year or span[1])
    overrides = {"level": level, "window_var": window_var, "window_theta": window_theta, "lambda_under": lambda_under}
    base.update({k: v for k, v in overrides.items() if v is not None})
    file_config = parse_config(base, BacktestFileConfig)
    cfg = file_config.to_backtest()

    payload: Dict[str, Any] = {"config": cfg.to_dict(), "claims": claims_path}
    if file_config.tune:
        tuning = tune_windows(table, cfg, file_config.tune.window_var, file_config.tune.window_theta)
        cfg = tuning.best
        payload["tuning"] = [score.to_dict() for score in tuning.scores]
        payload["selected"] = cfg.to_dict()
        err_console.print(
            f"Selected windows: var={cfg.window_var}, theta={cfg.window_theta}",
            highlight=False,
        )

    records = predict_var(table, cfg)
    rows = [record.to_dict() for record in records]
    payload["predictions"] = rows
    payload["statistics"] = [stats.to_dict() for stats in describe_all(table)]

    manifest = RunManifest(
        command="backtest",
        config=payload["config"] | {"selected": cfg.to_dict(), "threads": threads},
        seed=seed,
    )
    _emit(rows, output_format, out_dir, "predictions", manifest, title="One-year-ahead VaR", payload=payload)
    if out_dir:
        save_results(payload["statistics"], out_dir, "statistics", output_format, manifest=manifest)
        if "tuning" in payload:
            save_results(payload["tuning"], out_dir, "tuning", output_format, manifest=manifest)


@main.command()
def presets() -> None:
    """Show the built-in allocation scenarios and the default stress grid."""
    lines = ["Allocation scenarios (all components have mean 100):", ""]
    for key, components in SCENARIO_PRESETS.items():
        described = ", ".join(build_model(family, params).describe() for _, family, params in components)
        lines.append(f"({key}) {described}")
    lines += ["", "Dependence levels: " + ", ".join(f"{name} r={r}" for name, r in DEPENDENCE_LEVELS.items()), ""]
    lines.append("Stress marginals: " + ", ".join(build_model(f, p).describe() for _, f, p in STRESS_MARGINALS))
    lines.append("Gaussian and t(nu=2) copulas: r in " + ", ".join(f"{r:g}" for r in STRESS_CORRELATIONS))
    lines.append("Gumbel copulas: xi in " + ", ".join(f"{xi:g}" for xi in STRESS_GUMBEL_XI))
    console.print(Panel("\n".join(lines), title="Presets", style="blue"))


if __name__ == "__main__":
    main()
