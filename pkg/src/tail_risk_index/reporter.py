"""
Report generation for risk tables and nested run results.
"""

import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from rich.console import Console
from rich.table import Table

from . import __version__
from .constants import MISSING_CELL, TABLE_DECIMALS


@dataclass
class RunManifest:
    """Command, configuration echo, seed, tool version and wall time of a run."""

    command: str
    config: Dict[str, Any]
    seed: Optional[int] = None
    version: str = __version__
    wall_time: float = 0.0
    outputs: List[str] = field(default_factory=list)
    _started: float = field(default_factory=time.perf_counter, repr=False)

    def finish(self) -> "RunManifest":
        self.wall_time = time.perf_counter() - self._started
        return self

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload.pop("_started")
        return payload


def _plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_plain(item) for item in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def format_cell(value: Any, decimals: int = TABLE_DECIMALS) -> str:
    if value is None:
        return MISSING_CELL
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return MISSING_CELL
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.{decimals}f}"
    return str(value)


def render_table(rows: Sequence[Dict[str, Any]], title: Optional[str] = None, footnotes: Sequence[str] = ()) -> str:
    """Render rows as a fixed-precision console table."""
    table = Table(title=title, show_lines=False)
    columns = list(rows[0]) if rows else []
    for column in columns:
        table.add_column(column, justify="right")
    for row in rows:
        table.add_row(*(format_cell(row.get(column)) for column in columns))

    buffer = io.StringIO()
    console = Console(file=buffer, width=max(80, 14 * len(columns)), color_system=None, highlight=False)
    console.print(table)
    for note in footnotes:
        console.print(note)
    return buffer.getvalue()


def generate_report(
    rows: Sequence[Dict[str, Any]],
    format_type: str = "csv",
    title: Optional[str] = None,
    payload: Optional[Any] = None,
    footnotes: Sequence[str] = (),
) -> str:
    """
    Format result rows.

    Args:
        rows: Flat records, one per table row
        format_type: Output format ("csv", "json", "table")
        title: Table title (console rendering only)
        payload: Nested document written instead of ``rows`` for JSON
        footnotes: Lines printed under the console table

    Returns:
        Formatted report content
    """
    if format_type == "csv":
        return pd.DataFrame(list(rows)).to_csv(index=False, lineterminator="\n")
    elif format_type == "json":
        document = payload if payload is not None else list(rows)
        return json.dumps(_plain(document), indent=2, sort_keys=True) + "\n"
    elif format_type == "table":
        return render_table(rows, title, footnotes)
    else:
        raise ValueError(f"Unsupported format type: {format_type}")


def save_results(
    rows: Sequence[Dict[str, Any]],
    output_dir: str,
    name: str,
    format_type: str = "csv",
    manifest: Optional[RunManifest] = None,
    payload: Optional[Any] = None,
) -> str:
    """
    Write ``<name>.<ext>`` and, with a manifest, ``<name>.manifest.json``.

    File names carry no timestamps so a re-run overwrites its own outputs.
    The console table format is saved as CSV.

    Returns:
        Path to the data file
    """
    output_path = Path(output_dir)
    output_path.mkdir(parents=True, exist_ok=True)

    data_format = "json" if format_type == "json" else "csv"
    filepath = output_path / f"{name}.{data_format}"
    with open(filepath, "w", encoding="utf-8", newline="") as f:
        f.write(generate_report(rows, data_format, payload=payload))

    if manifest is not None:
        manifest.outputs.append(filepath.name)
        manifest_path = output_path / f"{name}.manifest.json"
        with open(manifest_path, "w", encoding="utf-8") as f:
            f.write(json.dumps(_plain(manifest.finish().to_dict()), indent=2, sort_keys=True) + "\n")

    return str(filepath)
