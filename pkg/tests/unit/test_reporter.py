"""Unit tests for the reporter module."""

import json
import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from tail_risk_index import __version__
from tail_risk_index.reporter import RunManifest, format_cell, generate_report, render_table, save_results


@pytest.fixture
def rows():
    return [
        {"p": 0.9, "var": 230.2585, "theta": 0.0767699, "pelvar": None},
        {"p": 0.95, "var": 299.5732, "theta": math.nan, "pelvar": 299.5732},
    ]


class TestFormatCell:
    """Test console cell formatting."""

    def test_fixed_precision(self):
        """Test floats use four decimals."""
        assert format_cell(0.0767699) == "0.0768"
        assert format_cell(np.float64(1.0)) == "1.0000"

    def test_missing_values(self):
        """Test None and NaN render as n/a."""
        assert format_cell(None) == "n/a"
        assert format_cell(math.nan) == "n/a"

    def test_non_float_values(self):
        """Test integers, booleans, infinities and strings."""
        assert format_cell(np.int64(7)) == "7"
        assert format_cell(True) == "True"
        assert format_cell(math.inf) == "inf"
        assert format_cell("gaussian(r=0.5)") == "gaussian(r=0.5)"


class TestGenerateReport:
    """Test report generation in different formats."""

    def test_csv_format(self, rows):
        """Test CSV output with a header and empty missing cells."""
        report = generate_report(rows, "csv")

        lines = report.splitlines()
        assert lines[0] == "p,var,theta,pelvar"
        assert lines[1].startswith("0.9,230.2585,0.0767699,")
        assert lines[1].endswith(",")

    def test_json_format(self, rows):
        """Test JSON output is valid with NaN mapped to null."""
        parsed = json.loads(generate_report(rows, "json"))

        assert parsed[0]["var"] == 230.2585
        assert parsed[1]["theta"] is None

    def test_json_payload(self, rows):
        """Test a nested payload replaces the rows in JSON."""
        payload = {"levels": np.array([0.9, 0.95]), "theta": math.inf}

        parsed = json.loads(generate_report(rows, "json", payload=payload))

        assert parsed == {"levels": [0.9, 0.95], "theta": "inf"}

    def test_table_format(self, rows):
        """Test console table output with title and footnotes."""
        report = generate_report(rows, "table", title="θ-index", footnotes=["n/a: undefined"])

        assert "θ-index" in report
        assert "0.0768" in report
        assert "n/a" in report
        assert report.rstrip().endswith("n/a: undefined")

    def test_empty_table(self):
        """Test an empty table renders without columns."""
        assert isinstance(render_table([]), str)

    def test_invalid_format(self, rows):
        """Test error handling for invalid format."""
        with pytest.raises(ValueError, match="Unsupported format type"):
            generate_report(rows, "pdf")


class TestSaveResults:
    """Test saving results to files."""

    def test_save_csv(self, temp_output_dir, rows):
        """Test saving rows as CSV under a stable name."""
        filepath = save_results(rows, str(temp_output_dir), "theta_table", "csv")

        assert Path(filepath) == temp_output_dir / "theta_table.csv"
        frame = pd.read_csv(filepath)
        assert list(frame.columns) == ["p", "var", "theta", "pelvar"]
        assert frame["var"].iloc[1] == pytest.approx(299.5732)

    def test_save_table_as_csv(self, temp_output_dir, rows):
        """Test the console format is written to disk as CSV."""
        filepath = save_results(rows, str(temp_output_dir), "curves", "table")

        assert filepath.endswith("curves.csv")

    def test_save_json_with_manifest(self, temp_output_dir, rows):
        """Test the manifest records command, seed, version and outputs."""
        manifest = RunManifest(command="stress", config={"B": 10}, seed=3)

        filepath = save_results(rows, str(temp_output_dir), "stress", "json", manifest=manifest)

        assert filepath.endswith("stress.json")
        document = json.loads((temp_output_dir / "stress.manifest.json").read_text())
        assert document["command"] == "stress"
        assert document["seed"] == 3
        assert document["version"] == __version__
        assert document["outputs"] == ["stress.json"]
        assert document["wall_time"] >= 0.0
        assert "_started" not in document

    def test_rerun_overwrites(self, temp_output_dir, rows):
        """Test re-running writes to the same file."""
        first = save_results(rows, str(temp_output_dir), "allocation")
        second = save_results(rows[:1], str(temp_output_dir), "allocation")

        assert first == second
        assert len(pd.read_csv(second)) == 1

    def test_creates_output_directory(self, temp_output_dir, rows):
        """Test missing output directories are created."""
        nested = temp_output_dir / "runs" / "a"

        save_results(rows, str(nested), "allocation")

        assert (nested / "allocation.csv").is_file()
