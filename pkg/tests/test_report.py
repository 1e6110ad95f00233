"""Tests for report serialization (JSON, CSV) and figure rendering."""

import csv
import json

import pytest

from hjbd.report import render_figures, write_report_csv, write_report_json
from hjbd.verification import CheckResult, VerificationReport


@pytest.fixture
def report():
    checks = [
        CheckResult(name="alpha", passed=True, observed=1.25,
                    bound_or_target=2.0, tolerance=1e-9, details="fine"),
        CheckResult(name="beta", passed=False, observed=[0.5, 0.75],
                    bound_or_target=[0.0, 0.0], tolerance=1e-6,
                    details="broke, on purpose"),
    ]
    return VerificationReport(checks=checks, seed=11,
                              timestamp="2026-01-01T00:00:00+00:00")


class TestJson:
    def test_written_file_round_trips(self, report, tmp_path):
        path = write_report_json(report, tmp_path / "report.json")
        payload = json.loads(path.read_text())
        assert payload == report.to_json()
        assert payload["seed"] == 11
        assert [c["name"] for c in payload["checks"]] == ["alpha", "beta"]

    def test_file_ends_with_newline(self, report, tmp_path):
        path = write_report_json(report, tmp_path / "report.json")
        assert path.read_text().endswith("\n")


class TestCsv:
    def test_rows_match_checks(self, report, tmp_path):
        path = write_report_csv(report, tmp_path / "report.csv")
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["name", "passed", "observed", "bound_or_target",
                           "tolerance", "details"]
        assert len(rows) == 1 + len(report.checks)
        assert rows[1][0] == "alpha"
        assert rows[2][0] == "beta"

    def test_vector_observations_stay_parseable(self, report, tmp_path):
        path = write_report_csv(report, tmp_path / "report.csv")
        rows = list(csv.reader(path.open()))
        assert json.loads(rows[2][2]) == [0.5, 0.75]
        assert json.loads(rows[2][3]) == [0.0, 0.0]

    def test_passed_column_is_bool_text(self, report, tmp_path):
        path = write_report_csv(report, tmp_path / "report.csv")
        rows = list(csv.reader(path.open()))
        assert [row[1] for row in rows[1:]] == ["True", "False"]


class TestFigures:
    def test_renders_expected_files(self, report, tmp_path):
        paths = render_figures(report, tmp_path / "figs")
        names = sorted(p.name for p in paths)
        assert names == ["check_overview.png", "mse_bound.png",
                         "pm_shrinkage.png", "vanishing_smoothing_gap.png"]
        for path in paths:
            assert path.exists()
            assert path.stat().st_size > 1000
            assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_creates_nested_directory(self, report, tmp_path):
        target = tmp_path / "a" / "b" / "figs"
        paths = render_figures(report, target)
        assert all(p.parent == target for p in paths)
