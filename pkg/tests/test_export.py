"""
Tests for CSV / JSON output and config digests
"""
import json

import numpy as np
import pytest

from config.loader import build_config
from models.errors import ContractError
from models.results import (
    CharPath,
    Classification,
    EquivalenceRecord,
    EquivalenceReport,
    EscapeBoundReport,
    MapCell,
    PhasePoint,
    Threshold,
    WfMap,
)
from processing.export import (
    config_digest,
    report_payload,
    write_csv,
    write_field_csv,
    write_json,
    write_escape_bound_json,
    write_map_csv,
    write_trace_csv,
)
from providers.data import from_file


def _data_lines(path):
    return [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]


class TestDigest:
    """sha256 of the canonical config"""

    def test_key_order_irrelevant(self):
        assert config_digest({"a": 1, "b": {"c": 2, "d": 3}}) == config_digest({"b": {"d": 3, "c": 2}, "a": 1})

    def test_value_sensitive(self):
        assert config_digest({"a": 1}) != config_digest({"a": 2})

    def test_run_config_digest(self):
        one = config_digest(build_config({}).canonical())
        two = config_digest(build_config({}).canonical())
        three = config_digest(build_config({"window": {"d": "0.45"}}).canonical())
        assert one == two
        assert one != three
        assert len(one) == 64


class TestCsv:
    """Plot-ready CSV output"""

    def test_full_precision_and_digest(self, tmp_path):
        path = write_csv(tmp_path / "out.csv", ("a", "b"), [(1.0 / 3.0, "Regular")], digest="abc")
        lines = path.read_text().splitlines()
        assert lines[0] == "# config_digest=abc"
        assert lines[1] == "a,b"
        assert float(lines[2].split(",")[0]) == 1.0 / 3.0
        assert lines[2].endswith(",Regular")

    def test_creates_directories(self, tmp_path):
        path = write_csv(tmp_path / "nested" / "dir" / "out.csv", ("a",), [(1.0,)])
        assert path.exists()
        assert _data_lines(path) == ["a", "1"]

    def test_field_dump_reloads(self, tmp_path, small_grid):
        u = small_grid.sample(lambda x: np.exp(-x ** 2) * np.exp(1j * x))
        path = write_field_csv(tmp_path / "field.csv", u, digest="abc")
        source = from_file(path)
        assert source.is_field
        assert source.samples.grid.half_length == pytest.approx(small_grid.half_length)
        assert np.array_equal(source.samples.samples, u.samples)

    def test_non_grid_file(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,re,im\n-1,0,0\n0,0,0\n2,0,0\n5,0,0\n")
        with pytest.raises(ContractError):
            from_file(path)

    def test_map_rows(self, tmp_path):
        cells = [[MapCell(0.0, 1.0, 0.8, 0.99, Classification.SINGULAR),
                  MapCell(0.0, -1.0, float("nan"), float("nan"), Classification.INDETERMINATE, error="x")]]
        path = write_map_csv(tmp_path / "map.csv", WfMap(np.array([0.0]), np.array([1.0, -1.0]), cells))
        lines = _data_lines(path)
        assert lines[0] == "x,xi,exponent,r2,class"
        assert lines[1] == "0,1,0.80000000000000004,0.98999999999999999,Singular"
        assert lines[2] == "0,-1,nan,nan,Indeterminate"

    def test_trace_rows(self, tmp_path):
        path_data = CharPath(times=np.array([0.0, 0.5, 1.0]), positions=np.array([3.0, 1.5, 0.0]), x_at_zero=3.0)
        lines = _data_lines(write_trace_csv(tmp_path / "trace.csv", path_data))
        assert lines == ["t,x", "0,3", "0.5,1.5", "1,0"]


class TestJson:
    """JSON reports"""

    def test_nan_becomes_null(self, tmp_path):
        path = write_json(tmp_path / "r.json", {"a": float("nan"), "b": np.float64(2.5), "c": [np.int64(3)]},
                          digest="abc")
        body = json.loads(path.read_text())
        assert body == {"a": None, "b": 2.5, "c": [3], "config_digest": "abc"}

    def test_report_payload(self):
        point = PhasePoint(0.0, 1.0)
        record = EquivalenceRecord(point, Classification.SINGULAR, Classification.SINGULAR, 0.8, 0.8, 1.0, 1.0)
        payload = report_payload(EquivalenceReport([record], Threshold(4.0, 2.0)))
        assert payload["agreement_fraction"] == 1.0
        assert payload["decisive_count"] == 1
        assert payload["records"][0]["class_i"] == "Singular"
        assert payload["threshold"] == {"n_thr": 4.0, "margin": 2.0}

    def test_undecided_report(self):
        record = EquivalenceRecord(PhasePoint(0.0, 1.0), Classification.REGULAR, Classification.INDETERMINATE,
                                   9.0, float("nan"), 1.0, float("nan"))
        payload = report_payload(EquivalenceReport([record], Threshold(4.0, 2.0)))
        assert payload["agreement_fraction"] is None
        assert payload["decisive_count"] == 0

    def test_escape_bound_json(self, tmp_path):
        report = EscapeBoundReport(lambda0=4.0, worst_ratio=0.5, samples=10, failures=2, failing_lambdas=[1.0, 2.0])
        body = json.loads(write_escape_bound_json(tmp_path / "escape_bound.json", report).read_text())
        assert body == {"lambda0": 4.0, "worst_ratio": 0.5, "samples": 10, "failures": 2}
