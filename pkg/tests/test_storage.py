"""Tests for CSV series, bench tables and plain-text reports."""

from datetime import datetime

import numpy as np
import pytest

from opdyn_cli.engine.common import BenchRow, InvalidInputError, RunReport
from opdyn_cli.engine.numerics.tebd import TimeSeries
from opdyn_cli.engine.pipeline.storage import (
    dumps_config,
    read_series_csv,
    render_report,
    series_to_csv,
    write_bench_csv,
    write_report,
    write_series_csv,
)


def test_series_csv_keeps_full_precision(tmp_path):
    series = TimeSeries.uniform([1.0, 1.0 / 3.0, np.pi], 0.05)
    loaded = read_series_csv(write_series_csv(series, tmp_path / "s.csv"))
    np.testing.assert_array_equal(loaded.values, series.values)
    np.testing.assert_array_equal(loaded.times, series.times)
    assert series_to_csv(series).splitlines()[0] == "time,value"


def test_series_csv_rejects_foreign_header(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("t,y\n0,1\n")
    with pytest.raises(InvalidInputError):
        read_series_csv(path)


def test_bench_csv(tmp_path):
    rows = [
        BenchRow(n_sites=8, train_pairs=110, generation_s=1.5, train_predict_s=0.5, full_tebd_s=6.0,
                 epochs_run=40, status="success"),
        BenchRow(n_sites=10, train_pairs=120, status="failed", error="boom"),
    ]
    lines = write_bench_csv(rows, tmp_path / "bench.csv").read_text().splitlines()
    assert lines[0] == "n_sites,train_pairs,generation_s,train_predict_s,full_tebd_s,epochs_run,status"
    assert lines[1] == "8,110,1.5,0.5,6,40,success"
    assert lines[2].endswith(",failed")


def test_dumps_config():
    text = dumps_config({"steps": 500, "delta": 0.05, "model": "ising", "sizes": [8, 10]})
    lines = text.splitlines()
    assert lines[0].startswith("#")
    assert lines[1:] == ["DELTA=0.050000000000000003", "MODEL=ising", "SIZES=8,10", "STEPS=500"]


def test_report_sections(tmp_path):
    report = RunReport(run_id="abc", verb="hybrid", start_time=datetime(2024, 1, 1), overall_status="failed",
                       mean_epsilon=0.003, errors=["prediction: rollout diverged at step 3"])
    text = render_report(report, {"steps": 500})
    assert "status: failed" in text
    assert "mean_epsilon: 0.0030000000000000001" in text
    assert "mean_epsilon_prediction: n/a" in text
    assert "[errors]\nprediction: rollout diverged at step 3" in text
    assert text.rstrip().endswith("STEPS=500")

    paths = write_report(report, {"steps": 500}, tmp_path)
    assert paths["report"].read_text() == text
    assert paths["config"].name == "resolved_config.env"
