"""CSV series, bench tables, plain-text reports and config echoes."""

import csv
import io
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Union

import numpy as np

from ..common.errors import InvalidInputError
from ..common.files import atomic_write_text
from ..common.models import BenchRow, RunReport
from ..numerics.tebd import TimeSeries

BENCH_COLUMNS = ["n_sites", "train_pairs", "generation_s", "train_predict_s", "full_tebd_s", "epochs_run", "status"]


def _fmt(value: float) -> str:
    return f"{float(value):.17g}"


def series_to_csv(series: TimeSeries) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["time", "value"])
    for t, v in zip(series.times, series.values):
        writer.writerow([_fmt(t), _fmt(v)])
    return buffer.getvalue()


def write_series_csv(series: TimeSeries, path: Union[str, Path]) -> Path:
    return atomic_write_text(path, series_to_csv(series))


def read_series_csv(path: Union[str, Path]) -> TimeSeries:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["time", "value"]:
            raise InvalidInputError(f"{path}: expected header 'time,value', got {header}")
        rows = [(float(t), float(v)) for t, v in reader]
    data = np.array(rows, dtype=np.float64).reshape(-1, 2)
    return TimeSeries(data[:, 0], data[:, 1])


def write_bench_csv(rows: Iterable[BenchRow], path: Union[str, Path]) -> Path:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(BENCH_COLUMNS)
    for row in rows:
        writer.writerow([
            row.n_sites,
            row.train_pairs,
            _fmt(row.generation_s),
            _fmt(row.train_predict_s),
            _fmt(row.full_tebd_s),
            row.epochs_run,
            row.status,
        ])
    return atomic_write_text(path, buffer.getvalue())


def dumps_config(options: Mapping[str, Any]) -> str:
    """Resolved options as KEY=value lines, readable back with --config."""
    lines = ["# resolved configuration (load with --config)"]
    for key in sorted(options):
        value = options[key]
        if isinstance(value, float):
            value = _fmt(value)
        elif isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key.upper()}={value}")
    return "\n".join(lines) + "\n"


def render_report(report: RunReport, options: Mapping[str, Any]) -> str:
    """Plain-text report: summary, stages, errors and the config echo."""
    def opt(value) -> str:
        return "n/a" if value is None else _fmt(value)

    lines: List[str] = [
        f"run_id: {report.run_id}",
        f"verb: {report.verb}",
        f"status: {report.overall_status}",
        f"start_time: {report.start_time.isoformat()}",
        f"end_time: {report.end_time.isoformat() if report.end_time else 'n/a'}",
        f"generation_seconds: {_fmt(report.generation_seconds)}",
        f"training_seconds: {_fmt(report.training_seconds)}",
        f"prediction_seconds: {_fmt(report.prediction_seconds)}",
        f"reference_seconds: {_fmt(report.reference_seconds)}",
        f"mean_epsilon: {opt(report.mean_epsilon)}",
        f"max_epsilon: {opt(report.max_epsilon)}",
        f"mean_epsilon_prediction: {opt(report.mean_epsilon_prediction)}",
        f"max_epsilon_prediction: {opt(report.max_epsilon_prediction)}",
    ]
    if report.train is not None:
        lines.append(f"train_epochs: {report.train.epochs_run}")
        lines.append(f"train_mae: {_fmt(report.train.final_train_mae)}")
    if report.truncation is not None:
        lines.append(f"truncation_weight: {_fmt(report.truncation.cumulative_weight)}")
        lines.append(f"max_bond_reached: {report.truncation.max_bond_reached}")

    lines.append("")
    lines.append("[stages]")
    for stage in report.stages:
        line = f"{stage.name}: {stage.state.value} {_fmt(stage.seconds)}s"
        if stage.error_message:
            line += f" ({stage.error_message})"
        lines.append(line)

    if report.errors:
        lines.append("")
        lines.append("[errors]")
        lines.extend(report.errors)

    lines.append("")
    lines.append("[config]")
    lines.extend(dumps_config(options).splitlines()[1:])
    return "\n".join(lines) + "\n"


def write_report(report: RunReport, options: Mapping[str, Any], out_dir: Union[str, Path]) -> Dict[str, Path]:
    out = Path(out_dir)
    return {
        "report": atomic_write_text(out / "report.txt", render_report(report, options)),
        "config": atomic_write_text(out / "resolved_config.env", dumps_config(options)),
    }
