"""Pipeline implementation for the hybrid TEBD + regressor experiments."""

import time
import uuid
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Callable, List, Optional, Sequence

import numpy as np

from ..common import (
    BenchRow,
    HybridConfig,
    InvalidInputError,
    OpdynError,
    ReferenceKind,
    RolloutDivergedError,
    RunReport,
    StageState,
    StageStatus,
    get_logger,
    get_settings,
)
from ..common.models import ModelSpec, TrainSummary, TruncationSummary
from ..numerics.exact_oracle import exact_evolve_record, product_dense_state
from ..numerics.hamiltonians import build_bond_terms
from ..numerics.mps import pauli, product_state
from ..numerics.regressor import (
    Mlp,
    TrainReport,
    build_windows,
    init_mlp,
    one_step_predictions,
    predict_autoregressive,
    train_sgd,
)
from ..numerics.tebd import TimeSeries, build_trotter_schedule, evolve_record

HISTORY_LIMIT = 10
GRID_TOL = 1e-9


@dataclass
class SeriesComparison:
    """Pointwise |a - b| with its mean and maximum."""

    epsilon: TimeSeries
    mean_abs: float
    max_abs: float


def compare_series(a: TimeSeries, b: TimeSeries) -> SeriesComparison:
    """
    Compare two series sampled on the same time grid.

    Raises:
        InvalidInputError: If the grids differ by more than 1e-9
    """
    if len(a) != len(b) or len(a) == 0:
        raise InvalidInputError(f"cannot compare series of lengths {len(a)} and {len(b)}")
    if np.max(np.abs(a.times - b.times)) > GRID_TOL:
        raise InvalidInputError("series are sampled on different time grids")
    eps = np.abs(a.values - b.values)
    return SeriesComparison(TimeSeries(a.times.copy(), eps), float(np.mean(eps)), float(np.max(eps)))


@dataclass
class SimulationResult:
    """Report and series of a simulate or exact run."""

    report: RunReport
    series: Optional[TimeSeries] = None


@dataclass
class HybridResult:
    """Everything a hybrid run produced, partial data included on failure."""

    report: RunReport
    generated: Optional[TimeSeries] = None
    predicted: Optional[TimeSeries] = None
    reference: Optional[TimeSeries] = None
    epsilon: Optional[TimeSeries] = None
    epsilon_prediction: Optional[TimeSeries] = None
    mlp: Optional[Mlp] = None
    train_report: Optional[TrainReport] = None


def tebd_series(cfg: HybridConfig, n_steps: int) -> TimeSeries:
    """TEBD from the fully polarized state, recording n_steps + 1 samples."""
    spec = cfg.model_spec
    state = product_state(spec.n_sites, 0)
    sched = build_trotter_schedule(build_bond_terms(spec), cfg.delta)
    return evolve_record(state, sched, n_steps, pauli(cfg.observable.value), cfg.max_bond, cfg.cutoff)


def exact_series(cfg: HybridConfig, n_steps: int) -> TimeSeries:
    """Exact state-vector evolution from the fully polarized state."""
    spec = cfg.model_spec
    initial = product_dense_state(0, spec.n_sites)
    return exact_evolve_record(spec, initial, cfg.delta, n_steps, pauli(cfg.observable.value))


def _truncation_summary(series: TimeSeries) -> TruncationSummary:
    return TruncationSummary(
        cumulative_weight=float(series.metadata.get("truncation_weight", 0.0)),
        max_bond_reached=int(series.metadata.get("max_bond_reached", 1)),
    )


class Pipeline:
    """
    Runs the simulate, exact, hybrid and bench workflows.

    Every workflow is broken into timed stages whose status is recorded on
    the run report; the last reports are kept in memory.
    """

    def __init__(self):
        """Initialize the pipeline."""
        self.logger = get_logger(__name__)
        self.settings = get_settings()
        self.history: List[RunReport] = []

    def _new_report(self, verb: str, cfg: HybridConfig) -> RunReport:
        return RunReport(
            run_id=str(uuid.uuid4()),
            verb=verb,
            start_time=datetime.now(),
            config=cfg.model_dump(mode="json"),
        )

    def _finish(self, report: RunReport) -> RunReport:
        report.end_time = datetime.now()
        if report.overall_status == "pending":
            report.overall_status = "failed" if report.errors else "success"
        self.history.append(report)
        if len(self.history) > HISTORY_LIMIT:
            self.history.pop(0)
        self.logger.info(f"Run {report.run_id} ({report.verb}) finished: {report.overall_status}")
        return report

    def _run_stage(self, report: RunReport, name: str, fn: Callable[..., Any], *args, **kwargs) -> Any:
        """
        Execute one stage with timing and status tracking.

        Args:
            report: Report receiving the StageStatus
            name: Stage name
            fn: Callable doing the work

        Returns:
            Whatever fn returns; exceptions are recorded and re-raised
        """
        stage = StageStatus(name=name, state=StageState.RUNNING, start_time=datetime.now())
        report.stages.append(stage)
        stage.add_message(f"Starting stage {name}")
        self.logger.info(f"Stage {name} starting")

        started = time.perf_counter()
        try:
            result = fn(*args, **kwargs)
            stage.state = StageState.COMPLETED
            stage.add_message(f"Stage {name} completed")
            return result
        except Exception as e:
            stage.state = StageState.ERROR
            stage.error_message = str(e)
            stage.add_message(f"Error occurred: {e}")
            self.logger.error(f"Stage {name} failed: {e}")
            raise
        finally:
            stage.seconds = time.perf_counter() - started
            stage.end_time = datetime.now()
            self.logger.info(f"Stage {name} took {stage.seconds:.2f}s")

    def simulate(self, cfg: HybridConfig) -> SimulationResult:
        """Full-interval TEBD run."""
        report = self._new_report("simulate", cfg)
        result = SimulationResult(report)
        try:
            result.series = self._run_stage(report, "generation", tebd_series, cfg, cfg.total_steps)
            report.generation_seconds = report.stages[-1].seconds
            report.truncation = _truncation_summary(result.series)
        except OpdynError as e:
            report.errors.append(f"generation: {e}")
        self._finish(report)
        return result

    def exact(self, cfg: HybridConfig) -> SimulationResult:
        """Full-interval exact-diagonalization run."""
        report = self._new_report("exact", cfg)
        result = SimulationResult(report)
        try:
            result.series = self._run_stage(report, "reference", exact_series, cfg, cfg.total_steps)
            report.reference_seconds = report.stages[-1].seconds
        except OpdynError as e:
            report.errors.append(f"reference: {e}")
        self._finish(report)
        return result

    def hybrid_run(self, cfg: HybridConfig) -> HybridResult:
        """
        Generate short-time data, train, roll out and compare.

        The first train_pairs + window points come from TEBD. The predicted
        series starts at index ``window``: one-step predictions from true
        windows cover the training region, the closed-loop rollout covers
        the rest up to total_steps.

        Args:
            cfg: Run configuration

        Returns:
            HybridResult; on failure the report is flagged and partial data kept
        """
        report = self._new_report("hybrid", cfg)
        result = HybridResult(report)
        p = cfg.window
        n_gen = cfg.n_generated

        try:
            generated = self._run_stage(report, "generation", tebd_series, cfg, n_gen - 1)
            report.generation_seconds = report.stages[-1].seconds
            report.truncation = _truncation_summary(generated)
            result.generated = generated

            windows = build_windows(generated, p, limit=cfg.train_pairs)
            mlp = init_mlp(p, cfg.hidden, cfg.seed_init)
            train_report = self._run_stage(
                report, "training", train_sgd, mlp, windows,
                learning_rate=cfg.learning_rate,
                max_epochs=cfg.max_epochs,
                target_mae=cfg.target_mae,
                seed=cfg.seed_shuffle,
            )
            report.training_seconds = report.stages[-1].seconds
            report.train = TrainSummary(
                epochs_run=train_report.epochs_run,
                final_train_mae=train_report.final_train_mae,
                seed=train_report.seed,
            )
            result.mlp, result.train_report = mlp, train_report

            n_rollout = cfg.total_steps + 1 - n_gen
            try:
                in_sample, rollout = self._run_stage(
                    report, "prediction", self._predict, mlp, windows, generated.values[-p:], n_rollout
                )
            except RolloutDivergedError as e:
                in_sample, rollout = one_step_predictions(mlp, windows), np.asarray(e.partial)
                report.errors.append(f"prediction: {e}")
            report.prediction_seconds = report.stages[-1].seconds
            result.predicted = TimeSeries.uniform(
                np.concatenate([in_sample, rollout]), cfg.delta, start_index=p
            )

            if cfg.reference != ReferenceKind.NONE:
                self._reference(cfg, report, result)
        except OpdynError as e:
            report.errors.append(f"{e.kind}: {e}")

        self._finish(report)
        return result

    @staticmethod
    def _predict(mlp: Mlp, windows, seed_window: np.ndarray, n_rollout: int):
        return one_step_predictions(mlp, windows), predict_autoregressive(mlp, seed_window, n_rollout)

    def _reference(self, cfg: HybridConfig, report: RunReport, result: HybridResult) -> None:
        producer = tebd_series if cfg.reference == ReferenceKind.TEBD else exact_series
        reference = self._run_stage(report, "reference", producer, cfg, cfg.total_steps)
        report.reference_seconds = report.stages[-1].seconds
        result.reference = reference

        predicted = result.predicted
        p = cfg.window
        aligned = reference.slice(p, p + len(predicted))
        full = compare_series(aligned, predicted)
        result.epsilon = full.epsilon
        report.mean_epsilon, report.max_epsilon = full.mean_abs, full.max_abs

        offset = cfg.n_generated - p
        if len(predicted) > offset:
            tail = compare_series(aligned.slice(offset), predicted.slice(offset))
            result.epsilon_prediction = tail.epsilon
            report.mean_epsilon_prediction, report.max_epsilon_prediction = tail.mean_abs, tail.max_abs
        self.logger.info(f"Mean deviation over the full range: {report.mean_epsilon:.3e}")
        if report.mean_epsilon_prediction is not None:
            self.logger.info(f"Mean deviation after training region: {report.mean_epsilon_prediction:.3e}")

    def bench_scaling(
        self,
        sizes: Sequence[int],
        base_cfg: HybridConfig,
        train_pairs_per_size: Optional[Sequence[int]] = None,
    ) -> List[BenchRow]:
        """
        Cost scaling with system size, run strictly one size after another.

        Each row times a hybrid run (no reference) and a full-interval TEBD
        baseline under the same settings. A failing row is marked and the
        sweep continues.

        Args:
            sizes: Chain lengths (each >= 2)
            base_cfg: Settings shared by every row
            train_pairs_per_size: Training pairs per size (defaults to base_cfg.train_pairs)

        Returns:
            One BenchRow per size
        """
        if any(n < 2 for n in sizes):
            raise InvalidInputError(f"all sizes must be >= 2, got {list(sizes)}")
        if train_pairs_per_size is None:
            train_pairs_per_size = [base_cfg.train_pairs] * len(sizes)
        if len(train_pairs_per_size) != len(sizes):
            raise InvalidInputError(
                f"{len(train_pairs_per_size)} train-pair counts given for {len(sizes)} sizes"
            )

        rows: List[BenchRow] = []
        for n_sites, pairs in zip(sizes, train_pairs_per_size):
            row = BenchRow(n_sites=n_sites, train_pairs=pairs)
            rows.append(row)
            self.logger.info(f"Benchmarking N={n_sites} with {pairs} training pairs")
            try:
                cfg = HybridConfig(**{
                    **base_cfg.model_dump(),
                    "model_spec": ModelSpec(**{**base_cfg.model_spec.model_dump(), "n_sites": n_sites}),
                    "train_pairs": pairs,
                    "reference": ReferenceKind.NONE,
                })
            except ValueError as e:
                row.status, row.error = "failed", str(e)
                self.logger.error(f"Row N={n_sites} has an invalid config: {e}")
                continue

            hybrid = self.hybrid_run(cfg)
            full = self.simulate(cfg)
            row.generation_s = hybrid.report.generation_seconds
            row.train_predict_s = hybrid.report.training_seconds + hybrid.report.prediction_seconds
            row.full_tebd_s = full.report.generation_seconds
            row.epochs_run = hybrid.report.train.epochs_run if hybrid.report.train else 0
            errors = hybrid.report.errors + full.report.errors
            row.status = "failed" if errors else "success"
            row.error = "; ".join(errors) or None
            self.logger.info(
                f"N={n_sites}: generation {row.generation_s:.2f}s, "
                f"train+predict {row.train_predict_s:.2f}s, full TEBD {row.full_tebd_s:.2f}s"
            )
        return rows
