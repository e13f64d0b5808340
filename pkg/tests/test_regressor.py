"""Tests for window construction, the linear MLP, SGD training and rollout."""

import numpy as np
import pytest

from opdyn_cli.engine.common import InvalidInputError, RolloutDivergedError, TrainingDivergedError
from opdyn_cli.engine.numerics.regressor import (
    Mlp,
    WindowSet,
    build_windows,
    collapse_to_affine,
    dumps_checkpoint,
    forward,
    init_mlp,
    load_checkpoint,
    loads_checkpoint,
    mae,
    mae_gradients,
    predict_autoregressive,
    save_checkpoint,
    train_sgd,
)
from opdyn_cli.engine.numerics.tebd import TimeSeries


def affine_mlp(coefficients, intercept) -> Mlp:
    """One hidden neuron computing coefficients . x, output adds the intercept."""
    coefficients = np.asarray(coefficients, dtype=float)
    return Mlp(
        hidden_weights=coefficients.reshape(1, -1),
        hidden_bias=np.zeros(1),
        output_weights=np.ones((1, 1)),
        output_bias=np.array([intercept]),
    )


def random_mlp(rng, p=4, m=16) -> Mlp:
    mlp = init_mlp(p, m, seed=3)
    mlp.hidden_bias[:] = rng.normal(size=m)
    mlp.output_bias[:] = rng.normal(size=1)
    return mlp


def recurrence_pairs(rng, count=64) -> WindowSet:
    """Windows (x_{t-1}, x_t) labelled by x_{t+1} = 0.5 x_t + 0.3 x_{t-1} + 0.1."""
    inputs = rng.uniform(-1.0, 1.0, size=(count, 2))
    labels = 0.3 * inputs[:, 0] + 0.5 * inputs[:, 1] + 0.1
    return WindowSet(2, inputs, labels)


class TestBuildWindows:
    def test_definition(self):
        windows = build_windows(np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6]), 4)
        assert len(windows) == 2
        np.testing.assert_array_equal(windows.inputs, [[0.1, 0.2, 0.3, 0.4], [0.2, 0.3, 0.4, 0.5]])
        np.testing.assert_array_equal(windows.labels, [0.5, 0.6])

    def test_constant_series(self):
        windows = build_windows(np.full(10, 0.25), 4)
        assert len(windows) == 6
        assert np.all(windows.inputs == 0.25) and np.all(windows.labels == 0.25)

    def test_limit_keeps_first_pairs(self, rng):
        series = TimeSeries.uniform(rng.normal(size=501), 0.05)
        assert len(build_windows(series, 4)) == 497
        limited = build_windows(series, 4, limit=110)
        assert len(limited) == 110
        assert limited.source_delta == pytest.approx(0.05)
        np.testing.assert_array_equal(limited.labels, series.values[4:114])

    def test_windows_are_slices_of_source(self, rng):
        values = rng.normal(size=40)
        windows = build_windows(values, 5)
        for i in range(len(windows)):
            np.testing.assert_array_equal(windows.inputs[i], values[i:i + 5])
            assert windows.labels[i] == values[i + 5]

    def test_limit_above_available_is_clipped(self):
        assert len(build_windows(np.arange(8.0), 4, limit=100)) == 4

    def test_too_short(self):
        with pytest.raises(InvalidInputError):
            build_windows(np.arange(4.0), 4)

    def test_bad_limit(self):
        with pytest.raises(InvalidInputError):
            build_windows(np.arange(8.0), 4, limit=0)


class TestMlp:
    def test_init_is_deterministic(self):
        first, second = init_mlp(4, 32, seed=7), init_mlp(4, 32, seed=7)
        for a, b in zip(first.parameters(), second.parameters()):
            np.testing.assert_array_equal(a, b)

    def test_init_depends_on_seed(self):
        assert not np.array_equal(init_mlp(4, 32, seed=7).hidden_weights, init_mlp(4, 32, seed=8).hidden_weights)

    def test_init_scale_and_zero_bias(self):
        mlp = init_mlp(4, 32, seed=7)
        assert mlp.dims == (4, 32, 1)
        assert np.all(np.abs(mlp.hidden_weights) <= 0.5)
        assert np.all(np.abs(mlp.output_weights) <= 1.0 / np.sqrt(32))
        assert forward(mlp, np.zeros(4)) == 0.0

    def test_zero_network(self):
        mlp = Mlp(np.zeros((3, 4)), np.zeros(3), np.zeros((1, 3)), np.zeros(1))
        assert forward(mlp, np.array([1.0, -2.0, 3.0, 4.0])) == 0.0
        coefficients, intercept = collapse_to_affine(mlp)
        assert np.all(coefficients == 0.0) and intercept == 0.0

    def test_pick_last(self):
        assert forward(affine_mlp([0, 0, 0, 1], 0.0), np.array([1.0, 2.0, 3.0, 4.0])) == 4.0

    def test_collapse_recovers_construction(self):
        coefficients, intercept = collapse_to_affine(affine_mlp([0.25, -0.5, 1.5], 0.75))
        np.testing.assert_array_equal(coefficients, [0.25, -0.5, 1.5])
        assert intercept == 0.75

    def test_affine_collapse_equivalence(self, rng):
        mlp = random_mlp(rng)
        coefficients, intercept = collapse_to_affine(mlp)
        inputs = rng.normal(size=(1000, 4))
        direct = np.array([forward(mlp, x) for x in inputs])
        assert np.max(np.abs(direct - (inputs @ coefficients + intercept))) <= 1e-12

    def test_is_finite(self):
        mlp = init_mlp(4, 8, seed=1)
        assert mlp.is_finite()
        mlp.output_bias[0] = np.nan
        assert not mlp.is_finite()

    def test_rejects_wrong_length(self):
        with pytest.raises(InvalidInputError):
            forward(init_mlp(4, 8, seed=1), np.zeros(3))

    def test_rejects_inconsistent_shapes(self):
        with pytest.raises(InvalidInputError):
            Mlp(np.zeros((3, 4)), np.zeros(2), np.zeros((1, 3)), np.zeros(1))


class TestTraining:
    def test_exact_fit_stops_after_one_epoch(self, rng):
        mlp = Mlp(np.zeros((3, 4)), np.zeros(3), np.zeros((1, 3)), np.zeros(1))
        data = WindowSet(4, rng.normal(size=(12, 4)), np.zeros(12))
        report = train_sgd(mlp, data, max_epochs=100)
        assert report.epochs_run == 1
        assert report.final_train_mae == 0.0
        assert report.cost_history == [0.0]

    def test_report_consistency(self, rng):
        data = recurrence_pairs(rng, count=16)
        report = train_sgd(init_mlp(2, 4, seed=7), data, max_epochs=25, target_mae=0.0, seed=11)
        assert report.epochs_run == 25 == len(report.cost_history)
        assert report.final_train_mae == report.cost_history[-1]
        assert report.seed == 11

    def test_seeded_determinism(self, rng):
        data = recurrence_pairs(rng, count=32)
        first, second = init_mlp(2, 8, seed=7), init_mlp(2, 8, seed=7)
        report_a = train_sgd(first, data, max_epochs=50, seed=11)
        report_b = train_sgd(second, data, max_epochs=50, seed=11)
        assert report_a.cost_history == report_b.cost_history
        for a, b in zip(first.parameters(), second.parameters()):
            np.testing.assert_array_equal(a, b)

    def test_shuffle_seed_changes_trajectory(self, rng):
        data = recurrence_pairs(rng, count=32)
        report_a = train_sgd(init_mlp(2, 8, seed=7), data, max_epochs=5, target_mae=0.0, seed=1)
        report_b = train_sgd(init_mlp(2, 8, seed=7), data, max_epochs=5, target_mae=0.0, seed=2)
        assert report_a.cost_history != report_b.cost_history

    def test_recovers_affine_recurrence(self, rng):
        data = recurrence_pairs(rng)
        oracle, *_ = np.linalg.lstsq(np.column_stack([data.inputs, np.ones(len(data))]), data.labels, rcond=None)
        mlp = init_mlp(2, 8, seed=7)
        train_sgd(mlp, data, learning_rate=1e-3, max_epochs=6000, target_mae=1e-4, seed=11, lr_decay=1e-3)
        coefficients, intercept = collapse_to_affine(mlp)
        np.testing.assert_allclose(coefficients, oracle[:2], atol=0.01)
        assert intercept == pytest.approx(oracle[2], abs=0.01)
        np.testing.assert_allclose(oracle, [0.3, 0.5, 0.1], atol=1e-12)

    def test_gradients_match_finite_differences(self, rng):
        mlp = random_mlp(rng, p=3, m=5)
        inputs = rng.normal(size=(20, 3))
        # labels far from the outputs keep every residual away from the kink
        offsets = rng.choice([-1.0, 1.0], size=20) * rng.uniform(2.0, 3.0, size=20)
        data = WindowSet(3, inputs, np.array([forward(mlp, x) for x in inputs]) + offsets)

        analytic = mae_gradients(mlp, data)
        step = 1e-6
        for param, grad in zip(mlp.parameters(), analytic):
            numeric = np.zeros_like(param)
            for idx in np.ndindex(param.shape):
                original = param[idx]
                param[idx] = original + step
                up = mae(mlp, data)
                param[idx] = original - step
                down = mae(mlp, data)
                param[idx] = original
                numeric[idx] = (up - down) / (2 * step)
            assert np.linalg.norm(numeric - grad) <= 1e-4 * np.linalg.norm(grad)

    def test_divergence_is_reported(self, rng):
        data = recurrence_pairs(rng, count=16)
        with pytest.raises(TrainingDivergedError) as info:
            train_sgd(init_mlp(2, 8, seed=7), data, learning_rate=1e300, max_epochs=10)
        assert info.value.epoch >= 1

    def test_rejects_empty_data(self):
        with pytest.raises(InvalidInputError):
            train_sgd(init_mlp(2, 4, seed=1), WindowSet(2, np.zeros((0, 2)), np.zeros(0)))

    def test_rejects_window_mismatch(self, rng):
        with pytest.raises(InvalidInputError):
            train_sgd(init_mlp(3, 4, seed=1), recurrence_pairs(rng, count=4))

    @pytest.mark.slow
    def test_efficacy_floor(self, rng):
        data = recurrence_pairs(rng, count=64)
        report = train_sgd(init_mlp(2, 8, seed=7), data, target_mae=1e-4, seed=11, lr_decay=1e-2)
        assert report.final_train_mae <= 1e-4


class TestRollout:
    def test_pick_last(self):
        out = predict_autoregressive(affine_mlp([0, 0, 0, 1], 0.0), np.array([1.0, 2.0, 3.0, 4.0]), 3)
        np.testing.assert_array_equal(out, [4.0, 4.0, 4.0])

    def test_increment_recurrence(self):
        out = predict_autoregressive(affine_mlp([0, 0, 0, 1], 1.0), np.array([1.0, 2.0, 3.0, 4.0]), 3)
        np.testing.assert_array_equal(out, [5.0, 6.0, 7.0])

    def test_seed_window_untouched(self):
        window = np.array([1.0, 2.0, 3.0, 4.0])
        predict_autoregressive(affine_mlp([0, 0, 0, 1], 1.0), window, 5)
        np.testing.assert_array_equal(window, [1.0, 2.0, 3.0, 4.0])

    def test_zero_steps(self):
        assert predict_autoregressive(affine_mlp([1.0], 0.0), np.array([0.5]), 0).size == 0

    def test_divergence_keeps_partial_output(self):
        mlp = affine_mlp([1e154], 0.0)
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(RolloutDivergedError) as info:
                predict_autoregressive(mlp, np.array([1.0]), 10)
        assert info.value.step == 2
        np.testing.assert_allclose(info.value.partial, [1e154, 1e308], rtol=1e-12)

    def test_rejects_wrong_window(self):
        with pytest.raises(InvalidInputError):
            predict_autoregressive(affine_mlp([0, 1], 0.0), np.array([1.0, 2.0, 3.0]), 2)


class TestCheckpoint:
    def test_round_trip_is_bit_exact(self, rng, tmp_path):
        mlp = random_mlp(rng)
        path = save_checkpoint(mlp, tmp_path / "model.txt")
        loaded = load_checkpoint(path)
        assert loaded.seed == mlp.seed and loaded.dims == mlp.dims
        for a, b in zip(mlp.parameters(), loaded.parameters()):
            np.testing.assert_array_equal(a, b)
        assert dumps_checkpoint(loaded) == path.read_text()

    def test_rejects_unknown_format(self, rng):
        text = dumps_checkpoint(random_mlp(rng)).replace("opdyn-mlp/1", "other/2")
        with pytest.raises(InvalidInputError):
            loads_checkpoint(text)

    def test_rejects_missing_key(self, rng):
        text = "\n".join(
            line for line in dumps_checkpoint(random_mlp(rng)).splitlines() if not line.startswith("hidden_bias")
        )
        with pytest.raises(InvalidInputError):
            loads_checkpoint(text)

    def test_rejects_dims_mismatch(self, rng):
        text = dumps_checkpoint(random_mlp(rng)).replace("dims = 4 16 1", "dims = 4 15 1")
        with pytest.raises(InvalidInputError):
            loads_checkpoint(text)

    def test_rejects_garbage(self):
        with pytest.raises(InvalidInputError):
            loads_checkpoint("format = opdyn-mlp/1\nthis line is not a pair\n")
