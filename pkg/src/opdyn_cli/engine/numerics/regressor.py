"""
Sliding-window linear MLP regressor for observable time series.

The network is input(p) -> hidden(m, linear) -> output(1, linear), trained
by per-example stochastic (sub)gradient descent on the mean absolute error
and rolled out autoregressively on its own predictions.

Checkpoint format (plain text, one ``key = value`` per line, ``#`` starts a
comment)::

    format = opdyn-mlp/1
    dims = <p> <m> 1
    seed = <init seed>
    activation = linear
    hidden_weights = <m*p values, row-major>
    hidden_bias = <m values>
    output_weights = <m values>
    output_bias = <1 value>

Values are written with 17 significant digits, which round-trips every
double exactly.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from ..common.config import get_settings
from ..common.errors import InvalidInputError, RolloutDivergedError, TrainingDivergedError
from ..common.files import atomic_write_text
from ..common.logging import get_logger
from .tebd import TimeSeries

logger = get_logger(__name__)

CHECKPOINT_FORMAT = "opdyn-mlp/1"


@dataclass
class WindowSet:
    """Training pairs (x_i .. x_{i+p-1}) -> x_{i+p} cut from one series."""

    p: int
    inputs: np.ndarray
    labels: np.ndarray
    source_delta: float = 0.0

    def __len__(self) -> int:
        return int(self.labels.size)


@dataclass
class Mlp:
    """Two-layer network with linear activations."""

    hidden_weights: np.ndarray
    hidden_bias: np.ndarray
    output_weights: np.ndarray
    output_bias: np.ndarray
    seed: int = 0
    activation: str = "linear"

    def __post_init__(self):
        self.hidden_weights = np.asarray(self.hidden_weights, dtype=np.float64)
        self.hidden_bias = np.asarray(self.hidden_bias, dtype=np.float64).reshape(-1)
        self.output_weights = np.asarray(self.output_weights, dtype=np.float64).reshape(1, -1)
        self.output_bias = np.asarray(self.output_bias, dtype=np.float64).reshape(1)
        m, p = self.hidden_weights.shape
        if self.hidden_bias.shape != (m,) or self.output_weights.shape != (1, m):
            raise InvalidInputError("inconsistent MLP parameter shapes")
        if self.activation != "linear":
            raise InvalidInputError(f"only the linear activation is supported, got {self.activation!r}")

    @property
    def dims(self) -> Tuple[int, int, int]:
        m, p = self.hidden_weights.shape
        return p, m, 1

    def parameters(self) -> List[np.ndarray]:
        return [self.hidden_weights, self.hidden_bias, self.output_weights, self.output_bias]

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.parameters())

    def copy(self) -> "Mlp":
        return Mlp(*(a.copy() for a in self.parameters()), seed=self.seed)


@dataclass
class TrainReport:
    """Outcome of train_sgd."""

    epochs_run: int
    final_train_mae: float
    cost_history: List[float] = field(default_factory=list)
    seed: int = 0


def build_windows(series: Union[TimeSeries, np.ndarray], p: int, limit: Optional[int] = None) -> WindowSet:
    """
    Slide a window of p points over the series.

    Args:
        series: Source samples
        p: Window size
        limit: Keep only the first ``limit`` pairs

    Returns:
        WindowSet with len(series) - p pairs (or ``limit``), ordered by start index
    """
    if p < 1:
        raise InvalidInputError(f"window size must be >= 1, got {p}")
    if isinstance(series, TimeSeries):
        values, delta = series.values, series.delta
    else:
        values, delta = np.asarray(series, dtype=np.float64), 0.0
    if values.size < p + 1:
        raise InvalidInputError(f"series of {values.size} points is too short for window size {p}")

    count = values.size - p
    if limit is not None:
        if limit < 1:
            raise InvalidInputError(f"limit must be >= 1, got {limit}")
        if limit > count:
            logger.warning(f"Requested {limit} windows but the series only yields {count}")
        count = min(count, limit)

    inputs = np.lib.stride_tricks.sliding_window_view(values, p)[:count].copy()
    labels = values[p:p + count].copy()
    return WindowSet(p, inputs, labels, float(delta))


def init_mlp(p: int, m: int, seed: int) -> Mlp:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases."""
    if p < 1 or m < 1:
        raise InvalidInputError(f"layer sizes must be >= 1, got p={p}, m={m}")
    rng = np.random.default_rng(seed)
    s_hidden = 1.0 / np.sqrt(p)
    s_output = 1.0 / np.sqrt(m)
    return Mlp(
        hidden_weights=rng.uniform(-s_hidden, s_hidden, size=(m, p)),
        hidden_bias=np.zeros(m),
        output_weights=rng.uniform(-s_output, s_output, size=(1, m)),
        output_bias=np.zeros(1),
        seed=seed,
    )


def forward(mlp: Mlp, x: np.ndarray) -> float:
    """output_weights . (hidden_weights . x + hidden_bias) + output_bias"""
    x = np.asarray(x, dtype=np.float64)
    p = mlp.dims[0]
    if x.shape != (p,):
        raise InvalidInputError(f"expected an input of length {p}, got shape {x.shape}")
    hidden = mlp.hidden_weights @ x + mlp.hidden_bias
    return float(mlp.output_weights[0] @ hidden + mlp.output_bias[0])


def forward_batch(mlp: Mlp, inputs: np.ndarray) -> np.ndarray:
    hidden = inputs @ mlp.hidden_weights.T + mlp.hidden_bias
    return hidden @ mlp.output_weights[0] + mlp.output_bias[0]


def one_step_predictions(mlp: Mlp, data: WindowSet) -> np.ndarray:
    """Prediction for every window of the set, each from the true inputs."""
    return forward_batch(mlp, data.inputs)


def mae(mlp: Mlp, data: WindowSet) -> float:
    return float(np.mean(np.abs(forward_batch(mlp, data.inputs) - data.labels)))


def mae_gradients(mlp: Mlp, data: WindowSet) -> List[np.ndarray]:
    """Subgradient of the mean absolute error with respect to every parameter."""
    hidden = data.inputs @ mlp.hidden_weights.T + mlp.hidden_bias
    residual = hidden @ mlp.output_weights[0] + mlp.output_bias[0] - data.labels
    g = np.sign(residual) / len(data)
    d_hidden = np.outer(g, mlp.output_weights[0])
    return [
        d_hidden.T @ data.inputs,
        d_hidden.sum(axis=0),
        (g @ hidden).reshape(1, -1),
        np.array([g.sum()]),
    ]


def train_sgd(
    mlp: Mlp,
    data: WindowSet,
    learning_rate: float = 1e-3,
    max_epochs: int = 50000,
    target_mae: float = 1e-3,
    seed: int = 0,
    lr_decay: float = 0.0,
) -> TrainReport:
    """
    Per-example stochastic subgradient descent on |y' - y|.

    Each epoch visits the examples in a seed-determined shuffled order and
    then evaluates the mean absolute error over the whole set; training
    stops once it is at most ``target_mae``. The MLP is updated in place.

    Args:
        mlp: Network to train
        data: Training pairs
        learning_rate: Initial step size
        max_epochs: Epoch budget
        target_mae: Early-stopping threshold on the epoch MAE
        seed: Shuffle seed
        lr_decay: Inverse-time decay, lr_e = learning_rate / (1 + lr_decay * e); 0 keeps it constant

    Returns:
        TrainReport with the per-epoch cost history
    """
    if len(data) == 0:
        raise InvalidInputError("training set is empty")
    if not learning_rate > 0:
        raise InvalidInputError(f"learning rate must be > 0, got {learning_rate}")
    if data.inputs.shape[1] != mlp.dims[0]:
        raise InvalidInputError(f"windows of size {data.inputs.shape[1]} do not fit an MLP with p={mlp.dims[0]}")

    rng = np.random.default_rng(seed)
    progress_every = max(1, get_settings().progress_every)
    w1, b1, w2, b2 = mlp.hidden_weights, mlp.hidden_bias, mlp.output_weights[0], mlp.output_bias
    inputs, labels = data.inputs, data.labels

    history: List[float] = []
    for epoch in range(1, max_epochs + 1):
        lr = learning_rate / (1.0 + lr_decay * (epoch - 1))
        for i in rng.permutation(len(data)):
            x = inputs[i]
            hidden = w1 @ x + b1
            residual = w2 @ hidden + b2[0] - labels[i]
            if residual == 0.0:
                continue
            step = lr if residual > 0 else -lr
            d_hidden = step * w2
            w2 -= step * hidden
            b2 -= step
            w1 -= np.outer(d_hidden, x)
            b1 -= d_hidden

        cost = mae(mlp, data)
        history.append(cost)
        if not np.isfinite(cost) or not mlp.is_finite():
            raise TrainingDivergedError(epoch, cost)
        if epoch % progress_every == 0:
            logger.debug(f"Epoch {epoch}/{max_epochs}: MAE={cost:.3e}")
        if cost <= target_mae:
            break

    logger.info(f"Training stopped after {len(history)} epochs with MAE={history[-1]:.3e}")
    return TrainReport(epochs_run=len(history), final_train_mae=history[-1], cost_history=history, seed=seed)


def predict_autoregressive(mlp: Mlp, seed_window: np.ndarray, n_steps: int) -> np.ndarray:
    """
    Closed-loop rollout: predict, drop the oldest window entry, append the prediction.

    Args:
        mlp: Trained network
        seed_window: The last p known values
        n_steps: Number of values to emit

    Returns:
        Array of n_steps predictions
    """
    window = np.array(seed_window, dtype=np.float64)
    p = mlp.dims[0]
    if window.shape != (p,):
        raise InvalidInputError(f"seed window must have length {p}, got shape {window.shape}")
    if n_steps < 0:
        raise InvalidInputError(f"n_steps must be >= 0, got {n_steps}")

    out = np.empty(n_steps)
    for k in range(n_steps):
        y = forward(mlp, window)
        if not np.isfinite(y):
            raise RolloutDivergedError(k, out[:k])
        out[k] = y
        window[:-1] = window[1:]
        window[-1] = y
    return out


def collapse_to_affine(mlp: Mlp) -> Tuple[np.ndarray, float]:
    """The affine map a linear MLP computes: (coefficients, intercept)."""
    w2 = mlp.output_weights[0]
    coefficients = w2 @ mlp.hidden_weights
    intercept = float(w2 @ mlp.hidden_bias + mlp.output_bias[0])
    return coefficients, intercept


def _format_values(values: np.ndarray) -> str:
    return " ".join(f"{v:.17g}" for v in np.asarray(values).reshape(-1))


def dumps_checkpoint(mlp: Mlp) -> str:
    p, m, _ = mlp.dims
    lines = [
        "# linear MLP checkpoint",
        f"format = {CHECKPOINT_FORMAT}",
        f"dims = {p} {m} 1",
        f"seed = {mlp.seed}",
        f"activation = {mlp.activation}",
        f"hidden_weights = {_format_values(mlp.hidden_weights)}",
        f"hidden_bias = {_format_values(mlp.hidden_bias)}",
        f"output_weights = {_format_values(mlp.output_weights)}",
        f"output_bias = {_format_values(mlp.output_bias)}",
    ]
    return "\n".join(lines) + "\n"


def loads_checkpoint(text: str) -> Mlp:
    entries = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InvalidInputError(f"checkpoint line {number}: expected 'key = value'")
        entries[key.strip()] = value.strip()

    required = ("format", "dims", "seed", "activation", "hidden_weights", "hidden_bias", "output_weights", "output_bias")
    missing = [k for k in required if k not in entries]
    if missing:
        raise InvalidInputError(f"checkpoint is missing {', '.join(missing)}")
    if entries["format"] != CHECKPOINT_FORMAT:
        raise InvalidInputError(f"unsupported checkpoint format {entries['format']!r}")

    try:
        p, m, out = (int(v) for v in entries["dims"].split())
        arrays = {k: np.array([float(v) for v in entries[k].split()]) for k in required[4:]}
        seed = int(entries["seed"])
    except ValueError as e:
        raise InvalidInputError(f"malformed checkpoint: {e}") from e
    if out != 1 or arrays["hidden_weights"].size != m * p or arrays["hidden_bias"].size != m \
            or arrays["output_weights"].size != m or arrays["output_bias"].size != 1:
        raise InvalidInputError("checkpoint arrays do not match dims")

    return Mlp(
        hidden_weights=arrays["hidden_weights"].reshape(m, p),
        hidden_bias=arrays["hidden_bias"],
        output_weights=arrays["output_weights"].reshape(1, m),
        output_bias=arrays["output_bias"],
        seed=seed,
        activation=entries["activation"],
    )


def save_checkpoint(mlp: Mlp, path: Union[str, Path]) -> Path:
    return atomic_write_text(path, dumps_checkpoint(mlp))


def load_checkpoint(path: Union[str, Path]) -> Mlp:
    return loads_checkpoint(Path(path).read_text(encoding="utf-8"))
