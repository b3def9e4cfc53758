"""Single-hidden-layer perceptron baseline for the forecaster comparison.

Deliberately the plainest possible MLP: tanh hidden layer, linear output,
vanilla steepest descent on the same per-sample loss as the RBF trainer,
no momentum or adaptive steps.  It exists so the two model families can be
compared under equal training budgets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .rbfnn import (
    DIVERGENCE_MSE,
    ModelFormatError,
    TrainConfig,
    TrainingDivergedError,
    TrainReport,
)
from .rng import Xorshift64Star
from .timeseries import WindowedDataset

MLP_HEADER = "agewatch-mlp v1"


@dataclass(frozen=True)
class MlpNetwork:
    """MLP parameters: hidden weights/biases and output weights/biases.

    Shapes: hidden_weights (H, d), hidden_biases (H,), output_weights
    (J, H), output_biases (J,).  Training mutates the arrays in place.
    """

    hidden_weights: np.ndarray
    hidden_biases: np.ndarray
    output_weights: np.ndarray
    output_biases: np.ndarray

    def __post_init__(self) -> None:
        # copies: the network owns its parameters and training needs them writable
        w1 = np.array(self.hidden_weights, dtype=np.float64)
        b1 = np.array(self.hidden_biases, dtype=np.float64)
        w2 = np.array(self.output_weights, dtype=np.float64)
        b2 = np.array(self.output_biases, dtype=np.float64)
        if w1.ndim != 2 or w1.shape[0] < 1 or w1.shape[1] < 1:
            raise ValueError(f"hidden_weights must be 2-D (H, d), got {w1.shape}")
        if b1.shape != (w1.shape[0],):
            raise ValueError(f"hidden_biases must have shape ({w1.shape[0]},), got {b1.shape}")
        if w2.ndim != 2 or w2.shape[0] < 1 or w2.shape[1] != w1.shape[0]:
            raise ValueError(
                f"output_weights must have shape (J, {w1.shape[0]}), got {w2.shape}"
            )
        if b2.shape != (w2.shape[0],):
            raise ValueError(f"output_biases must have shape ({w2.shape[0]},), got {b2.shape}")
        for arr in (w1, b1, w2, b2):
            if not np.isfinite(arr).all():
                raise ValueError("parameters contain non-finite entries")
        object.__setattr__(self, "hidden_weights", w1)
        object.__setattr__(self, "hidden_biases", b1)
        object.__setattr__(self, "output_weights", w2)
        object.__setattr__(self, "output_biases", b2)

    @property
    def input_dim(self) -> int:
        return int(self.hidden_weights.shape[1])

    @property
    def hidden_dim(self) -> int:
        return int(self.hidden_weights.shape[0])

    @property
    def output_dim(self) -> int:
        return int(self.output_weights.shape[0])


def init_mlp(input_dim: int, hidden_dim: int, output_dim: int, seed: int) -> MlpNetwork:
    """Seeded small-uniform init: weights in +/- 0.5/sqrt(fan_in), biases 0.

    Weights are drawn row-major (hidden layer first, then output layer)
    from the deterministic xorshift64* stream, so a fixed seed reproduces
    identical parameters everywhere.
    """
    if input_dim < 1 or hidden_dim < 1 or output_dim < 1:
        raise ValueError(
            f"dimensions must be >= 1, got d={input_dim} H={hidden_dim} J={output_dim}"
        )
    stream = Xorshift64Star(seed)

    def draw(rows: int, cols: int, fan_in: int) -> np.ndarray:
        bound = 0.5 / math.sqrt(fan_in)
        flat = [stream.next_uniform(-bound, bound) for _ in range(rows * cols)]
        return np.array(flat, dtype=np.float64).reshape(rows, cols)

    return MlpNetwork(
        hidden_weights=draw(hidden_dim, input_dim, input_dim),
        hidden_biases=np.zeros(hidden_dim, dtype=np.float64),
        output_weights=draw(output_dim, hidden_dim, hidden_dim),
        output_biases=np.zeros(output_dim, dtype=np.float64),
    )


def mlp_forward(net: MlpNetwork, x: Sequence[float] | np.ndarray) -> np.ndarray:
    """Evaluate the network: W2 tanh(W1 x + b1) + b2, shape (J,)."""
    xv = np.asarray(x, dtype=np.float64)
    if xv.ndim != 1 or xv.shape[0] != net.input_dim:
        raise ValueError(
            f"input vector must have dimension {net.input_dim}, got shape {xv.shape}"
        )
    hidden = np.tanh(net.hidden_weights @ xv + net.hidden_biases)
    return net.output_weights @ hidden + net.output_biases


def _batch_forward(net: MlpNetwork, inputs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    hidden = np.tanh(inputs @ net.hidden_weights.T + net.hidden_biases)
    return hidden @ net.output_weights.T + net.output_biases, hidden


def mlp_gradient(
    net: MlpNetwork,
    x: Sequence[float] | np.ndarray,
    target: Sequence[float] | np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Backprop derivatives of (1/J) sum_j (t_j - z_j)^2 for one sample.

    Returns gradients in parameter order (hidden_weights, hidden_biases,
    output_weights, output_biases).
    """
    xv = np.asarray(x, dtype=np.float64)
    tv = np.asarray(target, dtype=np.float64)
    if tv.ndim == 0:
        tv = tv[None]
    if xv.ndim != 1 or xv.shape[0] != net.input_dim:
        raise ValueError(
            f"input vector must have dimension {net.input_dim}, got shape {xv.shape}"
        )
    if tv.shape != (net.output_dim,):
        raise ValueError(
            f"target must have dimension {net.output_dim}, got shape {tv.shape}"
        )
    pre_hidden = net.hidden_weights @ xv + net.hidden_biases
    hidden = np.tanh(pre_hidden)
    outputs = net.output_weights @ hidden + net.output_biases

    d_out = -(2.0 / net.output_dim) * (tv - outputs)
    grad_w2 = np.outer(d_out, hidden)
    grad_b2 = d_out
    d_hidden = (net.output_weights.T @ d_out) * (1.0 - hidden * hidden)
    grad_w1 = np.outer(d_hidden, xv)
    grad_b1 = d_hidden
    return grad_w1, grad_b1, grad_w2, grad_b2


def _dataset_mse(net: MlpNetwork, inputs: np.ndarray, targets: np.ndarray) -> float:
    outputs, _ = _batch_forward(net, inputs)
    residual = targets - outputs
    per_sample = np.sum(residual * residual, axis=1) / net.output_dim
    return float(np.mean(per_sample))


def train_mlp(net: MlpNetwork, dataset: WindowedDataset, config: TrainConfig) -> TrainReport:
    """Steepest-descent backprop training, in place.

    Same contract as the RBF trainer: per-sample mode steps after every
    pair in dataset order, batch mode sums gradients over the dataset and
    steps once per epoch; early stop at ``target_mse``, abort on a
    non-finite or exploding epoch MSE.
    """
    if dataset.inputs.shape[1] != net.input_dim:
        raise ValueError(
            f"dataset input dimension {dataset.inputs.shape[1]} does not match "
            f"network input_dim {net.input_dim}"
        )
    if net.output_dim != 1:
        raise ValueError(
            f"dataset has scalar targets; network output_dim is {net.output_dim}"
        )
    inputs = dataset.inputs
    targets = dataset.targets[:, None]
    num_samples = inputs.shape[0]
    eta = config.learning_rate
    params = (
        net.hidden_weights,
        net.hidden_biases,
        net.output_weights,
        net.output_biases,
    )

    history: list[float] = []
    converged = False
    for epoch in range(1, config.epochs + 1):
        if config.mode == "per-sample":
            for q in range(num_samples):
                grads = mlp_gradient(net, inputs[q], targets[q])
                for param, grad in zip(params, grads):
                    param -= eta * grad
        else:
            acc = [np.zeros_like(param) for param in params]
            for q in range(num_samples):
                grads = mlp_gradient(net, inputs[q], targets[q])
                for slot, grad in zip(acc, grads):
                    slot += grad
            for param, grad in zip(params, acc):
                param -= eta * grad

        epoch_mse = _dataset_mse(net, inputs, targets)
        if not math.isfinite(epoch_mse) or epoch_mse > DIVERGENCE_MSE:
            raise TrainingDivergedError(
                f"training diverged at epoch {epoch}: mse={epoch_mse}"
            )
        history.append(epoch_mse)
        if epoch_mse <= config.target_mse:
            converged = True
            break

    return TrainReport(
        epochs_run=len(history), mse_history=tuple(history), converged=converged
    )


def _format_row(row: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in np.atleast_1d(row))


def save_mlp(net: MlpNetwork) -> str:
    """Serialize as a versioned text document (bit-exact round trip)."""
    lines = [
        MLP_HEADER,
        f"input_dim {net.input_dim}",
        f"hidden_dim {net.hidden_dim}",
        f"output_dim {net.output_dim}",
    ]
    for row in net.hidden_weights:
        lines.append(_format_row(row))
    lines.append(_format_row(net.hidden_biases))
    for row in net.output_weights:
        lines.append(_format_row(row))
    lines.append(_format_row(net.output_biases))
    return "\n".join(lines) + "\n"


def load_mlp(document: str) -> MlpNetwork:
    """Parse a document produced by ``save_mlp``."""
    lines = [line.rstrip("\r") for line in document.split("\n")]
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ModelFormatError("empty model document")
    if lines[0] != MLP_HEADER:
        raise ModelFormatError(
            f"version mismatch: expected {MLP_HEADER!r}, got {lines[0]!r}"
        )

    def scalar(index: int, key: str) -> int:
        if index >= len(lines):
            raise ModelFormatError(f"truncated document: missing {key} line")
        parts = lines[index].split()
        if len(parts) != 2 or parts[0] != key:
            raise ModelFormatError(f"corrupted field at line {index + 1}: expected {key}")
        try:
            return int(parts[1])
        except ValueError:
            raise ModelFormatError(f"corrupted field at line {index + 1}: {key}") from None

    input_dim = scalar(1, "input_dim")
    hidden_dim = scalar(2, "hidden_dim")
    output_dim = scalar(3, "output_dim")
    if input_dim < 1 or hidden_dim < 1 or output_dim < 1:
        raise ModelFormatError(
            f"invalid dimensions: d={input_dim} H={hidden_dim} J={output_dim}"
        )
    expected = 4 + hidden_dim + 1 + output_dim + 1
    if len(lines) != expected:
        raise ModelFormatError(
            f"weight matrix shape mismatch: document has {len(lines)} lines, "
            f"expected {expected}"
        )

    def row(index: int, width: int, what: str) -> list[float]:
        parts = lines[index].split()
        if len(parts) != width:
            raise ModelFormatError(
                f"{what} at line {index + 1} has {len(parts)} entries, expected {width}"
            )
        try:
            return [float(p) for p in parts]
        except ValueError:
            raise ModelFormatError(f"corrupted {what} at line {index + 1}") from None

    pos = 4
    w1 = [row(pos + i, input_dim, "hidden weight row") for i in range(hidden_dim)]
    pos += hidden_dim
    b1 = row(pos, hidden_dim, "hidden bias row")
    pos += 1
    w2 = [row(pos + i, hidden_dim, "output weight row") for i in range(output_dim)]
    pos += output_dim
    b2 = row(pos, output_dim, "output bias row")
    try:
        return MlpNetwork(
            hidden_weights=np.array(w1, dtype=np.float64),
            hidden_biases=np.array(b1, dtype=np.float64),
            output_weights=np.array(w2, dtype=np.float64),
            output_biases=np.array(b2, dtype=np.float64),
        )
    except ValueError as exc:
        raise ModelFormatError(f"inconsistent model document: {exc}") from None
