"""Exemplar-centered RBF network with steepest-descent output training.

The hidden layer holds fixed center vectors with a single shared Gaussian
width; only the hidden-to-output weight matrix is trained.  Because the
centers are frozen, the loss is linear in the weights and a zero weight
init is safe and deterministic.

Layout conventions: centers is (M, d), weights is (M, J).  The j-th output
is the weighted hidden sum divided by M, and the steepest-descent update
carries the matching 2*eta/(J*M) factor, so the implementation can be
audited term by term against its derivation.

``train`` mutates a network the caller exclusively owns; ``forward`` and
``forecast_recursive`` are read-only and safe to run concurrently on a
shared trained network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AgewatchError
from .timeseries import WindowedDataset

#: Training aborts when the epoch MSE exceeds this bound (or is non-finite).
DIVERGENCE_MSE = 1e12

#: Lower bound applied to the mean-pairwise-distance width heuristic.
SIGMA_FLOOR = 1e-6

MODEL_HEADER = "agewatch-rbf v1"


class ModelFormatError(AgewatchError):
    """Raised when a model document cannot be parsed or is inconsistent."""


class TrainingDivergedError(AgewatchError):
    """Raised when the training loss becomes non-finite or explodes."""


@dataclass(frozen=True)
class RbfNetwork:
    """RBF network state: centers, shared width, output weights.

    ``weights`` is the only mutable state; ``train`` updates it in place
    while centers and sigma stay frozen.
    """

    centers: np.ndarray
    sigma: float
    weights: np.ndarray
    input_dim: int
    output_dim: int

    def __post_init__(self) -> None:
        # copy both arrays: the network owns its state (weights must stay
        # writable for training, and freezing centers must not leak out)
        centers = np.array(self.centers, dtype=np.float64)
        weights = np.array(self.weights, dtype=np.float64)
        if centers.ndim != 2 or centers.shape[0] < 1:
            raise ValueError(f"centers must be a non-empty 2-D array, got {centers.shape}")
        if centers.shape[1] != self.input_dim:
            raise ValueError(
                f"centers have dimension {centers.shape[1]}, expected {self.input_dim}"
            )
        if not np.isfinite(centers).all():
            raise ValueError("centers contain non-finite entries")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be finite and > 0, got {self.sigma}")
        if self.output_dim < 1:
            raise ValueError(f"output_dim must be >= 1, got {self.output_dim}")
        if weights.shape != (centers.shape[0], self.output_dim):
            raise ValueError(
                f"weights must have shape {(centers.shape[0], self.output_dim)}, "
                f"got {weights.shape}"
            )
        if not np.isfinite(weights).all():
            raise ValueError("weights contain non-finite entries")
        centers.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "weights", weights)

    @property
    def num_centers(self) -> int:
        return int(self.centers.shape[0])


@dataclass(frozen=True)
class TrainConfig:
    """Steepest-descent settings shared by the RBF and MLP trainers.

    ``mode`` selects per-sample updates (one step after every training
    pair, in dataset order) or batch updates (gradients summed over the
    whole dataset, one step per epoch).  ``seed`` is reserved for shuffled
    training-order variants; the current trainers never shuffle, so runs
    are deterministic regardless of its value.
    """

    learning_rate: float
    epochs: int
    mode: str = "batch"
    target_mse: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.learning_rate > 0):
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.mode not in ("per-sample", "batch"):
            raise ValueError(f"mode must be 'per-sample' or 'batch', got {self.mode!r}")
        if self.target_mse < 0:
            raise ValueError(f"target_mse must be >= 0, got {self.target_mse}")


@dataclass(frozen=True)
class TrainReport:
    """Per-epoch loss trace of one training run."""

    epochs_run: int
    mse_history: tuple[float, ...]
    converged: bool

    def __post_init__(self) -> None:
        object.__setattr__(self, "mse_history", tuple(self.mse_history))
        if len(self.mse_history) != self.epochs_run:
            raise ValueError(
                f"mse_history length {len(self.mse_history)} != epochs_run {self.epochs_run}"
            )


@dataclass(frozen=True)
class ForecastResult:
    """Forecast values in the scaled domain, plus provenance."""

    values: np.ndarray
    horizon_steps: int
    origin_index: int

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] != self.horizon_steps:
            raise ValueError(
                f"values must be 1-D of length {self.horizon_steps}, got {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def _hidden_matrix(net: RbfNetwork, inputs: np.ndarray) -> np.ndarray:
    """Hidden activations for a (Q, d) input block, shape (Q, M).

    Single shared code path for forward, mse and train, so per-sample and
    batch computations of the same quantity are bit-identical.
    """
    diffs = inputs[:, None, :] - net.centers[None, :, :]
    sq_dist = np.sum(diffs * diffs, axis=2)
    return np.exp(-sq_dist / (2.0 * net.sigma * net.sigma))


def _output_block(net: RbfNetwork, hidden: np.ndarray) -> np.ndarray:
    """Outputs for a (Q, M) hidden block: (hidden @ weights) / M, shape (Q, J)."""
    return hidden @ net.weights / net.num_centers


def _as_input_block(net: RbfNetwork, x: Sequence[float] | np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    if arr.ndim != 1 or arr.shape[0] != net.input_dim:
        raise ValueError(
            f"input vector must have dimension {net.input_dim}, got shape {arr.shape}"
        )
    return arr[None, :]


def _target_matrix(net: RbfNetwork, dataset: WindowedDataset) -> np.ndarray:
    if net.output_dim != 1:
        raise ValueError(
            f"dataset has scalar targets; network output_dim is {net.output_dim}"
        )
    return dataset.targets[:, None]


def _check_dataset(net: RbfNetwork, dataset: WindowedDataset) -> None:
    if dataset.inputs.shape[1] != net.input_dim:
        raise ValueError(
            f"dataset input dimension {dataset.inputs.shape[1]} does not match "
            f"network input_dim {net.input_dim}"
        )


def rbf_activation(
    x: Sequence[float] | np.ndarray,
    center: Sequence[float] | np.ndarray,
    sigma: float,
) -> float:
    """Gaussian radial activation exp(-|x - c|^2 / (2 sigma^2)), in (0, 1]."""
    xv = np.asarray(x, dtype=np.float64)
    cv = np.asarray(center, dtype=np.float64)
    if xv.shape != cv.shape or xv.ndim != 1:
        raise ValueError(f"dimension mismatch: x {xv.shape} vs center {cv.shape}")
    if not (sigma > 0):
        raise ValueError(f"sigma must be > 0, got {sigma}")
    diff = xv - cv
    return float(np.exp(-np.sum(diff * diff) / (2.0 * sigma * sigma)))


def init_network(
    dataset: WindowedDataset,
    *,
    sigma: float | None = None,
    max_centers: int | None = None,
    output_dim: int = 1,
) -> RbfNetwork:
    """Build a network whose centers are training exemplars.

    Centers are the first ``min(Q, max_centers)`` distinct input vectors in
    dataset order (``max_centers=None`` keeps them all, one center per
    distinct exemplar).  ``sigma=None`` selects the mean pairwise center
    distance (floored at ``SIGMA_FLOOR``); that heuristic is undefined for
    a single center, which then requires an explicit sigma.  Weights start
    at zero.
    """
    if max_centers is not None and max_centers < 1:
        raise ValueError(f"max_centers must be >= 1, got {max_centers}")
    if output_dim < 1:
        raise ValueError(f"output_dim must be >= 1, got {output_dim}")

    seen: set[bytes] = set()
    rows: list[np.ndarray] = []
    limit = len(dataset) if max_centers is None else min(len(dataset), max_centers)
    for row in dataset.inputs:
        key = row.tobytes()
        if key in seen:
            continue
        seen.add(key)
        rows.append(row)
        if len(rows) == limit:
            break
    centers = np.array(rows, dtype=np.float64)
    num = centers.shape[0]

    if sigma is None:
        if num == 1:
            raise ValueError(
                "mean-pairwise sigma is undefined for a single center; "
                "pass an explicit sigma"
            )
        total = 0.0
        for i in range(num):
            diffs = centers[i + 1 :] - centers[i]
            total += float(np.sum(np.sqrt(np.sum(diffs * diffs, axis=1))))
        width = max(total / (num * (num - 1) / 2), SIGMA_FLOOR)
    else:
        width = float(sigma)

    return RbfNetwork(
        centers=centers,
        sigma=width,
        weights=np.zeros((num, output_dim), dtype=np.float64),
        input_dim=centers.shape[1],
        output_dim=output_dim,
    )


def forward(
    net: RbfNetwork, x: Sequence[float] | np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the network on one input vector.

    Returns ``(outputs, hidden)``: the J output values (weighted hidden
    sums divided by M) and the M hidden activations, the latter exposed
    for training and tracing.
    """
    block = _as_input_block(net, x)
    hidden = _hidden_matrix(net, block)
    outputs = _output_block(net, hidden)
    return outputs[0], hidden[0]


def mse(net: RbfNetwork, dataset: WindowedDataset) -> float:
    """Mean over the dataset of the per-sample error (1/J) sum_j (t_j - Z_j)^2."""
    _check_dataset(net, dataset)
    targets = _target_matrix(net, dataset)
    hidden = _hidden_matrix(net, dataset.inputs)
    return _mse_from_hidden(net, hidden, targets)


def _mse_from_hidden(net: RbfNetwork, hidden: np.ndarray, targets: np.ndarray) -> float:
    residual = targets - _output_block(net, hidden)
    per_sample = np.sum(residual * residual, axis=1) / net.output_dim
    return float(np.mean(per_sample))


def gradient(
    net: RbfNetwork,
    x: Sequence[float] | np.ndarray,
    target: Sequence[float] | np.ndarray,
) -> np.ndarray:
    """Per-sample loss derivative with respect to each weight, shape (M, J).

    d/d mu_mj of (1/J) sum_j (t_j - Z_j)^2 with Z_j = (1/M) sum_m mu_mj Y_m
    is -(2 / (J M)) (t_j - Z_j) Y_m; each weight column depends only on its
    own output's error.
    """
    block = _as_input_block(net, x)
    tv = np.asarray(target, dtype=np.float64)
    if tv.ndim == 0:
        tv = tv[None]
    if tv.shape != (net.output_dim,):
        raise ValueError(
            f"target must have dimension {net.output_dim}, got shape {tv.shape}"
        )
    hidden = _hidden_matrix(net, block)
    residual = tv[None, :] - _output_block(net, hidden)
    scale = 2.0 / (net.output_dim * net.num_centers)
    return -scale * (hidden.T @ residual)


def train(net: RbfNetwork, dataset: WindowedDataset, config: TrainConfig) -> TrainReport:
    """Steepest-descent training of the output weights, in place.

    Per-sample mode applies

        mu_mj += (2 eta / (J M)) (t_j - Z_j) Y_m

    after every training pair in dataset order; batch mode sums that
    update over all Q pairs and applies it once per epoch.  After each
    epoch the full-dataset MSE is recorded; training stops early once it
    reaches ``config.target_mse`` and aborts if it exceeds
    ``DIVERGENCE_MSE`` or turns non-finite.  Centers and sigma are frozen.
    """
    _check_dataset(net, dataset)
    targets = _target_matrix(net, dataset)
    hidden = _hidden_matrix(net, dataset.inputs)
    num_samples = hidden.shape[0]
    step_scale = 2.0 * config.learning_rate / (net.output_dim * net.num_centers)
    weights = net.weights

    history: list[float] = []
    converged = False
    for epoch in range(1, config.epochs + 1):
        if config.mode == "per-sample":
            for q in range(num_samples):
                row = hidden[q : q + 1]
                residual = targets[q : q + 1] - _output_block(net, row)
                weights += step_scale * (row.T @ residual)
        else:
            residual = targets - _output_block(net, hidden)
            weights += step_scale * (hidden.T @ residual)

        epoch_mse = _mse_from_hidden(net, hidden, targets)
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


def forecast_recursive(
    net: RbfNetwork,
    history: Sequence[float] | np.ndarray,
    steps: int,
    *,
    horizon_n: int = 1,
    origin_index: int | None = None,
) -> ForecastResult:
    """Roll the predictor forward from the last observed lag window.

    Each emitted value is the network's direct ``horizon_n``-step
    prediction from the current window; the window then shifts by one slot
    and absorbs the prediction.  Early windows therefore consist of
    observed history, later ones of previously predicted values.  With
    horizon_n = 1 the outputs are the consecutive steps after the origin.

    Values stay in the scaled domain; the caller applies inverse scaling.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if horizon_n < 1:
        raise ValueError(f"horizon_n must be >= 1, got {horizon_n}")
    if net.output_dim != 1:
        raise ValueError(
            f"recursive forecasting requires output_dim 1, got {net.output_dim}"
        )
    window = np.asarray(history, dtype=np.float64).copy()
    if window.ndim != 1 or window.shape[0] != net.input_dim:
        raise ValueError(
            f"history must hold exactly {net.input_dim} values, got shape {window.shape}"
        )
    if not np.isfinite(window).all():
        raise ValueError("history contains non-finite values")

    values = np.empty(steps, dtype=np.float64)
    for i in range(steps):
        outputs, _ = forward(net, window)
        values[i] = outputs[0]
        window[:-1] = window[1:]
        window[-1] = values[i]

    if origin_index is None:
        origin_index = len(window) - 1
    return ForecastResult(values=values, horizon_steps=steps, origin_index=origin_index)


def _format_row(row: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in row)


def save_model(net: RbfNetwork) -> str:
    """Serialize a network as a versioned text document.

    Numbers are written with shortest round-trip precision, so
    ``load_model(save_model(net))`` reproduces every field bit-exactly.
    """
    lines = [
        MODEL_HEADER,
        f"input_dim {net.input_dim}",
        f"output_dim {net.output_dim}",
        f"sigma {net.sigma!r}",
        f"M {net.num_centers}",
    ]
    for row in net.centers:
        lines.append(_format_row(row))
    for row in net.weights:
        lines.append(_format_row(row))
    return "\n".join(lines) + "\n"


def _parse_scalar_line(lines: list[str], index: int, key: str, cast) -> float:
    if index >= len(lines):
        raise ModelFormatError(f"truncated document: missing {key} line")
    parts = lines[index].split()
    if len(parts) != 2 or parts[0] != key:
        raise ModelFormatError(f"corrupted field at line {index + 1}: expected {key}")
    try:
        return cast(parts[1])
    except ValueError:
        raise ModelFormatError(f"corrupted field at line {index + 1}: {key}") from None


def _parse_number_row(lines: list[str], index: int, width: int, what: str) -> list[float]:
    if index >= len(lines):
        raise ModelFormatError(f"truncated document: missing {what} at line {index + 1}")
    parts = lines[index].split()
    if len(parts) != width:
        raise ModelFormatError(
            f"{what} at line {index + 1} has {len(parts)} entries, expected {width}"
        )
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ModelFormatError(f"corrupted {what} at line {index + 1}") from None


def load_model(document: str) -> RbfNetwork:
    """Parse a document produced by ``save_model``.

    Raises:
        ModelFormatError: version mismatch, corrupted field, or a
            dimension inconsistency such as a wrong weight matrix shape.
    """
    lines = [line.rstrip("\r") for line in document.split("\n")]
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ModelFormatError("empty model document")
    if lines[0] != MODEL_HEADER:
        raise ModelFormatError(
            f"version mismatch: expected {MODEL_HEADER!r}, got {lines[0]!r}"
        )

    input_dim = int(_parse_scalar_line(lines, 1, "input_dim", int))
    output_dim = int(_parse_scalar_line(lines, 2, "output_dim", int))
    sigma = float(_parse_scalar_line(lines, 3, "sigma", float))
    num_centers = int(_parse_scalar_line(lines, 4, "M", int))
    if input_dim < 1 or output_dim < 1 or num_centers < 1:
        raise ModelFormatError(
            f"invalid dimensions: input_dim={input_dim} output_dim={output_dim} "
            f"M={num_centers}"
        )

    expected_lines = 5 + 2 * num_centers
    if len(lines) != expected_lines:
        raise ModelFormatError(
            f"weight matrix shape mismatch: document has {len(lines)} lines, "
            f"expected {expected_lines} for M={num_centers}"
        )

    centers = [
        _parse_number_row(lines, 5 + i, input_dim, "center row") for i in range(num_centers)
    ]
    weights = [
        _parse_number_row(lines, 5 + num_centers + i, output_dim, "weight row")
        for i in range(num_centers)
    ]
    try:
        return RbfNetwork(
            centers=np.array(centers, dtype=np.float64),
            sigma=sigma,
            weights=np.array(weights, dtype=np.float64),
            input_dim=input_dim,
            output_dim=output_dim,
        )
    except ValueError as exc:
        raise ModelFormatError(f"inconsistent model document: {exc}") from None
