"""Aging-indicator time series: parsing, scaling, splitting, and embedding.

All types are immutable after construction and every operation is a pure
function of its inputs.  Parsers reject malformed input with a line number
instead of repairing it.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace

import numpy as np

from .errors import AgewatchError

#: Relative tolerance on sample spacing before a CSV is rejected as
#: non-uniform.
SPACING_RTOL = 1e-6

_MEMINFO_LINE = re.compile(r"^([A-Za-z_()0-9]+):\s+(\d+)(?:\s+kB)?\s*$")


class InvalidSeries(AgewatchError):
    """Raised when series data violates a structural invariant."""


class SeriesCsvError(AgewatchError):
    """Raised when a series CSV document is malformed."""


class ProcSnapshotError(AgewatchError):
    """Raised when a meminfo-style snapshot is malformed or incomplete."""


class ConstantSeriesError(AgewatchError):
    """Raised when min-max scaling is applied to a constant series."""


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled scalar indicator.

    Attributes:
        name: indicator label, e.g. "response_time_ms" or "swap_used_kb".
        start_time: seconds since epoch of the first sample.
        interval: seconds between consecutive samples, > 0.
        values: finite samples in chronological order, length >= 1.
        unit: free-text unit label.
    """

    name: str
    start_time: float
    interval: float
    values: np.ndarray
    unit: str = ""

    def __post_init__(self) -> None:
        # own a fresh copy: freezing a caller's array would be a rude surprise
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 1:
            raise InvalidSeries(f"values must be 1-D, got shape {vals.shape}")
        if vals.size < 1:
            raise InvalidSeries("series must contain at least one sample")
        if not np.isfinite(vals).all():
            raise InvalidSeries("values contain NaN or infinite entries")
        if not (self.interval > 0):
            raise InvalidSeries(f"interval must be > 0, got {self.interval}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return int(self.values.size)

    def time_at(self, index: int) -> float:
        """Wall-clock time of the sample at ``index``."""
        return self.start_time + index * self.interval


@dataclass(frozen=True)
class ScaleParams:
    """Min-max bounds used to map a series onto [0, 1] and back."""

    min: float
    max: float

    def __post_init__(self) -> None:
        if not (self.max > self.min):
            raise InvalidSeries(
                f"scale params require max > min, got min={self.min} max={self.max}"
            )


@dataclass(frozen=True)
class WindowedDataset:
    """Supervised pairs (lag vector -> n-step-ahead target).

    Each input row holds ``order_m + 1`` consecutive samples ordered
    oldest to newest; the matching target lies ``horizon_n`` steps past
    the newest input sample.
    """

    order_m: int
    horizon_n: int
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self) -> None:
        inputs = np.array(self.inputs, dtype=np.float64)
        targets = np.array(self.targets, dtype=np.float64)
        if self.order_m < 0:
            raise InvalidSeries(f"order_m must be >= 0, got {self.order_m}")
        if self.horizon_n < 1:
            raise InvalidSeries(f"horizon_n must be >= 1, got {self.horizon_n}")
        if inputs.ndim != 2 or inputs.shape[1] != self.order_m + 1:
            raise InvalidSeries(
                f"inputs must have {self.order_m + 1} columns, got shape {inputs.shape}"
            )
        if targets.ndim != 1 or targets.shape[0] != inputs.shape[0]:
            raise InvalidSeries(
                f"targets length {targets.shape} does not match inputs {inputs.shape}"
            )
        if inputs.shape[0] < 1:
            raise InvalidSeries("dataset must contain at least one pair")
        inputs.setflags(write=False)
        targets.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    def __len__(self) -> int:
        return int(self.inputs.shape[0])


@dataclass(frozen=True)
class ResourceSample:
    """One memory snapshot: free physical memory and used swap, in kB."""

    timestamp: float
    free_mem_kb: float
    swap_used_kb: float

    def __post_init__(self) -> None:
        if self.free_mem_kb < 0 or self.swap_used_kb < 0:
            raise InvalidSeries(
                f"resource values must be >= 0, got free={self.free_mem_kb} "
                f"swap={self.swap_used_kb}"
            )


def parse_series_csv(
    text: str,
    *,
    name: str = "series",
    unit: str = "",
    interval: float | None = None,
) -> TimeSeries:
    """Parse a ``timestamp,value`` CSV document into a TimeSeries.

    Timestamps must be strictly increasing and uniformly spaced within
    ``SPACING_RTOL`` relative tolerance.  ``interval`` is used only when
    the document holds a single data row (no spacing to measure).

    Raises:
        SeriesCsvError: empty body, malformed row, non-uniform spacing,
            or non-finite value, each reported with its line number.
    """
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines = lines[:-1]
    lines = [line.rstrip("\r") for line in lines]
    if not lines:
        raise SeriesCsvError("empty document")
    if lines[0] != "timestamp,value":
        raise SeriesCsvError(
            f"line 1: expected header 'timestamp,value', got {lines[0]!r}"
        )
    if len(lines) < 2:
        raise SeriesCsvError("no data rows after header")

    timestamps: list[float] = []
    values: list[float] = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 2:
            raise SeriesCsvError(f"malformed row at line {lineno}: {line!r}")
        try:
            ts = float(fields[0])
            val = float(fields[1])
        except ValueError:
            raise SeriesCsvError(f"malformed row at line {lineno}: {line!r}") from None
        if not math.isfinite(ts):
            raise SeriesCsvError(f"non-finite timestamp at line {lineno}")
        if not math.isfinite(val):
            raise SeriesCsvError(f"non-finite value at line {lineno}")
        if timestamps and ts <= timestamps[-1]:
            raise SeriesCsvError(f"timestamps not strictly increasing at line {lineno}")
        timestamps.append(ts)
        values.append(val)

    if len(timestamps) == 1:
        if interval is None:
            raise SeriesCsvError(
                "single-row document: sample interval cannot be inferred, "
                "pass an explicit interval"
            )
        step = float(interval)
    else:
        step = timestamps[1] - timestamps[0]
        for k in range(2, len(timestamps)):
            dt = timestamps[k] - timestamps[k - 1]
            if abs(dt - step) > SPACING_RTOL * abs(step):
                raise SeriesCsvError(f"non-uniform spacing at line {k + 2}")

    return TimeSeries(
        name=name,
        start_time=timestamps[0],
        interval=step,
        values=np.array(values, dtype=np.float64),
        unit=unit,
    )


def series_to_csv(series: TimeSeries) -> str:
    """Render a TimeSeries in the ``timestamp,value`` CSV format.

    Floats are written with shortest round-trip precision, so
    ``parse_series_csv(series_to_csv(s))`` reproduces the values exactly.
    """
    rows = ["timestamp,value"]
    for k, val in enumerate(series.values):
        rows.append(f"{series.time_at(k)!r},{float(val)!r}")
    return "\n".join(rows) + "\n"


def parse_proc_snapshot(text: str, timestamp: float) -> ResourceSample:
    """Parse a meminfo-style snapshot into a ResourceSample.

    The document must contain ``MemFree``, ``SwapTotal`` and ``SwapFree``
    in ``Key:<whitespace><integer> kB`` lines (keys case-sensitive, order
    free, unknown keys ignored).  Used swap is SwapTotal - SwapFree.
    """
    entries: dict[str, float] = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        match = _MEMINFO_LINE.match(line)
        if match is None:
            raise ProcSnapshotError(f"malformed line {lineno}: {line!r}")
        key, value = match.group(1), match.group(2)
        if key not in entries:
            entries[key] = float(value)

    for key in ("MemFree", "SwapTotal", "SwapFree"):
        if key not in entries:
            raise ProcSnapshotError(f"missing key {key}")

    swap_used = entries["SwapTotal"] - entries["SwapFree"]
    if swap_used < 0:
        raise ProcSnapshotError(
            f"negative swap usage: SwapTotal={entries['SwapTotal']:.0f} "
            f"< SwapFree={entries['SwapFree']:.0f}"
        )
    return ResourceSample(
        timestamp=timestamp,
        free_mem_kb=entries["MemFree"],
        swap_used_kb=swap_used,
    )


def min_max_scale(series: TimeSeries) -> tuple[TimeSeries, ScaleParams]:
    """Map a series onto [0, 1] via (v - min) / (max - min).

    Raises:
        ConstantSeriesError: all samples equal; the caller must skip
            scaling rather than receive a silent zero map.
        InvalidSeries: series shorter than 2 samples.
    """
    if len(series) < 2:
        raise InvalidSeries("scaling requires at least 2 samples")
    lo = float(series.values.min())
    hi = float(series.values.max())
    if hi == lo:
        raise ConstantSeriesError(f"constant series (all values {lo})")
    scaled = (series.values - lo) / (hi - lo)
    return replace(series, values=scaled), ScaleParams(min=lo, max=hi)


def inverse_scale(series: TimeSeries, params: ScaleParams) -> TimeSeries:
    """Undo min-max scaling: v -> v * (max - min) + min."""
    return replace(series, values=series.values * (params.max - params.min) + params.min)


def inverse_scale_values(values: np.ndarray, params: ScaleParams) -> np.ndarray:
    """Inverse-scale a bare value array (same map as ``inverse_scale``)."""
    return np.asarray(values, dtype=np.float64) * (params.max - params.min) + params.min


def split(series: TimeSeries, train_fraction: float) -> tuple[TimeSeries, TimeSeries]:
    """Chronological prefix split: floor(train_fraction * N) train samples.

    The test segment's start_time is advanced past the train segment;
    concatenating the two reproduces the input.
    """
    if not (0.0 < train_fraction < 1.0):
        raise InvalidSeries(f"train_fraction must be in (0, 1), got {train_fraction}")
    n_total = len(series)
    n_train = math.floor(train_fraction * n_total)
    if n_train < 1:
        raise InvalidSeries(
            f"empty train segment: fraction {train_fraction} of {n_total} samples"
        )
    if n_train >= n_total:
        raise InvalidSeries(
            f"empty test segment: fraction {train_fraction} of {n_total} samples"
        )
    train = replace(series, values=series.values[:n_train].copy())
    test = replace(
        series,
        values=series.values[n_train:].copy(),
        start_time=series.time_at(n_train),
    )
    return train, test


def embed(series: TimeSeries, order_m: int, horizon_n: int) -> WindowedDataset:
    """Build supervised pairs for an n-step predictor of order m.

    Pair k maps the window [x(k), ..., x(k+m)] (oldest to newest) onto the
    target x(k+m+n), yielding exactly N - m - n pairs.
    """
    if order_m < 0:
        raise InvalidSeries(f"order_m must be >= 0, got {order_m}")
    if horizon_n < 1:
        raise InvalidSeries(f"horizon_n must be >= 1, got {horizon_n}")
    n_total = len(series)
    minimum = order_m + horizon_n + 1
    if n_total < minimum:
        raise InvalidSeries(
            f"series too short for order m={order_m}, horizon n={horizon_n}: "
            f"need >= {minimum} samples, got {n_total}"
        )
    count = n_total - order_m - horizon_n
    vals = series.values
    inputs = np.empty((count, order_m + 1), dtype=np.float64)
    targets = np.empty(count, dtype=np.float64)
    for k in range(count):
        inputs[k] = vals[k : k + order_m + 1]
        targets[k] = vals[k + order_m + horizon_n]
    return WindowedDataset(
        order_m=order_m, horizon_n=horizon_n, inputs=inputs, targets=targets
    )
