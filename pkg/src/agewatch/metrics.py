"""Forecast-accuracy metrics: RMSE and MAPE, plus the combined report.

Metrics are meant to be computed in the original (unscaled) domain.
MAPE rejects zero denominators instead of epsilon-patching them; aging
indicators here are positive, so the restriction costs nothing and keeps
the number honest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AgewatchError


class MetricInputError(AgewatchError):
    """Raised when metric inputs are empty, mismatched, or divide by zero."""


@dataclass(frozen=True)
class EvaluationReport:
    """RMSE and MAPE for one indicator's prediction/target pair."""

    indicator: str
    rmse: float
    mape_percent: float
    n_samples: int

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise MetricInputError(f"n_samples must be >= 1, got {self.n_samples}")
        if not (math.isfinite(self.rmse) and math.isfinite(self.mape_percent)):
            raise MetricInputError(
                f"metrics must be finite, got rmse={self.rmse} mape={self.mape_percent}"
            )


def _as_pair(
    first: Sequence[float] | np.ndarray, second: Sequence[float] | np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(first, dtype=np.float64)
    b = np.asarray(second, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise MetricInputError("metric inputs must be 1-D sequences")
    if a.size == 0:
        raise MetricInputError("metric inputs must be non-empty")
    if a.size != b.size:
        raise MetricInputError(f"length mismatch: {a.size} vs {b.size}")
    return a, b


def rmse(
    predicted: Sequence[float] | np.ndarray, target: Sequence[float] | np.ndarray
) -> float:
    """Root mean squared error sqrt((1/n) sum (P_j - T_j)^2); 0 is a perfect fit."""
    p, t = _as_pair(predicted, target)
    diff = p - t
    return float(np.sqrt(np.mean(diff * diff)))


def mape(
    original: Sequence[float] | np.ndarray, forecast: Sequence[float] | np.ndarray
) -> float:
    """Mean absolute percent error (1/n) sum |(y_t - f_t) / y_t| * 100.

    Raises:
        MetricInputError: any original value is exactly zero (the
            percentage is undefined there), reported with its index.
    """
    y, f = _as_pair(original, forecast)
    zero = np.nonzero(y == 0.0)[0]
    if zero.size:
        raise MetricInputError(f"zero original value at index {int(zero[0])}")
    return float(np.mean(np.abs((y - f) / y)) * 100.0)


def evaluate(
    indicator: str,
    predicted: Sequence[float] | np.ndarray,
    target: Sequence[float] | np.ndarray,
) -> EvaluationReport:
    """Bundle both metrics for one indicator (targets are the originals)."""
    p, t = _as_pair(predicted, target)
    return EvaluationReport(
        indicator=indicator,
        rmse=rmse(p, t),
        mape_percent=mape(t, p),
        n_samples=int(p.size),
    )


def report_to_csv(report: EvaluationReport) -> str:
    """One header plus one data row: ``indicator,rmse,mape_percent,n_samples``."""
    return (
        "indicator,rmse,mape_percent,n_samples\n"
        f"{report.indicator},{report.rmse!r},{report.mape_percent!r},{report.n_samples}\n"
    )
