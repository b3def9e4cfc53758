"""Turn per-indicator forecasts into a rejuvenation schedule.

The schedule is the earliest predicted crossing of an exhaustion threshold
across all indicators, pulled forward by a configurable safety lead.
Thresholds are operator inputs; rising indicators (swap used, response
time) cross when a forecast value reaches or exceeds the threshold,
falling ones (free memory) when it reaches or drops below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AgewatchError
from .rbfnn import ForecastResult
from .timeseries import ScaleParams, inverse_scale_values


class ScheduleInputError(AgewatchError):
    """Raised when thresholds and forecasts cannot be matched."""


@dataclass(frozen=True)
class ThresholdSpec:
    """Exhaustion threshold for one indicator, in original units."""

    indicator: str
    threshold: float
    direction: str

    def __post_init__(self) -> None:
        if not math.isfinite(self.threshold):
            raise ScheduleInputError(f"threshold must be finite, got {self.threshold}")
        if self.direction not in ("rising", "falling"):
            raise ScheduleInputError(
                f"direction must be 'rising' or 'falling', got {self.direction!r}"
            )


@dataclass(frozen=True)
class IndicatorForecast:
    """A forecast plus the context needed to place it on the wall clock.

    ``origin_time`` is the wall-clock time of forecast step 0 and
    ``interval`` the spacing between steps; ``scale`` (when present) maps
    the scaled forecast values back to original units before thresholds
    are applied.
    """

    indicator: str
    result: ForecastResult
    origin_time: float
    interval: float
    scale: ScaleParams | None = None

    def __post_init__(self) -> None:
        if not (self.interval > 0):
            raise ScheduleInputError(f"interval must be > 0, got {self.interval}")

    def values_in_original_units(self) -> np.ndarray:
        if self.scale is None:
            return self.result.values
        return inverse_scale_values(self.result.values, self.scale)


@dataclass(frozen=True)
class IndicatorCrossing:
    """First predicted threshold crossing for one indicator, if any."""

    indicator: str
    first_crossing_step: int | None
    crossing_time: float | None


@dataclass(frozen=True)
class RejuvenationSchedule:
    """Per-indicator crossings plus the single recommended restart time.

    ``recommended_time`` is None when no indicator crosses its threshold
    within the forecast horizon; otherwise it is never earlier than the
    binding forecast's origin.
    """

    crossings: tuple[IndicatorCrossing, ...]
    recommended_time: float | None
    lead_steps: int


def first_crossing(values: np.ndarray, spec: ThresholdSpec) -> int | None:
    """Index of the first value at or beyond the threshold, or None."""
    if spec.direction == "rising":
        hits = np.nonzero(values >= spec.threshold)[0]
    else:
        hits = np.nonzero(values <= spec.threshold)[0]
    return int(hits[0]) if hits.size else None


def derive_schedule(
    forecasts: list[IndicatorForecast] | tuple[IndicatorForecast, ...],
    specs: list[ThresholdSpec] | tuple[ThresholdSpec, ...],
    lead: int = 0,
) -> RejuvenationSchedule:
    """Earliest predicted exhaustion across indicators, minus a safety lead.

    For each threshold spec the matching forecast (inverse-scaled to
    original units) is scanned for its first crossing step k; the crossing
    time is origin_time + k * interval.  The recommendation is the
    earliest crossing pulled forward by ``lead`` steps, floored at that
    forecast's origin.  Forecasts without a spec are ignored.

    Raises:
        ScheduleInputError: a spec names an indicator with no forecast.
    """
    if lead < 0:
        raise ScheduleInputError(f"lead must be >= 0, got {lead}")
    by_name = {fc.indicator: fc for fc in forecasts}
    if len(by_name) != len(forecasts):
        raise ScheduleInputError("duplicate indicator in forecasts")

    crossings: list[IndicatorCrossing] = []
    best: tuple[float, IndicatorForecast, int] | None = None
    for spec in specs:
        forecast = by_name.get(spec.indicator)
        if forecast is None:
            raise ScheduleInputError(
                f"threshold references unknown indicator {spec.indicator!r}"
            )
        step = first_crossing(forecast.values_in_original_units(), spec)
        if step is None:
            crossings.append(IndicatorCrossing(spec.indicator, None, None))
            continue
        when = forecast.origin_time + step * forecast.interval
        crossings.append(IndicatorCrossing(spec.indicator, step, when))
        if best is None or when < best[0]:
            best = (when, forecast, step)

    recommended = None
    if best is not None:
        _, forecast, step = best
        recommended = forecast.origin_time + max(step - lead, 0) * forecast.interval

    return RejuvenationSchedule(
        crossings=tuple(crossings), recommended_time=recommended, lead_steps=lead
    )


def schedule_to_csv(schedule: RejuvenationSchedule) -> str:
    """Serialize as ``indicator,first_crossing_step,crossing_time`` rows.

    Indicators that never cross leave their cells empty; the final summary
    row carries the recommended rejuvenation time (or an empty cell when
    nothing crosses).
    """
    rows = ["indicator,first_crossing_step,crossing_time"]
    for crossing in schedule.crossings:
        if crossing.first_crossing_step is None:
            rows.append(f"{crossing.indicator},,")
        else:
            rows.append(
                f"{crossing.indicator},{crossing.first_crossing_step},"
                f"{crossing.crossing_time!r}"
            )
    if schedule.recommended_time is None:
        rows.append("recommended_time,,")
    else:
        rows.append(f"recommended_time,,{schedule.recommended_time!r}")
    return "\n".join(rows) + "\n"
