"""Seeded generator of synthetic aging-indicator series.

Stands in for a physical stressed-server testbed at desk scale: a linear
resource drift (optionally resetting at fixed intervals, like stepwise swap
growth), an additive sinusoid for periodic workload, and Gaussian noise
drawn from the deterministic xorshift64* stream in :mod:`agewatch.rng`.
Identical profiles produce bit-identical series.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import AgewatchError
from .rng import Xorshift64Star
from .timeseries import TimeSeries


class InvalidProfile(AgewatchError):
    """Raised when an AgingProfile violates its invariants or its JSON form
    is malformed."""


@dataclass(frozen=True)
class AgingProfile:
    """Parameters of one synthetic aging-indicator series.

    Attributes:
        length: sample count, >= 2.
        base: baseline level.
        trend_slope: per-step drift (aging accumulation).
        season_amplitude: amplitude of the periodic workload term, >= 0.
        season_period: sinusoid period in samples, >= 2.
        noise_sigma: Gaussian noise standard deviation, >= 0.
        reset_period: 0 = never reset; otherwise the drift term returns to
            zero every reset_period steps.
        seed: 64-bit unsigned seed for the noise stream.
    """

    length: int
    base: float
    trend_slope: float
    season_amplitude: float
    season_period: int
    noise_sigma: float
    reset_period: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.length < 2:
            raise InvalidProfile(f"length must be >= 2, got {self.length}")
        if self.season_period < 2:
            raise InvalidProfile(f"season_period must be >= 2, got {self.season_period}")
        if self.season_amplitude < 0:
            raise InvalidProfile(
                f"season_amplitude must be >= 0, got {self.season_amplitude}"
            )
        if self.noise_sigma < 0:
            raise InvalidProfile(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.reset_period < 0:
            raise InvalidProfile(f"reset_period must be >= 0, got {self.reset_period}")
        if not (0 <= self.seed < 2**64):
            raise InvalidProfile(f"seed must be a 64-bit unsigned integer, got {self.seed}")


def profile_from_json(text: str) -> AgingProfile:
    """Parse an AgingProfile from a JSON document.

    The document must carry exactly the profile field names; missing or
    unknown keys are rejected rather than defaulted.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidProfile(f"invalid profile JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise InvalidProfile("profile JSON must be an object")
    expected = {f.name for f in fields(AgingProfile)}
    missing = sorted(expected - raw.keys())
    unknown = sorted(raw.keys() - expected)
    if missing:
        raise InvalidProfile(f"profile JSON missing keys: {', '.join(missing)}")
    if unknown:
        raise InvalidProfile(f"profile JSON has unknown keys: {', '.join(unknown)}")
    return AgingProfile(
        length=int(raw["length"]),
        base=float(raw["base"]),
        trend_slope=float(raw["trend_slope"]),
        season_amplitude=float(raw["season_amplitude"]),
        season_period=int(raw["season_period"]),
        noise_sigma=float(raw["noise_sigma"]),
        reset_period=int(raw["reset_period"]),
        seed=int(raw["seed"]),
    )


def profile_to_json(profile: AgingProfile) -> str:
    """Render a profile as a JSON document accepted by ``profile_from_json``."""
    return json.dumps(
        {
            "length": profile.length,
            "base": profile.base,
            "trend_slope": profile.trend_slope,
            "season_amplitude": profile.season_amplitude,
            "season_period": profile.season_period,
            "noise_sigma": profile.noise_sigma,
            "reset_period": profile.reset_period,
            "seed": profile.seed,
        },
        indent=2,
    ) + "\n"


def generate_aging_series(
    profile: AgingProfile,
    *,
    name: str = "synthetic",
    unit: str = "",
    start_time: float = 0.0,
    interval: float = 1.0,
) -> TimeSeries:
    """Generate the series described by ``profile``.

    Sample t (t = 0, 1, ...) is computed left to right as

        base
        + trend_slope * (t mod reset_period)        [t itself when reset_period = 0]
        + season_amplitude * sin(2 pi t / season_period)
        + noise                                     [omitted when noise_sigma = 0]

    where ``noise`` is noise_sigma times one standard normal deviate per
    step, drawn in sample order from ``Xorshift64Star(profile.seed)``.
    """
    stream = Xorshift64Star(profile.seed) if profile.noise_sigma > 0 else None
    two_pi = 2.0 * math.pi
    values = np.empty(profile.length, dtype=np.float64)
    for t in range(profile.length):
        drift_steps = t % profile.reset_period if profile.reset_period > 0 else t
        value = profile.base + profile.trend_slope * drift_steps
        value += profile.season_amplitude * math.sin(two_pi * t / profile.season_period)
        if stream is not None:
            value += profile.noise_sigma * stream.next_gaussian()
        values[t] = value
    return TimeSeries(
        name=name,
        start_time=start_time,
        interval=interval,
        values=values,
        unit=unit,
    )
