import math

import numpy as np
import pytest

from agewatch.rng import Xorshift64Star
from agewatch.synthload import (
    AgingProfile,
    InvalidProfile,
    generate_aging_series,
    profile_from_json,
    profile_to_json,
)


def profile(**overrides):
    base = dict(
        length=4,
        base=0.0,
        trend_slope=0.0,
        season_amplitude=0.0,
        season_period=4,
        noise_sigma=0.0,
        reset_period=0,
        seed=1,
    )
    base.update(overrides)
    return AgingProfile(**base)


class TestXorshift64Star:
    def test_matches_reference_recurrence(self):
        """Replay the documented recurrence with plain integer arithmetic."""
        mask = (1 << 64) - 1
        state = 12345
        expected = []
        for _ in range(5):
            state ^= state >> 12
            state = (state ^ (state << 25)) & mask
            state ^= state >> 27
            expected.append((state * 0x2545F4914F6CDD1D) & mask)
        stream = Xorshift64Star(12345)
        assert [stream.next_u64() for _ in range(5)] == expected

    def test_zero_seed_is_remapped(self):
        a = Xorshift64Star(0)
        b = Xorshift64Star(0x9E3779B97F4A7C15)
        assert a.next_u64() == b.next_u64()

    def test_unit_draws_are_in_half_open_interval(self):
        stream = Xorshift64Star(9)
        draws = [stream.next_unit() for _ in range(1000)]
        assert all(0.0 < u <= 1.0 for u in draws)

    def test_uniform_draws_respect_bounds(self):
        stream = Xorshift64Star(9)
        draws = [stream.next_uniform(-0.25, 0.25) for _ in range(1000)]
        assert all(-0.25 <= u < 0.25 for u in draws)

    def test_gaussian_consumes_two_outputs(self):
        a = Xorshift64Star(77)
        b = Xorshift64Star(77)
        z = a.next_gaussian()
        u1, u2 = b.next_unit(), b.next_unit()
        assert z == math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


class TestGenerateAgingSeries:
    def test_all_variation_disabled(self):
        series = generate_aging_series(profile(base=5.0, length=4))
        np.testing.assert_array_equal(series.values, [5.0, 5.0, 5.0, 5.0])

    def test_pure_ramp(self):
        series = generate_aging_series(profile(trend_slope=1.0, length=4))
        np.testing.assert_array_equal(series.values, [0.0, 1.0, 2.0, 3.0])

    def test_modulo_ramp_with_reset(self):
        series = generate_aging_series(
            profile(trend_slope=1.0, reset_period=2, length=5)
        )
        np.testing.assert_array_equal(series.values, [0.0, 1.0, 0.0, 1.0, 0.0])

    def test_deterministic_bit_identical(self):
        spec = profile(
            length=200,
            base=100.0,
            trend_slope=0.5,
            season_amplitude=3.0,
            season_period=12,
            noise_sigma=2.0,
            seed=42,
        )
        a = generate_aging_series(spec)
        b = generate_aging_series(spec)
        np.testing.assert_array_equal(a.values, b.values)

    def test_seed_changes_the_noise(self):
        a = generate_aging_series(profile(length=50, noise_sigma=1.0, seed=1))
        b = generate_aging_series(profile(length=50, noise_sigma=1.0, seed=2))
        assert not np.array_equal(a.values, b.values)

    def test_noiseless_drift_is_exact(self):
        spec = profile(length=101, base=10.0, trend_slope=0.125, season_amplitude=1.5)
        series = generate_aging_series(spec)
        assert series.values[-1] - series.values[0] == 0.125 * 100

    def test_output_always_finite(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            spec = profile(
                length=int(rng.integers(2, 300)),
                base=float(rng.uniform(-1e3, 1e3)),
                trend_slope=float(rng.uniform(-10, 10)),
                season_amplitude=float(rng.uniform(0, 50)),
                season_period=int(rng.integers(2, 48)),
                noise_sigma=float(rng.uniform(0, 10)),
                reset_period=int(rng.integers(0, 100)),
                seed=int(rng.integers(0, 2**63)),
            )
            series = generate_aging_series(spec)
            assert np.isfinite(series.values).all()

    def test_timebase_passthrough(self):
        series = generate_aging_series(
            profile(length=3), name="swap_used_kb", unit="kB", start_time=50.0, interval=10.0
        )
        assert series.name == "swap_used_kb"
        assert series.unit == "kB"
        assert series.start_time == 50.0
        assert series.interval == 10.0


class TestProfileValidation:
    def test_length_bound(self):
        with pytest.raises(InvalidProfile):
            profile(length=1)

    def test_season_period_bound(self):
        with pytest.raises(InvalidProfile):
            profile(season_period=1)

    def test_negative_noise(self):
        with pytest.raises(InvalidProfile):
            profile(noise_sigma=-0.1)

    def test_negative_amplitude(self):
        with pytest.raises(InvalidProfile):
            profile(season_amplitude=-1.0)

    def test_seed_range(self):
        with pytest.raises(InvalidProfile):
            profile(seed=2**64)


class TestProfileJson:
    def test_round_trip(self):
        spec = profile(length=10, base=3.5, noise_sigma=0.25, seed=99)
        assert profile_from_json(profile_to_json(spec)) == spec

    def test_missing_key_rejected(self):
        with pytest.raises(InvalidProfile, match="missing keys: seed"):
            profile_from_json(
                '{"length": 4, "base": 0, "trend_slope": 0, "season_amplitude": 0,'
                ' "season_period": 4, "noise_sigma": 0, "reset_period": 0}'
            )

    def test_unknown_key_rejected(self):
        text = profile_to_json(profile()).rstrip("\n}") + ', "bogus": 1}'
        with pytest.raises(InvalidProfile, match="unknown keys: bogus"):
            profile_from_json(text)

    def test_invalid_json_rejected(self):
        with pytest.raises(InvalidProfile, match="invalid profile JSON"):
            profile_from_json("{not json")

    def test_non_object_rejected(self):
        with pytest.raises(InvalidProfile, match="object"):
            profile_from_json("[1, 2]")
