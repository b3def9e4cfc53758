import math

import numpy as np
import pytest

from agewatch.metrics import (
    EvaluationReport,
    MetricInputError,
    evaluate,
    mape,
    report_to_csv,
    rmse,
)


class TestRmse:
    def test_perfect_fit_is_exactly_zero(self):
        assert rmse([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0

    def test_single_sample_absolute_error(self):
        assert rmse([3.0], [1.0]) == 2.0

    def test_hand_value(self):
        assert rmse([1.0, 2.0, 3.0], [1.0, 2.0, 5.0]) == pytest.approx(
            math.sqrt(4.0 / 3.0), abs=1e-12
        )

    def test_symmetry(self):
        rng = np.random.default_rng(37)
        for _ in range(50):
            n = int(rng.integers(1, 40))
            a = rng.normal(size=n)
            b = rng.normal(size=n)
            assert rmse(a, b) == rmse(b, a)

    def test_nonnegative_and_zero_iff_equal(self):
        rng = np.random.default_rng(41)
        for _ in range(50):
            n = int(rng.integers(1, 40))
            a = rng.normal(size=n)
            b = a.copy()
            if rng.random() < 0.5:
                b[int(rng.integers(0, n))] += 0.5
            value = rmse(a, b)
            assert value >= 0.0
            assert (value == 0.0) == bool(np.array_equal(a, b))

    def test_length_mismatch(self):
        with pytest.raises(MetricInputError, match="length mismatch"):
            rmse([1.0], [1.0, 2.0])

    def test_empty_input(self):
        with pytest.raises(MetricInputError, match="non-empty"):
            rmse([], [])


class TestMape:
    def test_perfect_fit_is_exactly_zero(self):
        assert mape([100.0, 200.0], [100.0, 200.0]) == 0.0

    def test_hand_value(self):
        assert mape([100.0, 200.0], [90.0, 220.0]) == pytest.approx(10.0, abs=1e-12)

    def test_zero_original_names_the_index(self):
        with pytest.raises(MetricInputError, match="zero original value at index 3"):
            mape([1.0, 2.0, 3.0, 0.0, 5.0], [1.0, 2.0, 3.0, 4.0, 5.0])

    def test_invariant_under_joint_positive_scaling(self):
        rng = np.random.default_rng(43)
        for _ in range(50):
            n = int(rng.integers(1, 30))
            y = rng.uniform(1.0, 100.0, size=n)
            f = y + rng.normal(0, 5.0, size=n)
            c = float(rng.uniform(0.01, 100.0))
            np.testing.assert_allclose(mape(c * y, c * f), mape(y, f), rtol=1e-9)

    def test_negative_originals_allowed(self):
        assert mape([-100.0], [-90.0]) == pytest.approx(10.0, abs=1e-12)


class TestEvaluate:
    def test_perfect_forecast(self):
        report = evaluate("response_time", [1.0, 2.0], [1.0, 2.0])
        assert report.rmse == 0.0
        assert report.mape_percent == 0.0
        assert report.n_samples == 2

    def test_bundles_both_hand_values(self):
        report = evaluate("swap", [1.0, 2.0, 3.0], [1.0, 2.0, 5.0])
        assert report.rmse == pytest.approx(math.sqrt(4.0 / 3.0), abs=1e-12)
        # targets are the originals for the percentage error
        assert report.mape_percent == pytest.approx((2.0 / 5.0) * 100.0 / 3.0, abs=1e-12)
        assert report.indicator == "swap"

    def test_empty_inputs_rejected(self):
        with pytest.raises(MetricInputError):
            evaluate("x", [], [])

    def test_report_invariants(self):
        with pytest.raises(MetricInputError):
            EvaluationReport(indicator="x", rmse=0.0, mape_percent=0.0, n_samples=0)
        with pytest.raises(MetricInputError):
            EvaluationReport(
                indicator="x", rmse=float("nan"), mape_percent=0.0, n_samples=1
            )


class TestReportCsv:
    def test_single_row_shape(self):
        report = evaluate("free_mem", [10.0], [8.0])
        text = report_to_csv(report)
        lines = text.strip().split("\n")
        assert lines[0] == "indicator,rmse,mape_percent,n_samples"
        fields = lines[1].split(",")
        assert fields[0] == "free_mem"
        assert float(fields[1]) == 2.0
        assert float(fields[2]) == 25.0
        assert fields[3] == "1"
