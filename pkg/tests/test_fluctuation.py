import math
import os
import sys
import tempfile
import unittest
from fractions import Fraction
from pathlib import Path

import numpy as np
import pandas as pd
from hypothesis import assume, given, settings, strategies as st

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.analysis import (
    TimeSeries,
    arithmetic_mean,
    centered_moving_average,
    fluctuations,
    nearest_rank,
    percentile_band,
    flag_out_of_band,
    analyze_fluctuations,
    chart_frame,
    write_fluctuation_report,
    CHART_COLUMNS,
)
from src.utils.errors import AlignmentError, EmptySeries, InsufficientContext
from tests.helpers import APRIL_5_2021_MS, DAY_MS

HOUR_MS = 3_600_000
FIVE_MINUTES_MS = 300_000

def grid(days: int, step_ms: int, start_ms: int = APRIL_5_2021_MS) -> np.ndarray:
    return start_ms + np.arange(days * DAY_MS // step_ms, dtype=np.int64) * step_ms

def constant_series(days: int = 40, value: float = 50.0) -> TimeSeries:
    timestamps = grid(days, FIVE_MINUTES_MS)
    return TimeSeries(timestamps, np.full(len(timestamps), value), "%RH")

def band_values(low: float, high: float) -> list:
    """100 values whose 7th and 93rd nearest-rank percentiles are low and high"""
    return [low] * 7 + [0.0] * 85 + [high] * 8

class TestPercentiles(unittest.TestCase):

    def test_one_to_hundred(self):
        values = np.arange(1, 101, dtype=np.float64)
        self.assertEqual(nearest_rank(values, 7), 7.0)
        self.assertEqual(nearest_rank(values, 93), 93.0)

    def test_single_value(self):
        self.assertEqual(nearest_rank(np.array([3.5]), 7), 3.5)
        self.assertEqual(nearest_rank(np.array([3.5]), 93), 3.5)

    def test_empty_set(self):
        with self.assertRaises(EmptySeries):
            nearest_rank(np.array([]), 7)

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(st.floats(min_value=-50, max_value=50, allow_nan=False), min_size=1, max_size=400),
        st.integers(min_value=1, max_value=99),
    )
    def test_matches_sorted_rank(self, values, percentile):
        rank = max(1, math.ceil(Fraction(percentile * len(values), 100)))
        self.assertEqual(nearest_rank(np.array(values), percentile), sorted(values)[rank - 1])

    def test_small_percentiles_relax_to_ten(self):
        for low, high in ((-4.0, 4.2), (-7.0, 6.9)):
            with self.subTest(low=low, high=high):
                band = percentile_band(band_values(low, high))
                self.assertEqual((band.p_lower, band.p_upper), (low, high))
                self.assertEqual(band.band_halfwidth, 10.0)
                self.assertEqual((band.lower_offset, band.upper_offset), (-10.0, 10.0))

    def test_wide_percentiles_are_used_directly(self):
        band = percentile_band(band_values(-12.0, 9.0))
        self.assertFalse(band.relaxed)
        self.assertEqual((band.lower_offset, band.upper_offset), (-12.0, 9.0))

    def test_percentile_on_the_limit_does_not_relax(self):
        band = percentile_band(band_values(-10.0, 3.0))
        self.assertIsNone(band.band_halfwidth)
        self.assertEqual((band.lower_offset, band.upper_offset), (-10.0, 3.0))

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(min_value=-30, max_value=30, allow_nan=False), min_size=1, max_size=300))
    def test_percentiles_are_ordered_within_range(self, values):
        band = percentile_band(values)
        self.assertLessEqual(min(values), band.p_lower)
        self.assertLessEqual(band.p_lower, band.p_upper)
        self.assertLessEqual(band.p_upper, max(values))

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(min_value=0, max_value=30, allow_nan=False), min_size=1, max_size=300))
    def test_symmetric_fluctuations_give_symmetric_percentiles(self, halves):
        # With 7n/100 integral the two ranks are not mirror images
        assume((7 * 2 * len(halves)) % 100 != 0)
        values = halves + [-v for v in halves]
        band = percentile_band(values)
        self.assertEqual(band.p_lower, -band.p_upper)

class TestCenteredMovingAverage(unittest.TestCase):

    @settings(max_examples=50, deadline=None)
    @given(st.lists(
        st.tuples(st.integers(min_value=1, max_value=36), st.floats(min_value=-100, max_value=100, allow_nan=False)),
        min_size=1,
        max_size=200,
    ))
    def test_matches_brute_force_window_mean(self, steps):
        timestamps = np.cumsum([hours * HOUR_MS for hours, _ in steps]).astype(np.int64)
        values = np.array([value for _, value in steps])
        series = TimeSeries(timestamps, values)
        half = DAY_MS

        targets = [t for t in timestamps if t - half >= timestamps[0] and t + half <= timestamps[-1]]
        if not targets:
            with self.assertRaises(InsufficientContext):
                centered_moving_average(series, window_days=2)
            return

        cma = centered_moving_average(series, window_days=2)
        self.assertEqual(cma.timestamps.tolist(), [int(t) for t in targets])
        for t, mean in zip(cma.timestamps, cma.values):
            inside = values[(timestamps >= t - half) & (timestamps <= t + half)]
            self.assertTrue(np.isclose(mean, inside.mean(), rtol=1e-9, atol=1e-9))

    def test_constant_series(self):
        series = constant_series()
        cma = centered_moving_average(series, 30, period=(APRIL_5_2021_MS + 15 * DAY_MS, APRIL_5_2021_MS + 25 * DAY_MS))
        self.assertEqual(len(cma), 10 * 288)
        self.assertTrue(np.allclose(cma.values, 50.0))

    def test_linear_in_the_values(self):
        rng = np.random.default_rng(3)
        timestamps = grid(40, HOUR_MS)
        values = rng.normal(40.0, 5.0, len(timestamps))
        period = (APRIL_5_2021_MS + 15 * DAY_MS, APRIL_5_2021_MS + 25 * DAY_MS)

        plain = centered_moving_average(TimeSeries(timestamps, values), 30, period=period)
        scaled = centered_moving_average(TimeSeries(timestamps, 3.0 * values + 7.0), 30, period=period)
        self.assertTrue(np.allclose(scaled.values, 3.0 * plain.values + 7.0, rtol=1e-9))

    def test_ramp_is_preserved(self):
        timestamps = grid(40, FIVE_MINUTES_MS)
        values = (timestamps - APRIL_5_2021_MS) / DAY_MS
        period = (APRIL_5_2021_MS + 15 * DAY_MS, APRIL_5_2021_MS + 25 * DAY_MS)
        cma = centered_moving_average(TimeSeries(timestamps, values), 30, period=period)
        expected = TimeSeries(timestamps, values).window(*period).values
        self.assertTrue(np.allclose(cma.values, expected, atol=1e-9))

    def test_attenuates_sixty_day_cycle(self):
        amplitude = 5.0
        timestamps = grid(180, HOUR_MS)
        phase = 2 * np.pi * (timestamps - APRIL_5_2021_MS) / (60 * DAY_MS)
        series = TimeSeries(timestamps, 50.0 + amplitude * np.cos(phase))
        peak = APRIL_5_2021_MS + 60 * DAY_MS

        cma = centered_moving_average(series, 30, period=(peak, peak + 1))
        ratio = (cma.values[0] - 50.0) / amplitude
        self.assertLess(abs(ratio - 2 / np.pi), 0.02 * 2 / np.pi)

    def test_missing_context(self):
        timestamps = grid(20, HOUR_MS)
        series = TimeSeries(timestamps, np.zeros(len(timestamps)))
        period = (APRIL_5_2021_MS + 5 * DAY_MS, APRIL_5_2021_MS + 10 * DAY_MS)
        with self.assertRaises(InsufficientContext) as caught:
            centered_moving_average(series, 30, period=period)
        self.assertEqual(caught.exception.missing_before_ms, 10 * DAY_MS)
        self.assertEqual(caught.exception.missing_after_ms, 5 * DAY_MS)

    def test_tolerance_absorbs_bucket_shortfall(self):
        series = constant_series(30)
        target = APRIL_5_2021_MS + 15 * DAY_MS - FIVE_MINUTES_MS
        period = (target, target + FIVE_MINUTES_MS)
        # The margin before the target starts one bucket ahead of the first reading
        with self.assertRaises(InsufficientContext) as caught:
            centered_moving_average(series, 30, period=period)
        self.assertEqual(caught.exception.missing_before_ms, FIVE_MINUTES_MS)
        cma = centered_moving_average(series, 30, period=period, tolerance_ms=FIVE_MINUTES_MS)
        self.assertEqual(cma.timestamps.tolist(), [target])

class TestFluctuations(unittest.TestCase):

    def test_mean_of_empty_series(self):
        with self.assertRaises(EmptySeries):
            arithmetic_mean(TimeSeries.from_points([]))

    def test_misaligned_moving_average(self):
        series = TimeSeries(np.array([0, 1, 2]), np.zeros(3))
        cma = TimeSeries(np.array([0, 1]), np.zeros(2))
        with self.assertRaises(AlignmentError):
            fluctuations(series, cma)
        with self.assertRaises(AlignmentError):
            flag_out_of_band(series, cma, percentile_band([0.0]))

    def test_constant_series_has_no_fluctuation(self):
        start = APRIL_5_2021_MS + 15 * DAY_MS
        analysis = analyze_fluctuations(constant_series(), start, start + 10 * DAY_MS)

        self.assertEqual(analysis.mean, 50.0)
        self.assertTrue(np.allclose(analysis.fluctuations.values, 0.0))
        self.assertTrue(analysis.relaxed)
        self.assertEqual(analysis.band_halfwidth, 10.0)
        self.assertTrue(np.allclose(analysis.lower, 40.0))
        self.assertTrue(np.allclose(analysis.upper, 60.0))
        self.assertEqual(analysis.out_of_band, [])
        self.assertEqual(analysis.summary()["band"], "+/-10.0")

    def test_chain_needs_the_full_margin(self):
        series = constant_series()
        late = series.window(APRIL_5_2021_MS + FIVE_MINUTES_MS, APRIL_5_2021_MS + 40 * DAY_MS)
        start = APRIL_5_2021_MS + 15 * DAY_MS
        with self.assertRaises(InsufficientContext) as caught:
            analyze_fluctuations(late, start, start + 10 * DAY_MS)
        self.assertEqual(caught.exception.missing_before_ms, FIVE_MINUTES_MS)
        self.assertEqual(caught.exception.missing_after_ms, 0)

    def test_single_spike_is_flagged(self):
        series = constant_series()
        spike_at = APRIL_5_2021_MS + 20 * DAY_MS
        values = series.values.copy()
        values[series.timestamps == spike_at] = 80.0
        start = APRIL_5_2021_MS + 15 * DAY_MS

        analysis = analyze_fluctuations(series.with_values(values), start, start + 10 * DAY_MS)
        self.assertEqual(analysis.out_of_band, [(spike_at, 80.0)])
        self.assertEqual(analysis.summary()["out_of_band"], 1)

    def test_point_on_the_band_edge_is_not_flagged(self):
        series = TimeSeries(np.array([0, 1, 2]), np.array([40.0, 50.0, 60.0]))
        cma = series.with_values([50.0, 50.0, 50.0])
        band = percentile_band([0.0])
        self.assertEqual(flag_out_of_band(series, cma, band), [])

class TestFluctuationReport(unittest.TestCase):

    def setUp(self):
        series = constant_series()
        values = series.values.copy()
        self.spike_at = APRIL_5_2021_MS + 20 * DAY_MS + 7 * FIVE_MINUTES_MS
        values[series.timestamps == self.spike_at] = 80.0
        start = APRIL_5_2021_MS + 15 * DAY_MS
        self.analysis = analyze_fluctuations(series.with_values(values), start, start + 10 * DAY_MS)

    def test_chart_keeps_flagged_points(self):
        frame = chart_frame(self.analysis, display_points=720)
        self.assertEqual(list(frame.columns), CHART_COLUMNS)
        self.assertIn(len(frame), (720, 721))
        self.assertEqual(int(frame["flagged"].sum()), 1)
        self.assertEqual(frame.loc[frame["flagged"] == 1, "value"].tolist(), [80.0])

    def test_report_files(self):
        with tempfile.TemporaryDirectory() as tmp:
            paths = write_fluctuation_report(self.analysis, tmp, tz="Europe/Oslo")
            self.assertEqual([p.name for p in paths], ["fluctuation_report.txt", "chart.csv"])
            report = (Path(tmp) / "fluctuation_report.txt").read_text(encoding="utf-8")
            self.assertIn("Points outside the safe band: 1", report)
            chart = pd.read_csv(Path(tmp) / "chart.csv")
            self.assertEqual(list(chart.columns), CHART_COLUMNS)
            self.assertEqual(len(chart), 10 * 288)
            self.assertTrue(chart["timestamp"].iloc[0].endswith("+0200"))

if __name__ == '__main__':
    unittest.main()
