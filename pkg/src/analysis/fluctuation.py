"""
Short-term relative-humidity fluctuation analysis (EN 15757:2010 procedure).

The chain is: median resampling -> 30-day centred moving average ->
fluctuations (reading minus average) -> 7th/93rd percentile band,
relaxed to +/-10 %RH when both percentiles are small -> out-of-band flags.
"""

from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from src.config import config
from src.utils import get_logger, round_half_up
from src.utils.errors import AlignmentError, EmptySeries, InsufficientContext
from src.analysis.series import TimeSeries
from src.analysis.resampling import median_resample

logger = get_logger("fluctuation_analysis")

MS_PER_DAY = 86_400_000

def arithmetic_mean(series: TimeSeries) -> float:
    """Mean of all readings; raises EmptySeries on an empty series"""
    if series.empty:
        raise EmptySeries("Cannot average an empty series")
    return float(np.mean(series.values))

def _check_context(series: TimeSeries, first_ms: int, last_ms: int, half_ms: int, tolerance_ms: int) -> None:
    missing_before = max(0, int(series.timestamps[0]) - (first_ms - half_ms))
    missing_after = max(0, (last_ms + half_ms) - int(series.timestamps[-1]))
    if missing_before > tolerance_ms or missing_after > tolerance_ms:
        message = (
            f"Moving average needs data from {first_ms - half_ms} to {last_ms + half_ms}; "
            f"missing {missing_before} ms before and {missing_after} ms after"
        )
        logger.error(message)
        raise InsufficientContext(message, missing_before_ms=missing_before, missing_after_ms=missing_after)

def centered_moving_average(
    series: TimeSeries,
    window_days: int = None,
    period: Optional[Tuple[int, int]] = None,
    tolerance_ms: int = 0,
) -> TimeSeries:
    """
    Centred moving average: for each output point t, the mean of all points in
    [t - window/2, t + window/2].

    Args:
        series: Source series, usually median-resampled
        window_days: Full window width in days
        period: Optional [start, end) in ms; output points are the series points in it.
            Without a period, every point with a full window of context is used.
        tolerance_ms: Allowed shortfall of context at either end

    Returns:
        Series of moving-average values at the output points

    Raises:
        InsufficientContext: the series does not cover the half-window margins
    """
    window_days = window_days or config.analysis.cma_window_days
    half_ms = window_days * MS_PER_DAY // 2
    if series.empty:
        raise EmptySeries("Cannot compute a moving average of an empty series")

    timestamps = series.timestamps
    if period is not None:
        targets = series.window(*period).timestamps
        if len(targets) == 0:
            raise EmptySeries(f"No readings inside the period {period[0]} - {period[1]}")
        _check_context(series, int(targets[0]), int(targets[-1]), half_ms, tolerance_ms)
    else:
        interior = (timestamps - half_ms >= timestamps[0]) & (timestamps + half_ms <= timestamps[-1])
        targets = timestamps[interior]
        if len(targets) == 0:
            span = int(timestamps[-1] - timestamps[0])
            raise InsufficientContext(
                f"Series spans {span} ms, shorter than the {2 * half_ms} ms window",
                missing_before_ms=0,
                missing_after_ms=2 * half_ms - span,
            )

    # Prefix sums around an offset keep the window means accurate on long series
    offset = float(series.values.mean())
    prefix = np.concatenate(([0.0], np.cumsum(series.values - offset)))
    lo = np.searchsorted(timestamps, targets - half_ms, side="left")
    hi = np.searchsorted(timestamps, targets + half_ms, side="right")
    means = (prefix[hi] - prefix[lo]) / (hi - lo) + offset
    return TimeSeries(targets, means, series.unit)

def fluctuations(series: TimeSeries, cma: TimeSeries) -> TimeSeries:
    """Pointwise reading minus moving average"""
    if not np.array_equal(series.timestamps, cma.timestamps):
        raise AlignmentError(
            f"Series ({len(series)} points) and moving average ({len(cma)} points) are not aligned"
        )
    return TimeSeries(series.timestamps, series.values - cma.values, series.unit)

def nearest_rank(values: np.ndarray, percentile: int) -> float:
    """Nearest-rank percentile: the value at 1-based rank ceil(p * n / 100)"""
    n = len(values)
    if n == 0:
        raise EmptySeries("Cannot take a percentile of an empty set")
    rank = max(1, -(-percentile * n // 100))
    return float(np.sort(values, kind="mergesort")[rank - 1])

class PercentileBand(NamedTuple):
    p_lower: float
    p_upper: float
    band_halfwidth: Optional[float]  # set when relaxed to a symmetric band

    @property
    def relaxed(self) -> bool:
        return self.band_halfwidth is not None

    @property
    def lower_offset(self) -> float:
        return -self.band_halfwidth if self.relaxed else self.p_lower

    @property
    def upper_offset(self) -> float:
        return self.band_halfwidth if self.relaxed else self.p_upper

def percentile_band(
    values,
    lower: int = None,
    upper: int = None,
    relaxation_limit: float = None,
) -> PercentileBand:
    """
    7th/93rd percentile band of the fluctuations.

    When both percentiles lie strictly within the relaxation limit the band is
    widened to a symmetric +/- limit; otherwise the percentiles are used directly.

    Args:
        values: Fluctuations (TimeSeries or array)
        lower: Lower percentile, default 7
        upper: Upper percentile, default 93
        relaxation_limit: Relaxed half-width, default 10 (%RH)

    Returns:
        PercentileBand(p_lower, p_upper, band_halfwidth)
    """
    lower = lower or config.analysis.lower_percentile
    upper = upper or config.analysis.upper_percentile
    limit = config.analysis.relaxation_limit if relaxation_limit is None else relaxation_limit
    array = values.values if isinstance(values, TimeSeries) else np.asarray(values, dtype=np.float64)

    p_lower = nearest_rank(array, lower)
    p_upper = nearest_rank(array, upper)
    halfwidth = limit if max(abs(p_lower), abs(p_upper)) < limit else None
    return PercentileBand(p_lower, p_upper, halfwidth)

def safe_band(cma: TimeSeries, band: PercentileBand) -> Tuple[np.ndarray, np.ndarray]:
    return cma.values + band.lower_offset, cma.values + band.upper_offset

def flag_out_of_band(series: TimeSeries, cma: TimeSeries, band: PercentileBand) -> List[Tuple[int, float]]:
    """Points strictly below or strictly above their band interval"""
    if not np.array_equal(series.timestamps, cma.timestamps):
        raise AlignmentError("Band is not defined at every series timestamp")
    low, high = safe_band(cma, band)
    mask = (series.values < low) | (series.values > high)
    return list(zip(series.timestamps[mask].tolist(), series.values[mask].tolist()))

@dataclass
class FluctuationAnalysis:
    period_start_ms: int
    period_end_ms: int
    mean: float
    series: TimeSeries
    cma: TimeSeries
    fluctuations: TimeSeries
    p7: float
    p93: float
    band_halfwidth: Optional[float]
    lower: np.ndarray
    upper: np.ndarray
    out_of_band: List[Tuple[int, float]] = field(default_factory=list)

    @property
    def relaxed(self) -> bool:
        return self.band_halfwidth is not None

    def summary(self) -> dict:
        """Display values: percentiles at 1 dp"""
        return {
            "period_start_ms": self.period_start_ms,
            "period_end_ms": self.period_end_ms,
            "points": len(self.series),
            "mean": str(round_half_up(self.mean, 1)),
            "p7": str(round_half_up(self.p7, 1)),
            "p93": str(round_half_up(self.p93, 1)),
            "band": f"+/-{round_half_up(self.band_halfwidth, 1)}" if self.relaxed
                    else f"[{round_half_up(self.p7, 1)}, {round_half_up(self.p93, 1)}]",
            "out_of_band": len(self.out_of_band),
        }

def analyze_fluctuations(
    series: TimeSeries,
    period_start_ms: int,
    period_end_ms: int,
    bucket_s: int = None,
    window_days: int = None,
    resample: bool = True,
) -> FluctuationAnalysis:
    """
    Run the full fluctuation chain over [period_start, period_end).

    The source series must also cover half a window before and after the period.
    """
    bucket_s = bucket_s or config.analysis.resample_bucket_s
    prepared = median_resample(series, bucket_s) if resample else series
    if prepared.empty:
        raise EmptySeries("No readings to analyze")

    cma = centered_moving_average(prepared, window_days, period=(period_start_ms, period_end_ms))
    observed = prepared.window(period_start_ms, period_end_ms)
    fluct = fluctuations(observed, cma)
    band = percentile_band(fluct)
    lower, upper = safe_band(cma, band)
    flagged = flag_out_of_band(observed, cma, band)

    analysis = FluctuationAnalysis(
        period_start_ms=period_start_ms,
        period_end_ms=period_end_ms,
        mean=arithmetic_mean(observed),
        series=observed,
        cma=cma,
        fluctuations=fluct,
        p7=band.p_lower,
        p93=band.p_upper,
        band_halfwidth=band.band_halfwidth,
        lower=lower,
        upper=upper,
        out_of_band=flagged,
    )
    logger.info(
        f"Fluctuation analysis over {len(observed)} points: p7={analysis.p7:.2f}, "
        f"p93={analysis.p93:.2f}, relaxed={analysis.relaxed}, flagged={len(flagged)}"
    )
    return analysis
