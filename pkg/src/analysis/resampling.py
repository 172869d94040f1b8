"""
Median and uniform resampling of time series.
"""

import numpy as np
import pandas as pd

from src.config import config
from src.analysis.series import TimeSeries

def median_resample(series: TimeSeries, bucket_s: int = None) -> TimeSeries:
    """
    Median of the readings in each epoch-aligned bucket, stamped at the bucket start.

    Empty buckets are omitted. Even-sized buckets take the mean of the two middle values.
    """
    bucket_ms = (bucket_s or config.analysis.resample_bucket_s) * 1000
    if series.empty:
        return series
    frame = pd.DataFrame({
        "bucket": series.timestamps - series.timestamps % bucket_ms,
        "value": series.values,
    })
    medians = frame.groupby("bucket", sort=True)["value"].median()
    return TimeSeries(medians.index.to_numpy(dtype=np.int64), medians.to_numpy(dtype=np.float64), series.unit)

def _nearest_indices(timestamps: np.ndarray, targets: np.ndarray) -> np.ndarray:
    right = np.searchsorted(timestamps, targets, side="left")
    right = np.clip(right, 0, len(timestamps) - 1)
    left = np.clip(right - 1, 0, len(timestamps) - 1)
    # Ties go to the earlier point
    take_left = (targets - timestamps[left]) <= (timestamps[right] - targets)
    return np.where(take_left, left, right)

def uniform_resample(series: TimeSeries, target: int = None) -> TimeSeries:
    """
    Reduce a series to `target` points spread uniformly in time.

    The covered span of n points is divided into `target` equal slots starting at
    the first timestamp; each slot takes the nearest source point. A regular
    series is therefore sampled every n/target-th point.

    Args:
        series: Source series
        target: Number of output points (display default when None)

    Returns:
        The series itself when it has at most `target` points, else exactly `target` points
    """
    target = target or config.analysis.display_points
    n = len(series)
    if n <= target:
        return series
    if target == 1:
        return TimeSeries(series.timestamps[:1], series.values[:1], series.unit)

    first = int(series.timestamps[0])
    span = int(series.timestamps[-1]) - first
    # Integer slot arithmetic keeps regular grids exact
    slots = np.array([first + (i * span * n) // ((n - 1) * target) for i in range(target)], dtype=np.int64)
    indices = _nearest_indices(series.timestamps, slots)

    chosen = []
    previous = -1
    for i, index in enumerate(indices.tolist()):
        lower = previous + 1
        upper = n - target + i
        index = min(max(index, lower), upper)
        chosen.append(index)
        previous = index

    chosen = np.array(chosen, dtype=np.int64)
    return TimeSeries(series.timestamps[chosen], series.values[chosen], series.unit)
