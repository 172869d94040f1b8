"""
Loss-rate accounting over a time interval.
"""

from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from src.utils import get_logger, LossReport
from src.utils.errors import MisalignedWindow, UndefinedRate, OvercountDetected, SchemaMismatch

logger = get_logger("loss_analysis")

MS_PER_DAY = 86_400_000

def expected_samples(duration_s: int, period_s: int) -> int:
    """
    Number of samples a collector polled every period_s produces in duration_s.

    Raises:
        MisalignedWindow: period is not positive or does not divide the duration
    """
    if period_s <= 0:
        raise MisalignedWindow(f"Sampling period must be positive, got {period_s}")
    if duration_s < 0:
        raise MisalignedWindow(f"Duration must not be negative, got {duration_s}")
    if duration_s % period_s:
        raise MisalignedWindow(f"Duration {duration_s} s is not a multiple of the {period_s} s period")
    return duration_s // period_s

def loss_rate(expected: int, actual: int, label: Optional[str] = None) -> LossReport:
    """
    Loss rate lr = (expected - actual) / expected * 100.

    Args:
        expected: Samples that should have been collected
        actual: Samples that were collected
        label: Optional row label for reports

    Returns:
        LossReport at full precision; use display_rate for 2 dp output
    """
    if expected <= 0:
        raise UndefinedRate(f"Loss rate is undefined for {expected} expected samples")
    if actual < 0:
        raise UndefinedRate(f"Actual sample count must not be negative, got {actual}")
    if actual > expected:
        logger.error(f"Overcount: {actual} samples collected but only {expected} expected")
        raise OvercountDetected(f"{actual} samples collected but only {expected} expected (duplicate delivery?)")
    lost = expected - actual
    return LossReport(
        expected=expected,
        actual=actual,
        lost=lost,
        loss_rate_percent=lost / expected * 100,
        label=label,
    )

def daily_loss_rates(timestamps: Sequence[int], start_ms: int, days: int, period_s: int) -> List[LossReport]:
    """
    Per-day loss reports for one device.

    Args:
        timestamps: Timestamps (ms) of the samples that were collected
        start_ms: Start of the first day
        days: Number of days
        period_s: Sampling period

    Returns:
        One LossReport per day, labelled with the ISO date
    """
    expected = expected_samples(86_400, period_s)
    stamps = np.asarray(timestamps, dtype=np.int64)
    offsets = (stamps - start_ms) // MS_PER_DAY
    counts = np.bincount(offsets[(offsets >= 0) & (offsets < days)], minlength=days)

    reports = []
    for day, actual in enumerate(counts.tolist()):
        day_start = np.datetime64(start_ms + day * MS_PER_DAY, "ms").astype("datetime64[D]")
        reports.append(loss_rate(expected, actual, label=str(day_start)))
    return reports

FIXTURE_COLUMNS = ["label", "expected", "actual"]

def read_count_fixture(path) -> List[dict]:
    """
    Read a per-device count fixture (label, expected, actual[, hub_received]).

    Raises:
        SchemaMismatch: missing columns, empty file or non-integer counts
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, ValueError) as e:
        raise SchemaMismatch(f"Cannot read count fixture {path}: {e}") from e
    missing = [c for c in FIXTURE_COLUMNS if c not in frame.columns]
    if missing or frame.empty:
        raise SchemaMismatch(f"Count fixture {path} must have columns {FIXTURE_COLUMNS} and at least one row")

    count_columns = [c for c in ("expected", "actual", "hub_received") if c in frame.columns]
    rows = []
    for line, record in enumerate(frame.to_dict("records"), start=2):
        row = {"label": record["label"]}
        for column in count_columns:
            value = record[column].strip()
            if not (value.isascii() and value.isdigit()):
                raise SchemaMismatch(f"{path}:{line}: {column} must be a non-negative integer, got {value!r}")
            row[column] = int(value)
        rows.append(row)
    return rows
