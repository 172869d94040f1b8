"""
Hourly hub metrics: messages received and consumer function executions.
"""

from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import pandas as pd

from src.utils import get_logger, HourlyMetrics
from src.utils.errors import SchemaMismatch

logger = get_logger("hub_metrics")

MS_PER_HOUR = 3_600_000
METRICS_COLUMNS = ["hour_start_iso8601", "messages_received", "functions_executed"]

def hour_start(utc_ms: int) -> int:
    return utc_ms - utc_ms % MS_PER_HOUR

def format_hour(utc_ms: int) -> str:
    return pd.Timestamp(utc_ms, unit="ms", tz="UTC").strftime("%Y-%m-%dT%H:%M:%SZ")

class HourlyMetricsRecorder:
    """Exact per-hour counters; sums always equal the ledger totals"""

    def __init__(self):
        self._buckets: Dict[int, List[int]] = {}

    def record_received(self, utc_ms: int) -> None:
        self._bucket(utc_ms)[0] += 1

    def record_executed(self, utc_ms: int) -> None:
        self._bucket(utc_ms)[1] += 1

    def _bucket(self, utc_ms: int) -> List[int]:
        key = hour_start(utc_ms)
        bucket = self._buckets.get(key)
        if bucket is None:
            bucket = self._buckets[key] = [0, 0]
        return bucket

    def hours(self) -> List[HourlyMetrics]:
        return [
            HourlyMetrics(hour_start_ms=key, messages_received=received, functions_executed=executed)
            for key, (received, executed) in sorted(self._buckets.items())
        ]

    def totals(self) -> Dict[str, int]:
        return {
            "messages_received": sum(b[0] for b in self._buckets.values()),
            "functions_executed": sum(b[1] for b in self._buckets.values()),
        }

    def to_frame(self, start_ms: Optional[int] = None, end_ms: Optional[int] = None) -> pd.DataFrame:
        """
        One row per hour. Hours without traffic inside [start, end) are filled with zeros.
        """
        keys = sorted(self._buckets)
        first = hour_start(start_ms) if start_ms is not None else (keys[0] if keys else None)
        last = hour_start(end_ms - 1) if end_ms is not None else (keys[-1] if keys else None)
        if first is None or last is None or last < first:
            return pd.DataFrame(columns=METRICS_COLUMNS)

        hours = range(first, last + MS_PER_HOUR, MS_PER_HOUR)
        rows = [(self._buckets.get(h, [0, 0])) for h in hours]
        frame = pd.DataFrame({
            "hour_start_iso8601": [format_hour(h) for h in hours],
            "messages_received": [r[0] for r in rows],
            "functions_executed": [r[1] for r in rows],
        })
        return frame[METRICS_COLUMNS]

    def write_csv(self, path: Union[str, Path], start_ms: Optional[int] = None, end_ms: Optional[int] = None) -> Path:
        path = Path(path)
        self.to_frame(start_ms, end_ms).to_csv(path, index=False, lineterminator="\n")
        logger.info(f"Hourly metrics written to {path}")
        return path

def read_metrics_csv(path: Union[str, Path]) -> pd.DataFrame:
    frame = pd.read_csv(path)
    if list(frame.columns) != METRICS_COLUMNS:
        raise SchemaMismatch(f"Metrics file {path} has columns {list(frame.columns)}, expected {METRICS_COLUMNS}")
    frame["hour_start"] = pd.to_datetime(frame["hour_start_iso8601"], utc=True)
    return frame

def summarize_metrics(frame: pd.DataFrame, split_points: Sequence[datetime] = ()) -> pd.DataFrame:
    """
    Aggregate hourly metrics into consecutive windows cut at split_points.

    Args:
        frame: Output of read_metrics_csv
        split_points: Timezone-aware instants where a new window starts

    Returns:
        DataFrame with window_start, window_end, messages_received, functions_executed
    """
    if frame.empty:
        return pd.DataFrame(columns=["window_start", "window_end", "messages_received", "functions_executed"])

    first = frame["hour_start"].min()
    end = frame["hour_start"].max() + pd.Timedelta(hours=1)
    cuts = [pd.Timestamp(p).tz_convert("UTC") for p in sorted(split_points)]
    edges = [first] + [c for c in cuts if first < c < end] + [end]

    rows = []
    for window_start, window_end in zip(edges[:-1], edges[1:]):
        mask = (frame["hour_start"] >= window_start) & (frame["hour_start"] < window_end)
        rows.append({
            "window_start": window_start.strftime("%Y-%m-%dT%H:%M:%SZ"),
            "window_end": window_end.strftime("%Y-%m-%dT%H:%M:%SZ"),
            "messages_received": int(frame.loc[mask, "messages_received"].sum()),
            "functions_executed": int(frame.loc[mask, "functions_executed"].sum()),
        })
    return pd.DataFrame(rows)
