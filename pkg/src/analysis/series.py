from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.utils import SensingRecord
from src.utils.errors import MixedCollectors

@dataclass(frozen=True)
class TimeSeries:
    """
    Ordered (utc_ms, value) points of one quantity.

    Timestamps are int64 milliseconds and must be strictly increasing.
    """
    timestamps: np.ndarray
    values: np.ndarray
    unit: str = ""

    def __post_init__(self):
        timestamps = np.asarray(self.timestamps, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if timestamps.ndim != 1 or timestamps.shape != values.shape:
            raise ValueError("Timestamps and values must be one-dimensional and of equal length")
        if len(timestamps) > 1 and not np.all(np.diff(timestamps) > 0):
            raise ValueError("Timestamps must be strictly increasing")
        object.__setattr__(self, "timestamps", timestamps)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def empty(self) -> bool:
        return len(self.timestamps) == 0

    def points(self) -> List[Tuple[int, float]]:
        return list(zip(self.timestamps.tolist(), self.values.tolist()))

    def window(self, t0_ms: int, t1_ms: int) -> "TimeSeries":
        """Points with t0 <= t < t1"""
        lo = np.searchsorted(self.timestamps, t0_ms, side="left")
        hi = np.searchsorted(self.timestamps, t1_ms, side="left")
        return TimeSeries(self.timestamps[lo:hi], self.values[lo:hi], self.unit)

    def with_values(self, values: Sequence[float], unit: str = None) -> "TimeSeries":
        return TimeSeries(self.timestamps, np.asarray(values, dtype=np.float64), self.unit if unit is None else unit)

    @classmethod
    def from_points(cls, points: Iterable[Tuple[int, float]], unit: str = "") -> "TimeSeries":
        points = list(points)
        if not points:
            return cls(np.empty(0, dtype=np.int64), np.empty(0), unit)
        timestamps, values = zip(*points)
        return cls(np.array(timestamps, dtype=np.int64), np.array(values, dtype=np.float64), unit)

    @classmethod
    def from_records(
        cls,
        records: Iterable[SensingRecord],
        quantity: str = "humidity",
        collector_id: Optional[int] = None,
    ) -> "TimeSeries":
        """
        Build a series of one decoded quantity (humidity or temperature) from stored records.

        Args:
            records: Records of one device
            quantity: humidity or temperature
            collector_id: Keep only this collector's records

        Raises:
            MixedCollectors: records of several collectors and no collector_id given
        """
        units = {"humidity": "%RH", "temperature": "degC"}
        if quantity not in units:
            raise ValueError(f"Unsupported quantity {quantity}")
        records = list(records)
        if collector_id is not None:
            records = [r for r in records if r.collector_id == collector_id]
        else:
            collectors = sorted({r.collector_id for r in records})
            if len(collectors) > 1:
                raise MixedCollectors(f"Records come from collectors {collectors}; choose one collector")
        records = sorted(records, key=lambda r: r.utc_timestamp_ms)
        return cls(
            np.array([r.utc_timestamp_ms for r in records], dtype=np.int64),
            np.array([getattr(r, quantity) for r in records], dtype=np.float64),
            units[quantity],
        )
