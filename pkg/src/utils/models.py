from dataclasses import dataclass, asdict
from decimal import Decimal, ROUND_HALF_UP
from typing import Any, Dict, Optional
from pydantic import BaseModel, Field, validator

# Hot-path records are plain frozen dataclasses: a 56-day run creates millions of them

@dataclass(frozen=True)
class Reading:
    """One 15-second sample of the six environmental parameters, in raw encodings"""
    device_id: int
    collector_id: int
    utc_timestamp_ms: int
    humidity_raw: int       # RH% x 100
    temperature_raw: int    # degC x 100
    co2_ppm: int
    dust_pcs_per_l: int
    air_quality_code: int   # 0-1023
    vibration_count: int    # rising edges in the sampling window

    @property
    def humidity(self) -> float:
        return self.humidity_raw / 100

    @property
    def temperature(self) -> float:
        return self.temperature_raw / 100

    def to_payload(self) -> Dict[str, int]:
        return asdict(self)

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> "Reading":
        values = {}
        for name in cls.__dataclass_fields__:
            value = payload[name]
            # bool is an int subclass but never a valid field value
            if not isinstance(value, int) or isinstance(value, bool):
                raise TypeError(f"Field {name} must be an integer, got {value!r}")
            values[name] = value
        return cls(**values)

@dataclass(frozen=True)
class TelemetryMessage:
    """Device-to-cloud telemetry envelope"""
    sequence: int
    reading: Optional[Reading]
    sent_at_ms: int

    @property
    def device_id(self) -> Optional[int]:
        return self.reading.device_id if self.reading else None

@dataclass(frozen=True)
class SensingRecord:
    """One persisted row of the sensing table"""
    id: Optional[int]
    utc_timestamp_ms: int
    partition_key: int
    device_id: int
    collector_id: int
    humidity_raw: int
    temperature_raw: int
    co2_ppm: int
    dust_pcs_per_l: int
    air_quality_code: int
    vibration_count: int

    @property
    def sample_key(self):
        return (self.device_id, self.collector_id, self.utc_timestamp_ms)

    @property
    def humidity(self) -> float:
        return self.humidity_raw / 100

    @property
    def temperature(self) -> float:
        return self.temperature_raw / 100

    @classmethod
    def from_reading(cls, reading: Reading, partition_key: int, record_id: Optional[int] = None) -> "SensingRecord":
        return cls(
            id=record_id,
            utc_timestamp_ms=reading.utc_timestamp_ms,
            partition_key=partition_key,
            device_id=reading.device_id,
            collector_id=reading.collector_id,
            humidity_raw=reading.humidity_raw,
            temperature_raw=reading.temperature_raw,
            co2_ppm=reading.co2_ppm,
            dust_pcs_per_l=reading.dust_pcs_per_l,
            air_quality_code=reading.air_quality_code,
            vibration_count=reading.vibration_count,
        )

class Building(BaseModel):
    id: int
    name: str

class Device(BaseModel):
    id: int
    name: str
    building_id: int

class HourlyMetrics(BaseModel):
    hour_start_ms: int
    messages_received: int = 0
    functions_executed: int = 0

    @validator("functions_executed")
    def validate_executed(cls, value, values):
        received = values.get("messages_received", 0)
        if value > received:
            raise ValueError("functions_executed cannot exceed messages_received")
        return value

def round_half_up(value: float, places: int) -> Decimal:
    """Round for display; computation stays at full precision"""
    quantum = Decimal(1).scaleb(-places)
    return Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP)

class LossReport(BaseModel):
    expected: int
    actual: int
    lost: int
    loss_rate_percent: float
    label: Optional[str] = None

    @property
    def display_rate(self) -> str:
        return f"{round_half_up(self.loss_rate_percent, 2)}%"

class RestartEvent(BaseModel):
    device_id: int
    at_ms: int
    reason: str
    next_sequence: int = Field(..., description="Sequence number the gateway will use next")
