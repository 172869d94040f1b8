from .logger import get_logger, add_run_log, remove_run_log
from .models import (
    Reading,
    TelemetryMessage,
    SensingRecord,
    Building,
    Device,
    HourlyMetrics,
    LossReport,
    RestartEvent,
    round_half_up,
)
from . import errors

__all__ = [
    "get_logger",
    "add_run_log",
    "remove_run_log",
    "Reading",
    "TelemetryMessage",
    "SensingRecord",
    "Building",
    "Device",
    "HourlyMetrics",
    "LossReport",
    "RestartEvent",
    "round_half_up",
    "errors",
]
