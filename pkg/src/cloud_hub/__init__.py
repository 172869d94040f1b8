from .tiers import ReliabilityTier, TierName, SLA_MAX_DROP_PROBABILITY
from .metrics import HourlyMetricsRecorder, read_metrics_csv, summarize_metrics, METRICS_COLUMNS
from .ledger import DeviceLedger, LossLedger
from .hub import CloudHub, HubEvent

__all__ = [
    "ReliabilityTier",
    "TierName",
    "SLA_MAX_DROP_PROBABILITY",
    "HourlyMetricsRecorder",
    "read_metrics_csv",
    "summarize_metrics",
    "METRICS_COLUMNS",
    "DeviceLedger",
    "LossLedger",
    "CloudHub",
    "HubEvent",
]
