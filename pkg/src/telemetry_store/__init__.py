from .store import TelemetryStore, partition_key, MS_PER_DAY, SENSING_COLUMNS

__all__ = ["TelemetryStore", "partition_key", "MS_PER_DAY", "SENSING_COLUMNS"]
