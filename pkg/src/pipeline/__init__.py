from .run_config import (
    RunConfig,
    Topology,
    DeviceSpec,
    BuildingSpec,
    StallSpec,
    load_run_config,
    FIELD_STUDY_EDGE_DROP_PROBABILITY,
    FIELD_STUDY_SHARED_DROP_PROBABILITY,
)
from .runner import PipelineRunner, simulate, snapshot_ledger

__all__ = [
    "RunConfig",
    "Topology",
    "DeviceSpec",
    "BuildingSpec",
    "StallSpec",
    "load_run_config",
    "FIELD_STUDY_EDGE_DROP_PROBABILITY",
    "FIELD_STUDY_SHARED_DROP_PROBABILITY",
    "PipelineRunner",
    "simulate",
    "snapshot_ledger",
]
