from .encodings import (
    SENSOR_SUITE,
    SensorSuite,
    encode_raw,
    decode_raw,
    aq_voltage_to_code,
    dust_from_lpo,
)
from .scenario import ClimateScenario, ScenarioKind, load_scenario
from .climate_models import ClimateModelRegistry, BaseClimateModel, ClimateState
from .service import sample, SensorSimulator

__all__ = [
    "SENSOR_SUITE",
    "SensorSuite",
    "encode_raw",
    "decode_raw",
    "aq_voltage_to_code",
    "dust_from_lpo",
    "ClimateScenario",
    "ScenarioKind",
    "load_scenario",
    "ClimateModelRegistry",
    "BaseClimateModel",
    "ClimateState",
    "sample",
    "SensorSimulator",
]
