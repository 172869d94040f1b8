"""
Climate scenario definitions, read from JSON scenario files.
"""

from enum import Enum
from pathlib import Path
from typing import Dict, Optional, Union

from pydantic import BaseModel, Field, ValidationError, validator, root_validator

from src.utils import get_logger
from src.utils.errors import ConfigError

logger = get_logger("scenario")

# Order matters: noise is drawn as one vector in this order
PARAMETERS = ("temperature", "humidity", "co2", "dust_lpo", "air_quality_voltage")

DEFAULT_BASELINE = {
    "temperature": 21.0,
    "humidity": 25.7,
    "co2": 450.0,
    "dust_lpo": 0.05,
    "air_quality_voltage": 1.2,
}

# Half the stated sensor accuracy where one is given
DEFAULT_NOISE_STDDEV = {
    "temperature": 0.25,
    "humidity": 1.0,
    "co2": 100.0,
    "dust_lpo": 0.005,
    "air_quality_voltage": 0.02,
}

class ScenarioKind(str, Enum):
    CONSTANT = "constant"
    SINUSOID = "sinusoid"
    TRACE_REPLAY = "trace-replay"

def _check_parameter_names(values: Dict[str, float], field_name: str) -> Dict[str, float]:
    unknown = set(values) - set(PARAMETERS)
    if unknown:
        raise ValueError(f"Unknown parameters in {field_name}: {', '.join(sorted(unknown))}")
    return values

class ClimateScenario(BaseModel):
    kind: ScenarioKind = ScenarioKind.CONSTANT
    baseline: Dict[str, float] = Field(default_factory=dict)
    amplitude: Dict[str, float] = Field(default_factory=dict)
    period_s: Union[float, Dict[str, float]] = 86400.0
    phase_s: Dict[str, float] = Field(default_factory=dict)
    noise_stddev: Dict[str, float] = Field(default_factory=dict)
    vibration_rate: float = 0.5
    seed: int = 0
    trace_file: Optional[Path] = None
    trace_device_id: Optional[int] = None

    class Config:
        allow_mutation = False

    @validator("baseline", "amplitude", "phase_s", "noise_stddev")
    def validate_parameter_names(cls, value, field):
        return _check_parameter_names(value, field.name)

    @validator("noise_stddev")
    def validate_noise(cls, value):
        for name, stddev in value.items():
            if stddev < 0:
                raise ValueError(f"Noise stddev for {name} must be non-negative")
        return value

    @validator("period_s")
    def validate_period(cls, value):
        periods = value if isinstance(value, dict) else {name: value for name in PARAMETERS}
        _check_parameter_names(periods, "period_s")
        if any(period <= 0 for period in periods.values()):
            raise ValueError("Sinusoid periods must be positive")
        return value

    @validator("vibration_rate")
    def validate_vibration_rate(cls, value):
        if value < 0:
            raise ValueError("Vibration rate must be non-negative")
        return value

    @root_validator(skip_on_failure=True)
    def validate_trace(cls, values):
        if values.get("kind") == ScenarioKind.TRACE_REPLAY and not values.get("trace_file"):
            raise ValueError("trace-replay scenarios need a trace_file")
        return values

    def baseline_of(self, name: str) -> float:
        return self.baseline.get(name, DEFAULT_BASELINE[name])

    def period_of(self, name: str) -> float:
        if isinstance(self.period_s, dict):
            return self.period_s.get(name, 86400.0)
        return self.period_s

    def noise_vector(self):
        return [self.noise_stddev.get(name, DEFAULT_NOISE_STDDEV[name]) for name in PARAMETERS]

def load_scenario(path: Union[str, Path]) -> ClimateScenario:
    """
    Load a scenario file. Relative trace paths resolve against the scenario's directory.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Scenario file not found: {path}")
    try:
        scenario = ClimateScenario.parse_file(path)
    except ValidationError as e:
        logger.error(f"Invalid scenario file {path}: {e}")
        raise ConfigError(f"Invalid scenario file {path}: {e}") from e

    if scenario.trace_file and not scenario.trace_file.is_absolute():
        scenario = scenario.copy(update={"trace_file": path.parent / scenario.trace_file})
    if scenario.trace_file and not scenario.trace_file.exists():
        raise ConfigError(f"Trace file not found: {scenario.trace_file}")

    logger.info(f"Loaded {scenario.kind.value} scenario from {path} (seed {scenario.seed})")
    return scenario
