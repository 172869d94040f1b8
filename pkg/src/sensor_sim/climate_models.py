"""
Climate models that turn a scenario into noiseless parameter values over time.
"""

import bisect
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional, Type

import numpy as np

from src.utils import get_logger
from src.utils.errors import MissingTraceData, ConfigError
from src.sensor_sim.encodings import decode_raw, code_to_aq_voltage, lpo_from_dust
from src.sensor_sim.scenario import ClimateScenario, ScenarioKind, PARAMETERS

logger = get_logger("climate_models")

@dataclass(frozen=True)
class ClimateState:
    temperature: float
    humidity: float
    co2: float
    dust_lpo: float
    air_quality_voltage: float
    # Replayed traces carry their own vibration counts
    vibration_count: Optional[int] = None

class BaseClimateModel(ABC):
    """Base interface for all climate models"""

    kind: ScenarioKind

    def __init__(self, scenario: ClimateScenario, sampling_period_ms: int = 15000):
        self.scenario = scenario
        self.sampling_period_ms = sampling_period_ms
        self.noise_stddev = np.asarray(scenario.noise_vector(), dtype=float)

    @abstractmethod
    def state_at(self, utc_ms: int) -> ClimateState:
        """
        Noiseless parameter values at a virtual-clock instant

        Args:
            utc_ms: Milliseconds since 1970-01-01 UTC

        Returns:
            ClimateState before noise and clamping
        """
        pass

class ClimateModelRegistry:
    """Registry mapping scenario kinds to model classes"""

    _models: Dict[ScenarioKind, Type[BaseClimateModel]] = {}

    @classmethod
    def register(cls, model_class):
        if not issubclass(model_class, BaseClimateModel):
            raise ValueError(f"Model {model_class.__name__} must inherit from BaseClimateModel")
        cls._models[model_class.kind] = model_class
        return model_class

    @classmethod
    def create(cls, scenario: ClimateScenario, sampling_period_ms: int = 15000) -> BaseClimateModel:
        if scenario.kind not in cls._models:
            raise ConfigError(f"No climate model registered for kind '{scenario.kind.value}'")
        return cls._models[scenario.kind](scenario, sampling_period_ms)

    @classmethod
    def kinds(cls) -> List[str]:
        return sorted(kind.value for kind in cls._models)

@ClimateModelRegistry.register
class ConstantModel(BaseClimateModel):
    kind = ScenarioKind.CONSTANT

    def __init__(self, scenario: ClimateScenario, sampling_period_ms: int = 15000):
        super().__init__(scenario, sampling_period_ms)
        self._state = ClimateState(*(scenario.baseline_of(name) for name in PARAMETERS))

    def state_at(self, utc_ms: int) -> ClimateState:
        return self._state

@ClimateModelRegistry.register
class SinusoidModel(BaseClimateModel):
    kind = ScenarioKind.SINUSOID

    def __init__(self, scenario: ClimateScenario, sampling_period_ms: int = 15000):
        super().__init__(scenario, sampling_period_ms)
        self._terms = [
            (
                scenario.baseline_of(name),
                scenario.amplitude.get(name, 0.0),
                scenario.period_of(name),
                scenario.phase_s.get(name, 0.0),
            )
            for name in PARAMETERS
        ]

    def state_at(self, utc_ms: int) -> ClimateState:
        t_s = utc_ms / 1000
        values = [
            baseline + amplitude * math.sin(2 * math.pi * (t_s + phase) / period) if amplitude else baseline
            for baseline, amplitude, period, phase in self._terms
        ]
        return ClimateState(*values)

@ClimateModelRegistry.register
class TraceReplayModel(BaseClimateModel):
    """
    Replays a sensing.csv trace. A row covers [timestamp, timestamp + sampling period).
    """

    kind = ScenarioKind.TRACE_REPLAY

    def __init__(self, scenario: ClimateScenario, sampling_period_ms: int = 15000):
        super().__init__(scenario, sampling_period_ms)
        # Imported here to avoid a cycle: csv_interop depends on the store, not on sensor_sim
        from src.csv_interop.bundle import read_sensing_rows

        rows = read_sensing_rows(scenario.trace_file)
        if scenario.trace_device_id is not None:
            rows = [row for row in rows if row.device_id == scenario.trace_device_id]
        rows.sort(key=lambda row: row.utc_timestamp_ms)
        self._timestamps = [row.utc_timestamp_ms for row in rows]
        self._rows = rows
        logger.info(f"Trace replay loaded {len(rows)} rows from {scenario.trace_file}")

    def state_at(self, utc_ms: int) -> ClimateState:
        index = bisect.bisect_right(self._timestamps, utc_ms) - 1
        if index < 0 or utc_ms >= self._timestamps[index] + self.sampling_period_ms:
            raise MissingTraceData(f"No trace row covers t={utc_ms} ms in {self.scenario.trace_file}")
        row = self._rows[index]
        return ClimateState(
            temperature=decode_raw(row.temperature_raw),
            humidity=decode_raw(row.humidity_raw),
            co2=float(row.co2_ppm),
            dust_lpo=lpo_from_dust(row.dust_pcs_per_l),
            air_quality_voltage=code_to_aq_voltage(row.air_quality_code),
            vibration_count=row.vibration_count,
        )
