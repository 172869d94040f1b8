from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.utils import get_logger, Reading
from src.sensor_sim.encodings import (
    SENSOR_SUITE,
    clamp,
    encode_raw,
    aq_voltage_to_code,
    dust_from_lpo,
    round_half_up_int,
)
from src.sensor_sim.scenario import ClimateScenario
from src.sensor_sim.climate_models import BaseClimateModel, ClimateState, ClimateModelRegistry

logger = get_logger("sensor_sim")

# Last scenario passed to sample() and the model built from it
_cached_model: Optional[Tuple[ClimateScenario, BaseClimateModel]] = None

def _model_for(scenario: Union[ClimateScenario, BaseClimateModel]) -> BaseClimateModel:
    global _cached_model
    if isinstance(scenario, BaseClimateModel):
        return scenario
    if _cached_model is None or _cached_model[0] is not scenario:
        _cached_model = (scenario, ClimateModelRegistry.create(scenario))
    return _cached_model[1]

def build_reading(
    state: ClimateState,
    noise: Sequence[float],
    vibration: int,
    t: int,
    device_id: int,
    collector_id: int,
) -> Reading:
    """Apply noise to a climate state, clamp into the sensor ranges and encode"""
    temperature = clamp(state.temperature + noise[0], SENSOR_SUITE.temp_range)
    humidity = clamp(state.humidity + noise[1], SENSOR_SUITE.rh_range)
    co2 = clamp(state.co2 + noise[2], SENSOR_SUITE.co2_range)
    lpo = clamp(state.dust_lpo + noise[3], SENSOR_SUITE.lpo_range)
    volts = clamp(state.air_quality_voltage + noise[4], SENSOR_SUITE.aq_voltage_range)

    return Reading(
        device_id=device_id,
        collector_id=collector_id,
        utc_timestamp_ms=t,
        humidity_raw=encode_raw(humidity),
        temperature_raw=encode_raw(temperature),
        co2_ppm=round_half_up_int(co2),
        dust_pcs_per_l=dust_from_lpo(lpo),
        air_quality_code=aq_voltage_to_code(volts),
        vibration_count=state.vibration_count if state.vibration_count is not None else vibration,
    )

def sample(
    scenario: Union[ClimateScenario, BaseClimateModel],
    t: int,
    rng: np.random.Generator,
    device_id: int = 1,
    collector_id: int = 1,
) -> Reading:
    """
    Produce one reading at virtual time t.

    Noise is drawn as a single gaussian vector (temperature, humidity, co2,
    dust LPO, AQ voltage) followed by one Poisson draw for vibration, so a
    reference walk over the same generator reproduces every value.

    The model built from a scenario is reused while the same scenario object
    is passed again. Loops over several scenarios should build the models
    once and pass them instead.

    Args:
        scenario: Scenario, or a climate model already built from one
        t: Sample time in ms since the epoch, on the sampling grid
        rng: Generator seeded from the scenario seed

    Returns:
        Reading with every field clamped into its measurement range
    """
    model = _model_for(scenario)
    state = model.state_at(t)
    noise = rng.normal(0.0, model.noise_stddev)
    vibration = 0
    if state.vibration_count is None:
        vibration = int(rng.poisson(model.scenario.vibration_rate))
    return build_reading(state, noise, vibration, t, device_id, collector_id)

class NoiseStream:
    """
    Gaussian noise vectors and Poisson vibration counts, drawn block_size samples at a time
    """

    def __init__(self, rng: np.random.Generator, stddev: np.ndarray, vibration_rate: float, block_size: int = 4096):
        self.rng = rng
        self.stddev = stddev
        self.vibration_rate = vibration_rate
        self.block_size = block_size
        self._noise: List[List[float]] = []
        self._vibration: List[int] = []
        self._index = 0

    def next(self) -> Tuple[List[float], int]:
        if self._index >= len(self._noise):
            self._noise = self.rng.normal(0.0, self.stddev, size=(self.block_size, len(self.stddev))).tolist()
            self._vibration = self.rng.poisson(self.vibration_rate, self.block_size).tolist()
            self._index = 0
        index = self._index
        self._index += 1
        return self._noise[index], self._vibration[index]

class SensorSimulator:
    """
    The collector of one sensor box: owns its climate model and RNG stream
    """

    def __init__(self, device_id: int, collector_id: int, scenario: ClimateScenario, sampling_period_ms: int = 15000):
        self.device_id = device_id
        self.collector_id = collector_id
        self.scenario = scenario
        self.sampling_period_ms = sampling_period_ms
        self.model = ClimateModelRegistry.create(scenario, sampling_period_ms)
        # One independent stream per device, reproducible from the scenario seed
        self.rng = np.random.default_rng([scenario.seed, device_id])
        self.noise = NoiseStream(self.rng, self.model.noise_stddev, scenario.vibration_rate)
        logger.debug(f"Sensor simulator ready for device {device_id} ({scenario.kind.value}, seed {scenario.seed})")

    def read(self, t: int) -> Reading:
        noise, vibration = self.noise.next()
        return build_reading(self.model.state_at(t), noise, vibration, t, self.device_id, self.collector_id)

    def stream(self, start_ms: int, count: int) -> Iterator[Reading]:
        """Yield count readings on the sampling grid starting at start_ms"""
        for index in range(count):
            yield self.read(start_ms + index * self.sampling_period_ms)
