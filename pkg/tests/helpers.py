"""
Shared builders for the test suite.
"""

import json
import os
import sys
from pathlib import Path

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.utils import Building, Device, SensingRecord
from src.sensor_sim import ClimateScenario
from src.telemetry_store import TelemetryStore, partition_key

DAY_MS = 86_400_000
APRIL_5_2021_MS = 1_617_580_800_000

QUIET = {
    "temperature": 0.0,
    "humidity": 0.0,
    "co2": 0.0,
    "dust_lpo": 0.0,
    "air_quality_voltage": 0.0,
}

def quiet_scenario(**overrides) -> ClimateScenario:
    """Constant scenario without noise or vibration"""
    data = {"kind": "constant", "noise_stddev": dict(QUIET), "vibration_rate": 0.0, "seed": 1}
    data.update(overrides)
    return ClimateScenario(**data)

def make_record(device_id: int, t_ms: int, humidity_raw: int = 2570, collector_id: int = 1, record_id=None) -> SensingRecord:
    return SensingRecord(
        id=record_id,
        utc_timestamp_ms=t_ms,
        partition_key=partition_key(t_ms),
        device_id=device_id,
        collector_id=collector_id,
        humidity_raw=humidity_raw,
        temperature_raw=2100,
        co2_ppm=450,
        dust_pcs_per_l=1400,
        air_quality_code=245,
        vibration_count=0,
    )

def make_store(device_ids=(1,), root=None) -> TelemetryStore:
    store = TelemetryStore(root)
    store.add_building(Building(id=1, name="The City Museum"))
    for device_id in device_ids:
        store.add_device(Device(id=device_id, name=f"Box {device_id}", building_id=1))
    return store

def write_scenario(directory: Path, name: str = "scenario.json", **overrides) -> Path:
    data = {"kind": "constant", "noise_stddev": dict(QUIET), "vibration_rate": 0.0, "seed": 1}
    data.update(overrides)
    path = Path(directory) / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return path

def run_config_dict(scenario_path: Path, output_dir: Path, devices: int = 3, duration_s: int = 86_400, **topology) -> dict:
    """Plain run config with one building per device"""
    data = {
        "scenario": str(scenario_path),
        "topology": {
            "buildings": [{"id": i, "name": f"Building {i}"} for i in range(1, devices + 1)],
            "devices": [{"id": i, "name": f"Box {i}", "building_id": i} for i in range(1, devices + 1)],
        },
        "start": "2021-04-05T00:00:00+00:00",
        "duration_s": duration_s,
        "seed": 1,
        "output_dir": str(output_dir),
    }
    data["topology"].update(topology)
    return data

def binomial_bounds(n: int, p: float, sigmas: float = 3.0):
    mean = n * p
    spread = sigmas * (n * p * (1 - p)) ** 0.5
    return mean - spread, mean + spread
