"""
Measurement ranges and raw integer encodings of the sensor box.

Every integer encoding rounds half away from zero on the exact decimal value
of its input, so 21.374999 encodes to 2137 and 2.5 V maps to code 512.
"""

import math
from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_UP
from typing import Tuple

from src.utils.errors import OutOfRangeVoltage, OutOfRangeLpo

@dataclass(frozen=True)
class SensorSuite:
    """Declared measurement ranges, inclusive on both ends"""
    temp_range: Tuple[float, float] = (-40.0, 80.0)
    rh_range: Tuple[float, float] = (5.0, 99.0)
    co2_range: Tuple[int, int] = (0, 2000)
    dust_range: Tuple[int, int] = (0, 28000)
    aq_code_range: Tuple[int, int] = (0, 1023)
    aq_voltage_range: Tuple[float, float] = (0.0, 5.0)
    lpo_range: Tuple[float, float] = (0.0, 1.0)

SENSOR_SUITE = SensorSuite()

RAW_SCALE = 100
AQ_FULL_SCALE_VOLTS = 5
AQ_MAX_CODE = 1023
DUST_FULL_SCALE = 28000

# Float products closer than this to a .5 tie are settled on the decimal value
TIE_MARGIN = 1e-6

def _half_up(value: Decimal) -> int:
    return int(value.quantize(Decimal(1), rounding=ROUND_HALF_UP))

def _exact(value: float) -> Decimal:
    # repr gives the shortest decimal that round-trips, i.e. the value as written
    return Decimal(repr(float(value)))

def scaled_half_up(value: float, numerator: int = 1, denominator: int = 1) -> int:
    """
    round-half-away-from-zero(value x numerator / denominator) on the exact decimal value.

    Float arithmetic decides every case that is not within TIE_MARGIN of a tie.
    """
    scaled = value * numerator / denominator
    magnitude = abs(scaled)
    whole = math.floor(magnitude)
    fraction = magnitude - whole
    if abs(fraction - 0.5) < TIE_MARGIN:
        return _half_up(_exact(value) * numerator / denominator)
    rounded = int(whole) + (1 if fraction > 0.5 else 0)
    return rounded if scaled >= 0 else -rounded

def clamp(value: float, bounds: Tuple[float, float]) -> float:
    low, high = bounds
    return min(max(value, low), high)

def round_half_up_int(value: float) -> int:
    return scaled_half_up(value)

def encode_raw(value: float) -> int:
    """
    Encode a percentage or a temperature as its x100 raw integer.

    Args:
        value: Finite RH% or degC value

    Returns:
        round-half-up(value x 100)
    """
    if not math.isfinite(value):
        raise ValueError(f"Cannot encode non-finite value {value}")
    return scaled_half_up(value, RAW_SCALE)

def decode_raw(raw: int) -> float:
    return raw / RAW_SCALE

def aq_voltage_to_code(volts: float) -> int:
    """Map the air quality sensor output (0-5 V) onto the 10-bit code range"""
    low, high = SENSOR_SUITE.aq_voltage_range
    if not math.isfinite(volts) or volts < low or volts > high:
        raise OutOfRangeVoltage(f"Air quality voltage {volts} V outside [{low}, {high}] V")
    return scaled_half_up(volts, AQ_MAX_CODE, AQ_FULL_SCALE_VOLTS)

def dust_from_lpo(lpo_ratio: float) -> int:
    """
    Convert a low pulse occupancy ratio into a dust concentration in pcs/L.

    The map is linear over the full detecting range: 1.0 -> 28,000 pcs/L.
    """
    low, high = SENSOR_SUITE.lpo_range
    if not math.isfinite(lpo_ratio) or lpo_ratio < low or lpo_ratio > high:
        raise OutOfRangeLpo(f"LPO ratio {lpo_ratio} outside [{low}, {high}]")
    return scaled_half_up(lpo_ratio, DUST_FULL_SCALE)

def code_to_aq_voltage(code: int) -> float:
    return code * AQ_FULL_SCALE_VOLTS / AQ_MAX_CODE

def lpo_from_dust(dust_pcs_per_l: int) -> float:
    return dust_pcs_per_l / DUST_FULL_SCALE
