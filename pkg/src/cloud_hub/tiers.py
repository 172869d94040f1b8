from enum import Enum
from typing import Optional

from pydantic import BaseModel, validator

from src.config import config

SLA_MAX_DROP_PROBABILITY = 0.0005

class TierName(str, Enum):
    SHARED = "shared"
    SLA = "sla"

class ReliabilityTier(BaseModel):
    """Service plan hosting the consumer function"""
    name: TierName
    consume_drop_probability: float

    @validator("consume_drop_probability")
    def validate_probability(cls, value, values):
        if value < 0 or value > 1:
            raise ValueError("Drop probability must be between 0 and 1")
        if values.get("name") == TierName.SLA and value > SLA_MAX_DROP_PROBABILITY:
            raise ValueError(f"SLA tier drop probability must not exceed {SLA_MAX_DROP_PROBABILITY}")
        return value

    @classmethod
    def shared(cls, probability: Optional[float] = None) -> "ReliabilityTier":
        if probability is None:
            probability = config.hub.shared_tier_drop_probability
        return cls(name=TierName.SHARED, consume_drop_probability=probability)

    @classmethod
    def sla(cls, probability: Optional[float] = None) -> "ReliabilityTier":
        if probability is None:
            probability = config.hub.sla_tier_drop_probability
        return cls(name=TierName.SLA, consume_drop_probability=probability)

    @classmethod
    def named(cls, name: str, probability: Optional[float] = None) -> "ReliabilityTier":
        return cls.sla(probability) if TierName(name) == TierName.SLA else cls.shared(probability)
