import os
from pydantic import BaseModel, Field, validator
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

class SimulationConfig(BaseModel):
    sampling_period_ms: int = Field(default_factory=lambda: int(os.getenv("SAMPLING_PERIOD_MS", "15000")))
    watchdog_interval_s: int = Field(default_factory=lambda: int(os.getenv("WATCHDOG_INTERVAL_S", "60")))
    stall_window_s: int = Field(default_factory=lambda: int(os.getenv("STALL_WINDOW_S", "300")))
    default_seed: int = Field(default_factory=lambda: int(os.getenv("DEFAULT_SEED", "1")))

    @validator("sampling_period_ms", "watchdog_interval_s", "stall_window_s")
    def validate_positive(cls, value):
        if value <= 0:
            raise ValueError("Periods and windows must be positive")
        return value

class HubConfig(BaseModel):
    # Shared plans carry no SLA; 99.95% SLA plans bound the drop probability
    shared_tier_drop_probability: float = Field(default_factory=lambda: float(os.getenv("SHARED_TIER_DROP_PROBABILITY", "0.0168")))
    sla_tier_drop_probability: float = Field(default_factory=lambda: float(os.getenv("SLA_TIER_DROP_PROBABILITY", "0.0005")))

    @validator("shared_tier_drop_probability", "sla_tier_drop_probability")
    def validate_probability(cls, value):
        if value < 0 or value > 1:
            raise ValueError("Drop probability must be between 0 and 1")
        return value

    @validator("sla_tier_drop_probability")
    def validate_sla_bound(cls, value):
        if value > 0.0005:
            raise ValueError("SLA tier drop probability must not exceed 0.0005")
        return value

class AnalysisConfig(BaseModel):
    resample_bucket_s: int = Field(default_factory=lambda: int(os.getenv("RESAMPLE_BUCKET_S", "300")))
    cma_window_days: int = Field(default_factory=lambda: int(os.getenv("CMA_WINDOW_DAYS", "30")))
    lower_percentile: int = Field(default_factory=lambda: int(os.getenv("LOWER_PERCENTILE", "7")))
    upper_percentile: int = Field(default_factory=lambda: int(os.getenv("UPPER_PERCENTILE", "93")))
    relaxation_limit: float = Field(default_factory=lambda: float(os.getenv("RELAXATION_LIMIT", "10.0")))
    display_points: int = Field(default_factory=lambda: int(os.getenv("DISPLAY_POINTS", "720")))
    timezone: str = Field(default_factory=lambda: os.getenv("ANALYSIS_TZ", "UTC"))

    @validator("lower_percentile", "upper_percentile")
    def validate_percentile(cls, value):
        if value <= 0 or value >= 100:
            raise ValueError("Percentiles must be between 0 and 100 (exclusive)")
        return value

    @validator("cma_window_days")
    def validate_even_window(cls, value):
        # The window is centred, so it splits into two equal halves
        if value <= 0 or value % 2:
            raise ValueError("CMA window must be a positive, even number of days")
        return value

class AppConfig(BaseModel):
    simulation: SimulationConfig = SimulationConfig()
    hub: HubConfig = HubConfig()
    analysis: AnalysisConfig = AnalysisConfig()

config = AppConfig()
