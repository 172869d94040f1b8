from .series import TimeSeries
from .loss import expected_samples, loss_rate, daily_loss_rates, read_count_fixture
from .resampling import median_resample, uniform_resample
from .fluctuation import (
    arithmetic_mean,
    centered_moving_average,
    fluctuations,
    nearest_rank,
    percentile_band,
    PercentileBand,
    safe_band,
    flag_out_of_band,
    FluctuationAnalysis,
    analyze_fluctuations,
)
from .report import (
    format_loss_table,
    format_ledger,
    write_loss_report,
    chart_frame,
    write_fluctuation_report,
    plot_fluctuations,
    CHART_COLUMNS,
)

__all__ = [
    "TimeSeries",
    "expected_samples",
    "loss_rate",
    "daily_loss_rates",
    "read_count_fixture",
    "median_resample",
    "uniform_resample",
    "arithmetic_mean",
    "centered_moving_average",
    "fluctuations",
    "nearest_rank",
    "percentile_band",
    "PercentileBand",
    "safe_band",
    "flag_out_of_band",
    "FluctuationAnalysis",
    "analyze_fluctuations",
    "format_loss_table",
    "format_ledger",
    "write_loss_report",
    "chart_frame",
    "write_fluctuation_report",
    "plot_fluctuations",
    "CHART_COLUMNS",
]
