"""
Report writers: loss tables, fluctuation summaries, chart-ready CSV and plots.
"""

import os
from pathlib import Path
from typing import TYPE_CHECKING, List, Optional, Union

import numpy as np
import pandas as pd
import pytz

from src.utils import get_logger, LossReport, round_half_up
from src.analysis.fluctuation import FluctuationAnalysis
from src.analysis.resampling import uniform_resample

if TYPE_CHECKING:
    from src.cloud_hub.ledger import LossLedger

logger = get_logger("analysis_report")

CHART_COLUMNS = ["timestamp", "value", "ma", "lower", "upper", "flagged"]

def _share(value: Optional[float]) -> str:
    return "n/a (zero loss)" if value is None else f"{round_half_up(value * 100, 1)}%"

def format_loss_table(reports: List[LossReport]) -> str:
    """Plain-text loss table, one row per report, rates at 2 dp"""
    width = max([len("Sensor box")] + [len(r.label or "") for r in reports])
    lines = [f"{'Sensor box':<{width}}  {'Expected':>10}  {'Actual':>10}  {'Loss rate':>9}"]
    for report in reports:
        lines.append(
            f"{(report.label or ''):<{width}}  {report.expected:>10}  {report.actual:>10}  {report.display_rate:>9}"
        )
    return "\n".join(lines)

def format_ledger(ledger: "LossLedger") -> str:
    total = ledger.total
    lines = [
        "Loss by sensor box",
        format_loss_table(ledger.loss_reports()),
        "",
        "Loss by hop",
        f"  missed polls (gateway stalls): {total.missed}",
        f"  edge -> hub:  {total.edge_loss} ({_share(ledger.edge_share)})",
        f"  hub consumer: {total.consumer_loss} ({_share(ledger.consumer_share)})",
        f"  total lost:   {total.total_lost}",
        f"  rejected payloads: {total.rejected}",
        "",
        "Reconciliation",
        f"  end-to-end loss rate: {total.loss_report().display_rate}",
        f"  edge-only floor:      {round_half_up(ledger.edge_floor_percent, 2)}%",
        "  (a more reliable consumer tier cannot bring the loss below the edge-only floor)",
    ]
    return "\n".join(lines)

def write_loss_report(ledger: "LossLedger", output_dir: Union[str, Path]) -> List[Path]:
    """
    Write loss_report.txt and loss_report.csv for a run.

    Returns:
        Paths of the written files
    """
    output_dir = Path(output_dir)
    os.makedirs(output_dir, exist_ok=True)
    text_path = output_dir / "loss_report.txt"
    text_path.write_text(format_ledger(ledger) + "\n", encoding="utf-8")

    rows = []
    for entry in ledger.devices + [ledger.total]:
        row = entry.summary()
        row["label"] = entry.label or f"device {entry.device_id}"
        row["loss_rate_percent"] = str(round_half_up(entry.loss_report().loss_rate_percent, 2))
        rows.append(row)
    columns = [
        "label", "device_id", "expected", "generated", "sent", "hub_received", "consumed", "stored",
        "rejected", "missed", "edge_loss", "consumer_loss", "total_lost", "loss_rate_percent",
    ]
    csv_path = output_dir / "loss_report.csv"
    pd.DataFrame(rows)[columns].to_csv(csv_path, index=False, lineterminator="\n")
    logger.info(f"Loss report written to {output_dir}")
    return [text_path, csv_path]

def chart_frame(analysis: FluctuationAnalysis, display_points: Optional[int] = None, tz: Optional[str] = None) -> pd.DataFrame:
    """
    Chart rows (timestamp, value, ma, lower, upper, flagged).

    With display_points the rows are uniformly resampled for display; flagged
    points are always kept.
    """
    timestamps = analysis.series.timestamps
    flagged_stamps = np.array([t for t, _ in analysis.out_of_band], dtype=np.int64)
    flagged = np.isin(timestamps, flagged_stamps)

    keep = np.ones(len(timestamps), dtype=bool)
    if display_points:
        shown = uniform_resample(analysis.series, display_points).timestamps
        keep = np.isin(timestamps, shown) | flagged

    stamps = pd.to_datetime(timestamps[keep], unit="ms", utc=True)
    if tz:
        stamps = stamps.tz_convert(pytz.timezone(tz))
    return pd.DataFrame({
        "timestamp": stamps.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "value": analysis.series.values[keep],
        "ma": analysis.cma.values[keep],
        "lower": analysis.lower[keep],
        "upper": analysis.upper[keep],
        "flagged": flagged[keep].astype(int),
    })[CHART_COLUMNS]

def format_fluctuation_summary(analysis: FluctuationAnalysis, tz: Optional[str] = None) -> str:
    summary = analysis.summary()
    zone = pytz.timezone(tz or "UTC")

    def when(ms: int) -> str:
        return pd.Timestamp(ms, unit="ms", tz="UTC").tz_convert(zone).strftime("%Y-%m-%d %H:%M %Z")

    lines = [
        f"Period: {when(analysis.period_start_ms)} - {when(analysis.period_end_ms)}",
        f"Readings analyzed: {summary['points']}",
        f"Mean relative humidity: {summary['mean']}%",
        f"7th percentile of fluctuations: {summary['p7']}",
        f"93rd percentile of fluctuations: {summary['p93']}",
        f"Safe band around the moving average: {summary['band']}"
        + (" (relaxed)" if analysis.relaxed else ""),
        f"Points outside the safe band: {summary['out_of_band']}",
    ]
    for t, value in analysis.out_of_band:
        lines.append(f"  {when(t)}  {value:.2f}")
    return "\n".join(lines)

def plot_fluctuations(analysis: FluctuationAnalysis, output_dir: Union[str, Path]) -> List[Path]:
    """Safe-band chart and fluctuation histogram as PNG files"""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    output_dir = Path(output_dir)
    os.makedirs(output_dir, exist_ok=True)
    dates = pd.to_datetime(analysis.series.timestamps, unit="ms", utc=True)

    plt.figure(figsize=(12, 6))
    plt.plot(dates, analysis.series.values, label="Relative humidity", linewidth=0.6)
    plt.plot(dates, analysis.cma.values, label="30-day moving average")
    plt.fill_between(dates, analysis.lower, analysis.upper, alpha=0.2, label="Safe band")
    if analysis.out_of_band:
        flagged_dates = pd.to_datetime([t for t, _ in analysis.out_of_band], unit="ms", utc=True)
        plt.scatter(flagged_dates, [v for _, v in analysis.out_of_band], color="red", s=12, label="Out of band")
    plt.title("Relative humidity and safe band")
    plt.xlabel("Date")
    plt.ylabel("RH (%)")
    plt.grid(True)
    plt.legend()
    plt.tight_layout()
    band_path = output_dir / "safe_band.png"
    plt.savefig(band_path)
    plt.close()

    plt.figure(figsize=(10, 6))
    plt.hist(analysis.fluctuations.values, bins=100)
    plt.axvline(analysis.p7, color="orange", linestyle="--", label=f"p7 = {analysis.p7:.1f}")
    plt.axvline(analysis.p93, color="orange", linestyle="--", label=f"p93 = {analysis.p93:.1f}")
    plt.title("Distribution of short-term fluctuations")
    plt.xlabel("Fluctuation (% RH)")
    plt.ylabel("Readings")
    plt.grid(True)
    plt.legend()
    plt.tight_layout()
    hist_path = output_dir / "fluctuation_distribution.png"
    plt.savefig(hist_path)
    plt.close()

    logger.info(f"Fluctuation plots saved to {output_dir}")
    return [band_path, hist_path]

def write_fluctuation_report(
    analysis: FluctuationAnalysis,
    output_dir: Union[str, Path],
    tz: Optional[str] = None,
    display_points: Optional[int] = None,
    plot: bool = False,
) -> List[Path]:
    """
    Write fluctuation_report.txt and chart.csv (plus PNG charts when plot is set).
    """
    output_dir = Path(output_dir)
    os.makedirs(output_dir, exist_ok=True)
    report_path = output_dir / "fluctuation_report.txt"
    report_path.write_text(format_fluctuation_summary(analysis, tz) + "\n", encoding="utf-8")

    chart_path = output_dir / "chart.csv"
    chart_frame(analysis, display_points, tz).to_csv(chart_path, index=False, lineterminator="\n")

    paths = [report_path, chart_path]
    if plot:
        paths.extend(plot_fluctuations(analysis, output_dir))
    logger.info(f"Fluctuation report written to {output_dir}")
    return paths
