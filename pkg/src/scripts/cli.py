#!/usr/bin/env python
"""
Command-line entry point: simulate runs, analyze stored humidity, replay loss
tables, move data in and out of the CSV bundle format, summarize hub metrics.

Exit status: 0 on success, 1 for invalid input, 2 for runtime failures.
"""

import os
import sys
import argparse
from datetime import datetime
from pathlib import Path
from typing import List, Optional

import pytz
from pydantic import ValidationError

# Add project root to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from src.config import config
from src.utils import get_logger
from src.utils.errors import HeritageSenseError, InputValidationError, ConfigError, InsufficientContext

logger = get_logger("cli")

MS_PER_DAY = 86_400_000

class CliArgumentParser(argparse.ArgumentParser):
    """Usage errors are validation errors: exit status 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")

def parse_time(value: str, tz: str) -> datetime:
    """ISO date or datetime; naive values are taken in the given time zone"""
    try:
        parsed = datetime.fromisoformat(value)
    except ValueError as e:
        raise ConfigError(f"Invalid date {value!r}: expected YYYY-MM-DD or an ISO datetime") from e
    if parsed.tzinfo is None:
        try:
            parsed = pytz.timezone(tz).localize(parsed)
        except pytz.UnknownTimeZoneError as e:
            raise ConfigError(f"Unknown time zone {tz!r}") from e
    return parsed.astimezone(pytz.utc)

def to_ms(moment: datetime) -> int:
    return int(moment.timestamp() * 1000)

def describe_duration(ms: int) -> str:
    days, rest = divmod(ms, MS_PER_DAY)
    hours, rest = divmod(rest, 3_600_000)
    minutes = rest // 60_000
    return f"{days} d {hours} h {minutes} min"

def build_parser() -> argparse.ArgumentParser:
    parser = CliArgumentParser(
        prog="heritage-sense",
        description="Simulate and analyze environmental monitoring pipelines for historic buildings",
    )
    commands = parser.add_subparsers(dest="command", metavar="command", parser_class=CliArgumentParser)
    commands.required = True

    simulate = commands.add_parser("simulate", help="Run an end-to-end pipeline simulation")
    simulate.add_argument("--config", type=str, help="Run config JSON file")
    simulate.add_argument("--scenario", type=str, help="Scenario JSON file (overrides the config)")
    simulate.add_argument("--duration-days", type=int, help="Simulated days")
    simulate.add_argument("--duration-s", type=int, help="Simulated seconds")
    simulate.add_argument("--start", type=str, help="Start of the run (ISO date/datetime, UTC)")
    simulate.add_argument("--seed", type=int, help="Run seed")
    simulate.add_argument("--output-dir", type=str, help="Directory for run artifacts")
    simulate.add_argument("--tier", choices=["shared", "sla"], help="Consumer reliability tier")
    simulate.add_argument("--edge-drop", type=float, help="Edge channel drop probability")
    simulate.add_argument("--consume-drop", type=float, help="Consumer drop probability")
    simulate.add_argument("--strict", action="store_true", default=None, help="Check conservation after every event")

    analyze = commands.add_parser("analyze", help="Short-term RH fluctuation analysis of a stored device")
    source = analyze.add_mutually_exclusive_group(required=True)
    source.add_argument("--store", type=str, help="Telemetry store directory")
    source.add_argument("--bundle", type=str, help="CSV bundle directory")
    analyze.add_argument("--device", type=int, required=True, help="Device id")
    analyze.add_argument("--collector", type=int, help="Collector id, required when the device has several")
    analyze.add_argument("--start", type=str, required=True, help="Period start (inclusive)")
    analyze.add_argument("--end", type=str, required=True, help="Period end (exclusive)")
    analyze.add_argument("--tz", type=str, default=config.analysis.timezone, help="Time zone of --start/--end")
    analyze.add_argument("--output-dir", type=str, default="analysis", help="Directory for the report")
    analyze.add_argument("--display-points", type=int, help="Uniformly resample chart rows to this many points")
    analyze.add_argument("--plot", action="store_true", help="Also write PNG charts")

    replay = commands.add_parser("replay-table1", help="Loss-rate table from per-device counts")
    replay.add_argument("fixture", type=str, help="CSV with label,expected,actual columns")
    replay.add_argument("--output-dir", type=str, help="Also write the table as CSV here")

    export = commands.add_parser("export", help="Export a store to the three-file CSV bundle")
    export.add_argument("--store", type=str, required=True, help="Telemetry store directory")
    export.add_argument("--output-dir", type=str, required=True, help="Bundle directory")

    import_ = commands.add_parser("import", help="Import a CSV bundle into a new store")
    import_.add_argument("--bundle", type=str, required=True, help="Bundle directory")
    import_.add_argument("--store", type=str, required=True, help="Store directory to create")

    metrics = commands.add_parser("metrics", help="Aggregate hourly hub metrics into windows")
    metrics.add_argument("metrics_file", type=str, help="hourly_metrics.csv of a run")
    metrics.add_argument("--split", type=str, action="append", default=[], help="Window boundary (repeatable)")
    metrics.add_argument("--tz", type=str, default=config.analysis.timezone, help="Time zone of --split values")
    metrics.add_argument("--output-dir", type=str, help="Also write the summary as CSV here")
    return parser

def cmd_simulate(args) -> int:
    from src.pipeline import load_run_config, simulate
    from src.analysis import format_ledger

    duration_s = args.duration_s
    if args.duration_days is not None:
        duration_s = args.duration_days * 86_400
    overrides = {
        "scenario": args.scenario,
        "duration_s": duration_s,
        "start": args.start,
        "seed": args.seed,
        "output_dir": args.output_dir,
        "tier": args.tier,
        "edge_drop_probability": args.edge_drop,
        "consume_drop_probability": args.consume_drop,
        "strict": args.strict,
    }
    run_config = load_run_config(args.config, overrides)
    runner = simulate(run_config)
    print(format_ledger(runner.snapshot_ledger()))
    print(f"\nArtifacts written to {run_config.output_dir}")
    return 0

def cmd_analyze(args) -> int:
    from src.telemetry_store import TelemetryStore
    from src.csv_interop import import_bundle
    from src.analysis import TimeSeries, analyze_fluctuations, write_fluctuation_report
    from src.analysis.report import format_fluctuation_summary

    start_ms = to_ms(parse_time(args.start, args.tz))
    end_ms = to_ms(parse_time(args.end, args.tz))
    if end_ms <= start_ms:
        raise ConfigError("--end must be after --start")

    store = TelemetryStore.open(args.store) if args.store else import_bundle(args.bundle)
    margin_ms = config.analysis.cma_window_days * MS_PER_DAY // 2
    records = store.query_range(args.device, max(0, start_ms - margin_ms), end_ms + margin_ms)
    series = TimeSeries.from_records(records, "humidity", collector_id=args.collector)

    try:
        analysis = analyze_fluctuations(series, start_ms, end_ms)
    except InsufficientContext as e:
        print(
            f"Insufficient context for the moving average: missing {describe_duration(e.missing_before_ms)} "
            f"before and {describe_duration(e.missing_after_ms)} after the period",
            file=sys.stderr,
        )
        raise

    write_fluctuation_report(analysis, args.output_dir, tz=args.tz, display_points=args.display_points, plot=args.plot)
    print(format_fluctuation_summary(analysis, args.tz))
    print(f"\nReport written to {args.output_dir}")
    return 0

def cmd_replay_table1(args) -> int:
    import pandas as pd
    from src.analysis import read_count_fixture, format_loss_table
    from src.cloud_hub import LossLedger
    from src.utils import round_half_up

    rows = read_count_fixture(args.fixture)
    hub_received = {r["label"]: r["hub_received"] for r in rows if "hub_received" in r}
    ledger = LossLedger.from_counts(rows, hub_received or None)
    reports = ledger.loss_reports()
    print(format_loss_table(reports))

    if args.output_dir:
        os.makedirs(args.output_dir, exist_ok=True)
        frame = pd.DataFrame([
            {
                "label": r.label,
                "expected": r.expected,
                "actual": r.actual,
                "loss_rate_percent": str(round_half_up(r.loss_rate_percent, 2)),
            }
            for r in reports
        ])
        frame.to_csv(Path(args.output_dir) / "table1.csv", index=False, lineterminator="\n")
    return 0

def cmd_export(args) -> int:
    from src.telemetry_store import TelemetryStore
    from src.csv_interop import export_store

    store = TelemetryStore.open(args.store)
    paths = export_store(store, args.output_dir)
    print(f"Exported {store.count()} sensing rows to {', '.join(str(p) for p in paths)}")
    return 0

def cmd_import(args) -> int:
    from src.telemetry_store import TelemetryStore
    from src.csv_interop import import_bundle

    store = import_bundle(args.bundle, TelemetryStore(args.store))
    store.flush()
    print(f"Imported {store.count()} sensing rows into {args.store}")
    return 0

def cmd_metrics(args) -> int:
    from src.cloud_hub import read_metrics_csv, summarize_metrics

    splits = [parse_time(value, args.tz) for value in args.split]
    summary = summarize_metrics(read_metrics_csv(args.metrics_file), splits)
    print(summary.to_string(index=False))
    if args.output_dir:
        os.makedirs(args.output_dir, exist_ok=True)
        summary.to_csv(Path(args.output_dir) / "metrics_summary.csv", index=False, lineterminator="\n")
    return 0

COMMANDS = {
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "replay-table1": cmd_replay_table1,
    "export": cmd_export,
    "import": cmd_import,
    "metrics": cmd_metrics,
}

def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (InputValidationError, ValidationError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
    except HeritageSenseError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2

if __name__ == "__main__":
    sys.exit(main())
