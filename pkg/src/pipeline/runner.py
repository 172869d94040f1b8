"""
End-to-end pipeline run on a simpy virtual clock.

Each gateway polls its collector on the sampling grid and pushes delivered
messages into the hub inbox; a watchdog per gateway restarts hung gateways;
a single hub process takes messages off the inbox in order, ingests them and
runs the consumer stage, which writes into the telemetry store.
"""

import json
import os
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
import simpy

from src.utils import get_logger, add_run_log, remove_run_log, Building, Device, round_half_up
from src.utils.errors import ConservationViolation
from src.sensor_sim import SensorSimulator, load_scenario, ClimateScenario
from src.edge_gateway import EdgeGateway, LossyChannel
from src.cloud_hub import CloudHub, LossLedger, ReliabilityTier
from src.telemetry_store import TelemetryStore
from src.analysis import write_loss_report, daily_loss_rates
from src.pipeline.run_config import RunConfig

logger = get_logger("pipeline")

class PipelineRunner:
    """
    Builds the topology of a RunConfig and runs it to the end of its horizon
    """

    def __init__(self, run_config: RunConfig, store_root: Optional[Path] = None):
        self.run_config = run_config
        self.store = TelemetryStore(store_root)
        self.tier = ReliabilityTier.named(
            run_config.topology.tier.value, run_config.topology.consume_drop_probability
        )
        self.hub = CloudHub(self.store, self.tier, rng=np.random.default_rng([run_config.seed, 2]))
        self.env = simpy.Environment(initial_time=run_config.start_ms)
        self.inbox = simpy.Store(self.env)
        self.gateways: Dict[int, EdgeGateway] = {}
        self.channels: Dict[int, LossyChannel] = {}
        self._scenarios: Dict[Path, ClimateScenario] = {}
        self._build_topology()

    def _scenario(self, path: Path) -> ClimateScenario:
        if path not in self._scenarios:
            self._scenarios[path] = load_scenario(path)
        return self._scenarios[path]

    def _build_topology(self):
        cfg = self.run_config
        for site in cfg.topology.buildings:
            self.store.add_building(Building(id=site.id, name=site.name))

        for box in cfg.topology.devices:
            device = self.store.add_device(Device(id=box.id, name=box.name, building_id=box.building_id))
            simulator = SensorSimulator(
                box.id, box.collector_id, self._scenario(cfg.scenario_for(box)), cfg.sampling_period_ms
            )
            probability = box.edge_drop_probability
            if probability is None:
                probability = cfg.topology.edge_drop_probability
            channel = LossyChannel(
                probability,
                name=f"edge-{box.id}",
                rng=np.random.default_rng([cfg.seed, box.id, 1]),
            )
            self.channels[box.id] = channel
            self.gateways[box.id] = EdgeGateway(
                device,
                simulator,
                channel,
                deliver=self.inbox.put,
                stall_window_ms=cfg.stall_window_s * 1000,
                registered_at_ms=cfg.start_ms,
            )

        for stall in cfg.topology.stalls:
            self.gateways[stall.device_id].inject_stall(cfg.start_ms + stall.offset_s * 1000, stall.duration_s * 1000)

    # -- simpy processes ----------------------------------------------------

    def _gateway_process(self, gateway: EdgeGateway):
        period = self.run_config.sampling_period_ms
        end = self.run_config.end_ms
        while self.env.now < end:
            gateway.tick(self.env.now)
            if self.run_config.strict:
                self.check_conservation()
            yield self.env.timeout(period)

    def _watchdog_process(self, gateway: EdgeGateway):
        interval = self.run_config.watchdog_interval_s * 1000
        while True:
            yield self.env.timeout(interval)
            gateway.watchdog_tick(self.env.now)

    def _hub_process(self):
        while True:
            message = yield self.inbox.get()
            self.hub.ingest(message, self.env.now)
            self.hub.drain()
            if self.run_config.strict:
                self.check_conservation()

    def run(self) -> "PipelineRunner":
        """
        Run the pipeline over [start, start + duration).

        Returns:
            self, with counters, store and hub populated
        """
        cfg = self.run_config
        logger.info(
            f"Starting run: {len(self.gateways)} devices, {cfg.duration_s} s at {cfg.sampling_period_s} s, "
            f"edge p={cfg.topology.edge_drop_probability}, tier {self.tier.name.value} "
            f"p={self.tier.consume_drop_probability}, seed {cfg.seed}"
        )
        self.env.process(self._hub_process())
        for gateway in self.gateways.values():
            self.env.process(self._gateway_process(gateway))
            self.env.process(self._watchdog_process(gateway))
        self.env.run(until=cfg.end_ms)

        self.check_conservation(final=True)
        ledger = self.snapshot_ledger()
        logger.info(
            f"Run finished: {ledger.total.stored} of {ledger.total.expected} samples stored, "
            f"loss {ledger.total.loss_report().display_rate}"
        )
        return self

    # -- accounting ---------------------------------------------------------

    def expected_per_device(self) -> int:
        return self.run_config.duration_s // self.run_config.sampling_period_s

    def check_conservation(self, final: bool = False) -> None:
        """
        Check every hop's counters. Messages still queued in the hub inbox count
        as in flight; at the end of a run the inbox must be empty.

        Raises:
            ConservationViolation: any hop gained or lost messages outside its counters
        """
        total_consumed = 0
        for device_id, gateway in self.gateways.items():
            channel = self.channels[device_id]
            counters = self.hub.device_counters(device_id)
            in_flight = sum(1 for m in self.inbox.items if m.device_id == device_id)
            arrived = counters.hub_received + in_flight
            checks = [
                channel.is_conserved(),
                channel.sent == gateway.generated,
                arrived == channel.delivered if final else arrived <= channel.delivered,
                counters.consumed + counters.consumer_dropped <= counters.hub_received,
                counters.stored == counters.consumed,
            ]
            if final:
                checks.append(counters.consumed + counters.consumer_dropped == counters.hub_received)
            if not all(checks):
                logger.error(f"Conservation violated for device {device_id} at {self.env.now}")
                raise ConservationViolation(f"Conservation violated for device {device_id} at t={self.env.now}")
            total_consumed += counters.consumed
        if total_consumed != self.store.count():
            raise ConservationViolation(f"Store holds {self.store.count()} records but {total_consumed} were consumed")

    def snapshot_ledger(self) -> LossLedger:
        expected = self.expected_per_device()
        devices = []
        for device_id, gateway in sorted(self.gateways.items()):
            entry = self.hub.device_ledger(
                device_id, expected=expected, generated=gateway.generated, sent=self.channels[device_id].sent
            )
            devices.append(entry.copy(update={"label": gateway.device.name}))
        ledger = LossLedger.from_devices(devices)
        ledger.total.rejected = self.hub.rejected
        return ledger

    # -- artifacts ----------------------------------------------------------

    def daily_loss_frame(self) -> pd.DataFrame:
        """Per-device loss rate of every full day in the run"""
        cfg = self.run_config
        full_days = cfg.duration_s // 86_400
        rows = []
        for device_id in sorted(self.gateways):
            records = self.store.query_range(device_id, cfg.start_ms, cfg.end_ms)
            timestamps = [r.utc_timestamp_ms for r in records]
            for report in daily_loss_rates(timestamps, cfg.start_ms, full_days, cfg.sampling_period_s):
                rows.append({
                    "device_id": device_id,
                    "date": report.label,
                    "expected": report.expected,
                    "actual": report.actual,
                    "loss_rate_percent": str(round_half_up(report.loss_rate_percent, 2)),
                })
        return pd.DataFrame(rows, columns=["device_id", "date", "expected", "actual", "loss_rate_percent"])

    def ledger_document(self) -> dict:
        ledger = self.snapshot_ledger()
        document = ledger.to_json_dict()
        document["seed"] = self.run_config.seed
        document["tier"] = self.tier.dict()
        document["channels"] = [self.channels[d].stats() for d in sorted(self.channels)]
        document["restarts"] = [
            event.dict() for d in sorted(self.gateways) for event in self.gateways[d].restart_events
        ]
        document["missed_polls"] = {str(d): self.gateways[d].missed_polls for d in sorted(self.gateways)}
        return document

    def write_artifacts(self, output_dir: Optional[Path] = None) -> List[Path]:
        """
        Write the run outputs under output_dir:
        ledger.json, loss_report.txt/.csv, hourly_metrics.csv, daily_loss.csv and store/
        """
        output_dir = Path(output_dir or self.run_config.output_dir)
        os.makedirs(output_dir, exist_ok=True)

        ledger_path = output_dir / "ledger.json"
        ledger_path.write_text(json.dumps(self.ledger_document(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        paths = [ledger_path]
        paths.extend(write_loss_report(self.snapshot_ledger(), output_dir))
        paths.append(self.hub.metrics.write_csv(output_dir / "hourly_metrics.csv", self.run_config.start_ms, self.run_config.end_ms))

        daily_path = output_dir / "daily_loss.csv"
        self.daily_loss_frame().to_csv(daily_path, index=False, lineterminator="\n")
        paths.append(daily_path)

        if self.store.root is not None:
            self.store.flush()
            paths.append(self.store.root)
        logger.info(f"Run artifacts written to {output_dir}")
        return paths

def snapshot_ledger(run: PipelineRunner) -> LossLedger:
    """Ledger of a completed run; every conservation law holds"""
    run.check_conservation(final=True)
    return run.snapshot_ledger()

def simulate(run_config: RunConfig, write: bool = True) -> PipelineRunner:
    """
    Run one simulation and write its artifacts under the configured output directory.
    """
    output_dir = Path(run_config.output_dir)
    handler = add_run_log(output_dir) if write else None
    try:
        runner = PipelineRunner(run_config, store_root=output_dir / "store" if write else None)
        runner.run()
        if write:
            runner.write_artifacts(output_dir)
        return runner
    finally:
        if handler is not None:
            remove_run_log(handler)
