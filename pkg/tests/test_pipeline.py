import json
import os
import sys
import tempfile
import time
import unittest
from pathlib import Path

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.pipeline import (
    RunConfig,
    PipelineRunner,
    load_run_config,
    simulate,
    snapshot_ledger,
    FIELD_STUDY_EDGE_DROP_PROBABILITY,
    FIELD_STUDY_SHARED_DROP_PROBABILITY,
)
from src.utils.errors import ConfigError
from tests.helpers import write_scenario, run_config_dict, binomial_bounds, APRIL_5_2021_MS

REPO_ROOT = Path(__file__).resolve().parent.parent

class PipelineTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.scenario = write_scenario(self.dir)

    def tearDown(self):
        self.tmp.cleanup()

    def make_config(self, output: str = "run", **kwargs) -> RunConfig:
        topology = {k: kwargs.pop(k) for k in list(kwargs) if k in ("edge_drop_probability", "tier", "consume_drop_probability", "stalls")}
        data = run_config_dict(self.scenario, self.dir / output, **kwargs, **topology)
        return RunConfig.parse_obj(data)

class TestConservation(PipelineTestCase):

    def test_every_hop_is_conserved_for_many_seeds(self):
        for seed in range(100):
            cfg = self.make_config(
                duration_s=3600,
                edge_drop_probability=0.2,
                consume_drop_probability=0.3,
            ).copy(update={"seed": seed, "strict": True})
            runner = PipelineRunner(cfg).run()
            ledger = snapshot_ledger(runner)

            total = ledger.total
            self.assertEqual(total.expected, 3 * 240)
            self.assertEqual(total.generated, total.expected)
            self.assertEqual(total.stored, runner.store.count())
            self.assertEqual(total.sent - total.edge_loss - total.consumer_loss, total.stored)
            self.assertEqual(len(runner.inbox.items), 0)

    def test_zero_loss_run(self):
        cfg = self.make_config(duration_s=86_400, edge_drop_probability=0.0, tier="sla", consume_drop_probability=0.0)
        runner = simulate(cfg)
        ledger = runner.snapshot_ledger()

        self.assertTrue(ledger.zero_loss)
        self.assertIsNone(ledger.edge_share)
        self.assertEqual(ledger.total.stored, 3 * 5760)
        self.assertEqual(ledger.total.loss_report().display_rate, "0.00%")
        report = (cfg.output_dir / "loss_report.txt").read_text(encoding="utf-8")
        self.assertIn("n/a (zero loss)", report)

class TestRunOutputs(PipelineTestCase):

    @classmethod
    def setUpClass(cls):
        cls.class_tmp = tempfile.TemporaryDirectory()
        base = Path(cls.class_tmp.name)
        scenario = write_scenario(base, kind="sinusoid", amplitude={"humidity": 3.0})
        data = run_config_dict(
            scenario,
            base / "run",
            duration_s=2 * 86_400,
            edge_drop_probability=FIELD_STUDY_EDGE_DROP_PROBABILITY,
            consume_drop_probability=FIELD_STUDY_SHARED_DROP_PROBABILITY,
        )
        cls.config = RunConfig.parse_obj(data)
        cls.runner = simulate(cls.config)
        cls.ledger = cls.runner.snapshot_ledger()

    @classmethod
    def tearDownClass(cls):
        cls.class_tmp.cleanup()

    def test_artifacts_are_written(self):
        for name in ("ledger.json", "loss_report.txt", "loss_report.csv", "hourly_metrics.csv", "daily_loss.csv", "run.log"):
            with self.subTest(name=name):
                self.assertTrue((self.config.output_dir / name).exists())
        self.assertTrue((self.config.output_dir / "store" / "catalog.json").exists())

    def test_hop_losses_match_binomial(self):
        total = self.ledger.total
        low, high = binomial_bounds(total.sent, FIELD_STUDY_EDGE_DROP_PROBABILITY, sigmas=4.0)
        self.assertTrue(low <= total.edge_loss <= high, f"edge loss {total.edge_loss}")
        low, high = binomial_bounds(total.hub_received, FIELD_STUDY_SHARED_DROP_PROBABILITY, sigmas=4.0)
        self.assertTrue(low <= total.consumer_loss <= high, f"consumer loss {total.consumer_loss}")

    def test_hourly_metrics_sum_to_ledger(self):
        totals = self.runner.hub.metrics.totals()
        self.assertEqual(totals["messages_received"], self.ledger.total.hub_received)
        self.assertEqual(totals["functions_executed"], self.ledger.total.consumed)
        lines = (self.config.output_dir / "hourly_metrics.csv").read_text(encoding="utf-8").splitlines()
        self.assertEqual(len(lines), 1 + 48)

    def test_store_holds_every_stored_sample(self):
        self.assertEqual(self.runner.store.count(), self.ledger.total.stored)
        for device in self.ledger.devices:
            records = self.runner.store.query_range(device.device_id, self.config.start_ms, self.config.end_ms)
            self.assertEqual(len(records), device.stored)

    def test_daily_loss_frame(self):
        frame = self.runner.daily_loss_frame()
        self.assertEqual(len(frame), 3 * 2)
        self.assertEqual(sorted(set(frame["date"])), ["2021-04-05", "2021-04-06"])
        self.assertEqual(int(frame["actual"].sum()), self.ledger.total.stored)

    def test_ledger_document(self):
        document = json.loads((self.config.output_dir / "ledger.json").read_text(encoding="utf-8"))
        self.assertEqual(document["seed"], 1)
        self.assertEqual(document["tier"]["name"], "shared")
        self.assertEqual(document["total"]["stored"], self.ledger.total.stored)
        self.assertEqual(len(document["channels"]), 3)

class TestDeterminism(PipelineTestCase):

    def test_same_seed_same_ledger(self):
        outputs = []
        for name in ("first", "second"):
            cfg = self.make_config(output=name, duration_s=6 * 3600, edge_drop_probability=0.05, consume_drop_probability=0.05)
            simulate(cfg)
            outputs.append(cfg.output_dir)

        for name in ("ledger.json", "hourly_metrics.csv", "loss_report.csv"):
            with self.subTest(name=name):
                self.assertEqual((outputs[0] / name).read_bytes(), (outputs[1] / name).read_bytes())

    def test_different_seeds_differ(self):
        ledgers = []
        for seed in (1, 2):
            cfg = self.make_config(duration_s=6 * 3600, edge_drop_probability=0.05, consume_drop_probability=0.05)
            ledgers.append(PipelineRunner(cfg.copy(update={"seed": seed})).run().snapshot_ledger().to_json_dict())
        self.assertNotEqual(ledgers[0], ledgers[1])

class TestStalls(PipelineTestCase):

    def test_stall_is_restarted_and_counted_as_missed(self):
        cfg = self.make_config(
            duration_s=3600,
            edge_drop_probability=0.0,
            consume_drop_probability=0.0,
            stalls=[{"device_id": 1, "offset_s": 600, "duration_s": 900}],
        )
        runner = PipelineRunner(cfg).run()
        gateway = runner.gateways[1]

        self.assertEqual([e.at_ms for e in gateway.restart_events], [APRIL_5_2021_MS + 900_000])
        self.assertEqual(gateway.missed_polls, 20)

        ledger = runner.snapshot_ledger()
        device = ledger.devices[0]
        self.assertEqual(device.missed, 20)
        self.assertEqual(device.generated, 220)
        self.assertEqual(device.stored, 220)
        # Missed polls are not hop losses
        self.assertTrue(ledger.zero_loss)

class TestRunConfig(PipelineTestCase):

    def write_config(self, data) -> Path:
        path = self.dir / "run.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    def test_relative_scenario_resolves_against_the_config(self):
        data = run_config_dict("scenario.json", self.dir / "out")
        cfg = load_run_config(self.write_config(data))
        self.assertEqual(cfg.scenario, self.dir / "scenario.json")

    def test_overrides_win(self):
        path = self.write_config(run_config_dict(self.scenario, self.dir / "out"))
        cfg = load_run_config(path, {"seed": 9, "tier": "sla", "duration_s": None, "edge_drop_probability": 0.0})
        self.assertEqual(cfg.seed, 9)
        self.assertEqual(cfg.topology.tier.value, "sla")
        self.assertEqual(cfg.topology.edge_drop_probability, 0.0)
        self.assertEqual(cfg.duration_s, 86_400)

    def test_naive_start_is_utc(self):
        data = run_config_dict(self.scenario, self.dir / "out")
        data["start"] = "2021-04-05T00:00:00"
        self.assertEqual(load_run_config(self.write_config(data)).start_ms, APRIL_5_2021_MS)

    def test_invalid_configs(self):
        cases = {
            "misaligned duration": {"duration_s": 100},
            "sla bound": {"topology": {"tier": "sla", "consume_drop_probability": 0.01}},
            "dangling device": {"topology": {"devices": [{"id": 1, "name": "Box", "building_id": 7}]}},
            "missing scenario": {"scenario": str(self.dir / "nope.json")},
        }
        for name, change in cases.items():
            data = run_config_dict(self.scenario, self.dir / "out")
            for key, value in change.items():
                if key == "topology":
                    data["topology"].update(value)
                else:
                    data[key] = value
            with self.subTest(name=name):
                with self.assertRaises(ConfigError):
                    load_run_config(self.write_config(data))

    def test_unreadable_config(self):
        with self.assertRaises(ConfigError):
            load_run_config(self.dir / "missing.json")
        path = self.dir / "broken.json"
        path.write_text("{", encoding="utf-8")
        with self.assertRaises(ConfigError):
            load_run_config(path)

    def test_bundled_configs_load(self):
        for name in ("field_study_shared_tier.json", "field_study_sla_tier.json"):
            with self.subTest(name=name):
                cfg = load_run_config(REPO_ROOT / "configs" / name)
                self.assertEqual(cfg.duration_s // cfg.sampling_period_s, 322_560)
                self.assertEqual(len(cfg.topology.devices), 3)

@unittest.skipUnless(os.getenv("RUN_LONG_SIMULATIONS") == "1", "long run")
class TestFieldStudyRuns(unittest.TestCase):
    """Full 56-day runs of the bundled field study configurations"""

    def run_bundled(self, name: str):
        with tempfile.TemporaryDirectory() as tmp:
            cfg = load_run_config(REPO_ROOT / "configs" / name, {"output_dir": tmp})
            started = time.perf_counter()
            ledger = simulate(cfg, write=False).snapshot_ledger()
            elapsed = time.perf_counter() - started
        self.assertLess(elapsed, 60.0, f"{name} took {elapsed:.1f} s")
        return ledger

    def test_shared_tier(self):
        ledger = self.run_bundled("field_study_shared_tier.json")
        rate = ledger.total.loss_report().loss_rate_percent
        self.assertLess(abs(rate - 2.00), 0.10)
        self.assertLess(abs(ledger.edge_share * 100 - 16), 3)
        self.assertLess(abs(ledger.consumer_share * 100 - 84), 3)

    def test_sla_tier(self):
        ledger = self.run_bundled("field_study_sla_tier.json")
        rate = ledger.total.loss_report().loss_rate_percent
        self.assertTrue(0.25 <= rate <= 0.45, f"loss rate {rate}")

if __name__ == '__main__':
    unittest.main()
