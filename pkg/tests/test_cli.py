import io
import json
import os
import sys
import tempfile
import unittest
from contextlib import redirect_stdout, redirect_stderr
from pathlib import Path

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.scripts.cli import main, parse_time, describe_duration
from src.utils.errors import ConfigError
from src.csv_interop import export_store
from tests.helpers import write_scenario, run_config_dict, make_record, make_store, APRIL_5_2021_MS

REPO_ROOT = Path(__file__).resolve().parent.parent

def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()

class TestCliBasics(unittest.TestCase):

    def test_help_lists_commands(self):
        out = io.StringIO()
        with redirect_stdout(out):
            with self.assertRaises(SystemExit) as caught:
                main(["--help"])
        self.assertEqual(caught.exception.code, 0)
        for command in ("simulate", "analyze", "replay-table1", "export", "import", "metrics"):
            self.assertIn(command, out.getvalue())

    def test_usage_error_exits_with_one(self):
        with redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as caught:
                main(["simulate", "--seed", "not-a-number"])
        self.assertEqual(caught.exception.code, 1)

    def test_parse_time(self):
        self.assertEqual(parse_time("2021-04-05", "UTC").isoformat(), "2021-04-05T00:00:00+00:00")
        self.assertEqual(parse_time("2021-04-05T02:00:00", "Europe/Oslo").isoformat(), "2021-04-05T00:00:00+00:00")
        with self.assertRaises(ConfigError):
            parse_time("05/04/2021", "UTC")
        with self.assertRaises(ConfigError):
            parse_time("2021-04-05", "Mars/Olympus")

    def test_describe_duration(self):
        self.assertEqual(describe_duration(15 * 86_400_000 + 90 * 60_000), "15 d 1 h 30 min")

class TestReplayTable(unittest.TestCase):

    def test_bundled_counts(self):
        with tempfile.TemporaryDirectory() as tmp:
            code, out, _ = run_cli("replay-table1", REPO_ROOT / "fixtures" / "table1.csv", "--output-dir", tmp)
            self.assertEqual(code, 0)
            lines = out.splitlines()
            self.assertTrue(lines[0].startswith("Sensor box"))
            self.assertTrue(lines[1].endswith("1.96%"))
            self.assertTrue(lines[2].endswith("2.00%"))
            self.assertTrue(lines[3].endswith("2.04%"))
            self.assertTrue(lines[4].startswith("Total") and lines[4].endswith("2.00%"))

            table = (Path(tmp) / "table1.csv").read_text(encoding="utf-8").splitlines()
            self.assertEqual(table[0], "label,expected,actual,loss_rate_percent")
            self.assertEqual(table[1], "The City Museum,322560,316251,1.96")

    def test_malformed_fixture(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "bad.csv"
            path.write_text("label,expected,actual\nBox,ten,9\n", encoding="utf-8")
            code, _, err = run_cli("replay-table1", path)
        self.assertEqual(code, 1)
        self.assertIn("error", err)

    def test_overcount(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "over.csv"
            path.write_text("label,expected,actual\nBox,10,11\n", encoding="utf-8")
            code, _, _ = run_cli("replay-table1", path)
        self.assertEqual(code, 1)

class TestSimulateAndData(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.dir = Path(cls.tmp.name)
        scenario = write_scenario(cls.dir, kind="sinusoid", amplitude={"humidity": 2.0}, period_s=3600)
        config_path = cls.dir / "run.json"
        config_path.write_text(json.dumps(run_config_dict(scenario, cls.dir / "unused")), encoding="utf-8")
        cls.run_dir = cls.dir / "run"
        cls.result = run_cli(
            "simulate", "--config", config_path, "--duration-days", 1, "--seed", 4,
            "--output-dir", cls.run_dir, "--edge-drop", 0.01, "--consume-drop", 0.02,
        )

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_simulate(self):
        code, out, _ = self.result
        self.assertEqual(code, 0)
        self.assertIn("Loss by hop", out)
        ledger = json.loads((self.run_dir / "ledger.json").read_text(encoding="utf-8"))
        self.assertEqual(ledger["seed"], 4)
        self.assertEqual(ledger["total"]["expected"], 3 * 5760)

    def test_export_then_import(self):
        bundle = self.dir / "bundle"
        code, out, _ = run_cli("export", "--store", self.run_dir / "store", "--output-dir", bundle)
        self.assertEqual(code, 0)
        self.assertTrue((bundle / "sensing.csv").exists())

        store_dir = self.dir / "imported"
        code, _, _ = run_cli("import", "--bundle", bundle, "--store", store_dir)
        self.assertEqual(code, 0)

        again = self.dir / "bundle_again"
        run_cli("export", "--store", store_dir, "--output-dir", again)
        self.assertEqual((bundle / "sensing.csv").read_bytes(), (again / "sensing.csv").read_bytes())

    def test_metrics_summary(self):
        out_dir = self.dir / "metrics"
        code, _, _ = run_cli(
            "metrics", self.run_dir / "hourly_metrics.csv",
            "--split", "2021-04-05T12:00:00", "--output-dir", out_dir,
        )
        self.assertEqual(code, 0)
        summary = (out_dir / "metrics_summary.csv").read_text(encoding="utf-8").splitlines()
        self.assertEqual(summary[0], "window_start,window_end,messages_received,functions_executed")
        self.assertEqual(len(summary), 3)
        self.assertTrue(summary[2].startswith("2021-04-05T12:00:00Z,2021-04-06T00:00:00Z,"))

    def test_analyze_without_context(self):
        code, _, err = run_cli(
            "analyze", "--store", self.run_dir / "store", "--device", 1,
            "--start", "2021-04-05T06:00:00", "--end", "2021-04-05T18:00:00",
            "--output-dir", self.dir / "analysis",
        )
        self.assertEqual(code, 1)
        self.assertIn("Insufficient context", err)

    def test_analyze_unknown_device_is_a_runtime_failure(self):
        code, _, _ = run_cli(
            "analyze", "--store", self.run_dir / "store", "--device", 99,
            "--start", "2021-04-05", "--end", "2021-04-06",
        )
        self.assertEqual(code, 2)

    def test_analyze_rejects_inverted_period(self):
        code, _, _ = run_cli(
            "analyze", "--store", self.run_dir / "store", "--device", 1,
            "--start", "2021-04-06", "--end", "2021-04-05",
        )
        self.assertEqual(code, 1)

    def test_missing_store(self):
        code, _, _ = run_cli("export", "--store", self.dir / "nowhere", "--output-dir", self.dir / "x")
        self.assertEqual(code, 2)

class TestAnalyze(unittest.TestCase):

    def test_full_context_analysis(self):
        with tempfile.TemporaryDirectory() as tmp:
            tmp = Path(tmp)
            scenario = write_scenario(tmp, kind="sinusoid", amplitude={"humidity": 2.0}, period_s=86_400)
            data = run_config_dict(scenario, tmp / "run", devices=1, duration_s=32 * 86_400, edge_drop_probability=0.0, tier="sla", consume_drop_probability=0.0)
            data["sampling_period_s"] = 300
            config_path = tmp / "run.json"
            config_path.write_text(json.dumps(data), encoding="utf-8")
            code, _, _ = run_cli("simulate", "--config", config_path)
            self.assertEqual(code, 0)

            code, out, _ = run_cli(
                "analyze", "--store", tmp / "run" / "store", "--device", 1,
                "--start", "2021-04-20", "--end", "2021-04-22",
                "--output-dir", tmp / "analysis", "--display-points", 100,
            )
            self.assertEqual(code, 0)
            self.assertIn("Safe band around the moving average: +/-10.0 (relaxed)", out)
            self.assertTrue((tmp / "analysis" / "chart.csv").exists())
            self.assertTrue((tmp / "analysis" / "fluctuation_report.txt").exists())

class TestInputFailures(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_analyze_two_collectors(self):
        store = make_store()
        for collector_id in (1, 2):
            for i in range(32 * 288):
                store.insert(make_record(1, APRIL_5_2021_MS + i * 300_000, collector_id=collector_id))
        bundle = self.dir / "bundle"
        export_store(store, bundle)
        period = ("--start", "2021-04-20", "--end", "2021-04-22", "--output-dir", self.dir / "analysis")

        code, _, err = run_cli("analyze", "--bundle", bundle, "--device", 1, *period)
        self.assertEqual(code, 1)
        self.assertIn("choose one collector", err)

        code, out, _ = run_cli("analyze", "--bundle", bundle, "--device", 1, "--collector", 2, *period)
        self.assertEqual(code, 0)
        self.assertIn("+/-10.0 (relaxed)", out)

    def test_import_invalid_utf8(self):
        bundle = self.dir / "bundle"
        export_store(make_store(), bundle)
        (bundle / "devices.csv").write_bytes(b"Id,DeviceName,BuildingId\n1,Bo\xe9te,1\n")
        code, _, err = run_cli("import", "--bundle", bundle, "--store", self.dir / "store")
        self.assertEqual(code, 1)
        self.assertIn("error", err)

    def test_export_corrupt_catalog(self):
        store_dir = self.dir / "store"
        store_dir.mkdir()
        (store_dir / "catalog.json").write_text("{not json", encoding="utf-8")
        code, _, err = run_cli("export", "--store", store_dir, "--output-dir", self.dir / "out")
        self.assertEqual(code, 2)
        self.assertIn("Corrupt store catalog", err)

if __name__ == '__main__':
    unittest.main()
