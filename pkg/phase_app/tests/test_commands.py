import csv
import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase

from phase_app.function_model import GridFunction
from phase_app.harness import read_fits
from phase_app.models import ScalingFitResult, SweepRecord, SweepRun
from phase_app.records import Method, Regime, read_records


class CommandTestCase(TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def call(self, *args) -> str:
        out = StringIO()
        call_command(*args, stdout=out)
        return out.getvalue()


class GenerateCommandTests(CommandTestCase):
    def test_writes_target_and_spectrum(self):
        target_path = self.tmp / "target.csv"
        spectrum_path = self.tmp / "spectrum.json"
        output = self.call("generate", "--seed", "7", "--grid-size", "512",
                           "--output", str(target_path), "--spectrum", str(spectrum_path))
        target = GridFunction.from_csv(target_path)
        self.assertEqual(target.grid_size, 512)
        self.assertIn("Hoelder seminorm", output)
        self.assertEqual(len(json.loads(spectrum_path.read_text())["coefficients"]), 2 * 128 + 1)

    def test_gaussian_process_source(self):
        target_path = self.tmp / "gp.csv"
        self.call("generate", "--seed", "3", "--source", "gp", "--p", "4", "--flux-scale", "1e-3",
                  "--grid-size", "256", "--output", str(target_path))
        self.assertEqual(GridFunction.from_csv(target_path).grid_size, 256)

    def test_invalid_class_raises_command_error(self):
        with self.assertRaises(CommandError):
            self.call("generate", "--seed", "1", "--q", "-1", "--output", str(self.tmp / "bad.csv"))


class EstimateCommandTests(CommandTestCase):
    def test_prints_record_json(self):
        row = json.loads(self.call("estimate", "--seed", "1", "--N", "4096", "--grid-size", "512"))
        self.assertEqual(row["method"], Method.PS.value)
        self.assertEqual(row["N"], 4096)
        self.assertEqual(row["grid_size"], 512)
        self.assertGreater(row["delta"], 0.0)

    def test_uses_generated_target(self):
        target_path = self.tmp / "target.csv"
        self.call("generate", "--seed", "5", "--grid-size", "256", "--amplitude-cap", "1.0",
                  "--output", str(target_path))
        row = json.loads(self.call("estimate", "--seed", "2", "--N", "8192", "--method", "WS",
                                   "--target", str(target_path)))
        self.assertEqual(row["method"], Method.WS.value)
        self.assertEqual(row["grid_size"], 256)
        self.assertEqual(row["particles_used"], 8192)

    def test_ws_rejects_smooth_classes(self):
        with self.assertRaises(CommandError):
            self.call("estimate", "--seed", "1", "--N", "4096", "--method", "WS", "--q", "2")


class BoundsCommandTests(CommandTestCase):
    def test_writes_one_row_per_combination(self):
        path = self.tmp / "bounds.csv"
        output = self.call("bounds", "--q", "0.5,1", "--n-min", "10", "--n-max", "12", "--output", str(path))
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        self.assertEqual(len(rows), 2 * 3)
        self.assertEqual({int(row["N"]) for row in rows}, {1024, 2048, 4096})
        self.assertIn("6 rows saved", output)

    def test_inverted_range_raises(self):
        with self.assertRaises(CommandError):
            self.call("bounds", "--n-min", "12", "--n-max", "10", "--output", str(self.tmp / "b.csv"))


class SweepCommandTests(CommandTestCase):
    SWEEP_ARGS = ("--n-list", "256,512,1024,2048", "--trials", "30", "--grid-size", "256", "--workers", "1")

    def test_writes_outputs_and_persists_run(self):
        output = self.call("sweep", "--seed", "11", *self.SWEEP_ARGS, "--output-dir", str(self.tmp),
                           "--persist", "--batch-size", "5")
        for name in ("records.csv", "config.json", "fits.json", "points.csv", "scaling.svg"):
            self.assertTrue((self.tmp / name).exists(), name)
        self.assertIn("SCALING FIT", output)
        self.assertIn("BOUND CONSISTENCY", output)

        run = SweepRun.objects.get()
        self.assertEqual(run.seed, 11)
        self.assertEqual(run.method, Method.PS.value)
        self.assertEqual(SweepRecord.objects.filter(run=run).count(), 120)
        self.assertEqual(ScalingFitResult.objects.filter(run=run).count(), 1)

        records = read_records(self.tmp / "records.csv")
        self.assertEqual(run.estimation_records(), records)
        self.assertEqual(run.scaling_fits(), read_fits(self.tmp / "fits.json"))
        self.assertEqual(run.experiment_config().n_list, (256, 512, 1024, 2048))

    def test_config_file_and_flag_override(self):
        config_path = self.tmp / "sweep.json"
        config_path.write_text(json.dumps({
            "regime": "Heisenberg",
            "sweep": {"N_list": [4096, 8192], "trials": 2},
            "grid": {"G": 256},
        }))
        self.call("sweep", "--seed", "5", "--config", str(config_path), "--trials", "1",
                  "--output-dir", str(self.tmp), "--no-plot")
        resolved = json.loads((self.tmp / "config.json").read_text())
        self.assertEqual(resolved["regime"], Regime.HEISENBERG.value)
        self.assertEqual(resolved["sweep"]["trials"], 1)
        self.assertEqual(len(read_records(self.tmp / "records.csv")), 2)
        self.assertFalse((self.tmp / "scaling.svg").exists())
        self.assertEqual(SweepRun.objects.count(), 0)

    def test_bad_config_raises(self):
        config_path = self.tmp / "bad.json"
        config_path.write_text(json.dumps({"method": "WS", "smoothness": {"q": 2.0}}))
        with self.assertRaises(CommandError):
            self.call("sweep", "--seed", "1", "--config", str(config_path), "--output-dir", str(self.tmp))

    def test_unreadable_config_raises(self):
        with self.assertRaises(CommandError):
            self.call("sweep", "--seed", "1", "--config", str(self.tmp / "missing.json"))


class VerifyCommandTests(CommandTestCase):
    def test_quick_subset_passes(self):
        path = self.tmp / "verify.json"
        output = self.call("verify", "--quick", "--only", "kernels,qfi", "--output", str(path))
        payload = json.loads(path.read_text())
        self.assertEqual(payload["scale"], "quick")
        self.assertTrue(all(result["passed"] for result in payload["results"]))
        self.assertIn("6 of 6 checks passed", output)

    def test_unknown_check_raises(self):
        with self.assertRaises(CommandError):
            self.call("verify", "--quick", "--only", "nonsense")
