import json
import os
import tempfile
from io import StringIO

import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from coefficient_config import COEFFICIENT_KEYS, DEFAULT_SEARCH_BOX, REFERENCE_COEFFICIENTS
from hetlab.run_manifest import EXIT_CONDITION_FAILURE, EXIT_INPUT_ERROR, EXIT_SEARCH_EXHAUSTED

from hetlab.tests.helpers import X_A, X_B, write_json


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = self._tmp.name
        self.ref_path = write_json(self.tmp, "ref.json", REFERENCE_COEFFICIENTS)

    def tearDown(self):
        self._tmp.cleanup()

    def run_command(self, name, *args):
        out = StringIO()
        call_command(name, *args, stdout=out)
        return out.getvalue()


class CheckCoeffsTests(CommandTestCase):
    def test_reference_passes(self):
        doc = json.loads(self.run_command("check_coeffs", "--coeffs", self.ref_path, "--no-timestamp"))
        self.assertEqual(doc["manifest"]["command"], "check_coeffs")
        self.assertIsNone(doc["manifest"]["started_at"])
        payload = doc["payload"]
        self.assertTrue(payload["table1_pass"])
        self.assertEqual(len(payload["conditions"]), 18)
        self.assertEqual(payload["construction"]["principal_plane"], "P14")

    def test_failing_row_exit_code(self):
        path = write_json(self.tmp, "bad.json", dict(REFERENCE_COEFFICIENTS, c1=2.0))
        out = StringIO()
        with self.assertRaises(CommandError) as ctx:
            call_command("check_coeffs", "--coeffs", path, stdout=out)
        self.assertEqual(ctx.exception.returncode, EXIT_CONDITION_FAILURE)
        self.assertIn("C9", str(ctx.exception))
        # the report is still written
        self.assertFalse(json.loads(out.getvalue())["payload"]["table1_pass"])

    def test_missing_key_exit_code(self):
        data = dict(REFERENCE_COEFFICIENTS)
        del data["d4"]
        path = write_json(self.tmp, "short.json", data)
        with self.assertRaises(CommandError) as ctx:
            self.run_command("check_coeffs", "--coeffs", path)
        self.assertEqual(ctx.exception.returncode, EXIT_INPUT_ERROR)
        self.assertIn("d4", str(ctx.exception))

    def test_output_is_deterministic_without_timestamp(self):
        args = ("check_coeffs", "--coeffs", self.ref_path, "--no-timestamp")
        self.assertEqual(self.run_command(*args), self.run_command(*args))


class FindCoeffsTests(CommandTestCase):
    def test_point_box(self):
        box = write_json(self.tmp, "box.json", {k: [v, v] for k, v in REFERENCE_COEFFICIENTS.items()})
        doc = json.loads(self.run_command("find_coeffs", "--box", box, "--max", "5", "--workers", "1",
                                          "--no-timestamp"))
        self.assertEqual(doc["payload"], REFERENCE_COEFFICIENTS)
        self.assertEqual(doc["manifest"]["notes"]["status"], "found")

        # the saved envelope feeds straight back into check_coeffs
        found = os.path.join(self.tmp, "found.json")
        with open(found, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
        self.run_command("check_coeffs", "--coeffs", found)

    def test_out_writes_plain_coefficient_file(self):
        box = write_json(self.tmp, "box.json", {k: [v, v] for k, v in REFERENCE_COEFFICIENTS.items()})
        out = os.path.join(self.tmp, "plain.json")
        self.run_command("find_coeffs", "--box", box, "--max", "5", "--workers", "1", "--out", out)
        with open(out, encoding="utf-8") as fh:
            self.assertEqual(json.load(fh), REFERENCE_COEFFICIENTS)
        doc = json.loads(self.run_command("check_coeffs", "--coeffs", out))
        self.assertTrue(doc["payload"]["table1_pass"])

    def test_inverted_box(self):
        data = {k: list(DEFAULT_SEARCH_BOX[k]) for k in COEFFICIENT_KEYS}
        data["c1"] = [1.0, -1.0]
        box = write_json(self.tmp, "box.json", data)
        with self.assertRaises(CommandError) as ctx:
            self.run_command("find_coeffs", "--box", box)
        self.assertEqual(ctx.exception.returncode, EXIT_INPUT_ERROR)

    def test_exhausted(self):
        data = {k: list(DEFAULT_SEARCH_BOX[k]) for k in COEFFICIENT_KEYS}
        data["c1"] = [0.1, 5.0]
        box = write_json(self.tmp, "box.json", data)
        out = StringIO()
        with self.assertRaises(CommandError) as ctx:
            call_command("find_coeffs", "--box", box, "--mode", "direct_conditions", "--max", "50",
                         "--workers", "1", stdout=out)
        self.assertEqual(ctx.exception.returncode, EXIT_SEARCH_EXHAUSTED)
        payload = json.loads(out.getvalue())["payload"]
        self.assertEqual(payload["status"], "SearchFailure")
        self.assertEqual(payload["dominant"], "C9")


class SimulateTests(CommandTestCase):
    def test_csv_and_manifest(self):
        csv_path = os.path.join(self.tmp, "traj.csv")
        doc = json.loads(self.run_command("simulate", "--coeffs", self.ref_path, "--x0", "0.1,0,0,0",
                                          "--tmax", "50", "--out", csv_path))
        frame = pd.read_csv(csv_path)
        self.assertEqual(list(frame.columns), ["t", "x1", "x2", "x3", "x4"])
        self.assertLess(abs(frame["x1"].iloc[-1] - X_B), 1e-6)
        self.assertTrue(os.path.exists(csv_path + ".json"))
        self.assertIn(doc["payload"]["reason"], ("ConvergedToPoint", "TimeLimit"))

    def test_csv_to_stdout(self):
        text = self.run_command("simulate", "--coeffs", self.ref_path, "--tmax", "1")
        self.assertEqual(text.splitlines()[0], "t,x1,x2,x3,x4")

    def test_start_on_equilibrium(self):
        csv_path = os.path.join(self.tmp, "xa.csv")
        doc = json.loads(self.run_command("simulate", "--coeffs", self.ref_path, "--x0", f"{X_A!r},0,0,0",
                                          "--out", csv_path))
        self.assertEqual(doc["manifest"]["notes"]["termination"], "ConvergedToPoint")

    def test_negative_time(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command("simulate", "--coeffs", self.ref_path, "--tmax=-1")
        self.assertEqual(ctx.exception.returncode, EXIT_INPUT_ERROR)

    def test_bad_state(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command("simulate", "--coeffs", self.ref_path, "--x0", "1,2")
        self.assertEqual(ctx.exception.returncode, EXIT_INPUT_ERROR)


class AdjudicateCommandTests(CommandTestCase):
    def test_reference_without_basin(self):
        out_dir = os.path.join(self.tmp, "report")
        doc = json.loads(self.run_command("adjudicate", "--coeffs", self.ref_path, "--out", out_dir,
                                          "--skip-basin", "--no-timestamp"))
        for name in ("conditions", "construction", "connections", "basin", "adjudication"):
            self.assertTrue(os.path.exists(os.path.join(out_dir, f"{name}.json")), name)
        payload = doc["payload"]
        self.assertEqual(payload["principal_plane"], "P14")
        self.assertEqual(payload["predicted_cycle"], "P14cycle")
        self.assertEqual(payload["simulated_cycle"], "skipped")
        self.assertTrue(any(a.startswith("(a)") for a in payload["anomalies"]))

        with open(os.path.join(out_dir, "connections.json"), encoding="utf-8") as fh:
            connections = json.load(fh)["payload"]["connections"]
        self.assertEqual(len(connections), 3)

    def test_unwritable_output(self):
        blocker = os.path.join(self.tmp, "not_a_dir")
        with open(blocker, "w", encoding="utf-8") as fh:
            fh.write("x")
        with self.assertRaises(CommandError) as ctx:
            self.run_command("adjudicate", "--coeffs", self.ref_path, "--out", blocker, "--skip-basin")
        self.assertEqual(ctx.exception.returncode, EXIT_INPUT_ERROR)
