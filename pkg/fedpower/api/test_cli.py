import contextlib
import io
import json
import tempfile
import unittest
from pathlib import Path

import numpy as np
import pandas as pd

from fedpower import hooks
from fedpower.api.cli import EXIT_CONFIG, EXIT_OK, main
from fedpower.fl.test_simulation import tiny_config
from fedpower.utils.matrix_io import read_matrix, write_matrix


def capture(*argv):
    buffer = io.StringIO()
    with contextlib.redirect_stdout(buffer):
        code = main(list(argv))
    return code, buffer.getvalue()


def invoke(*argv):
    code, text = capture(*argv)
    return code, json.loads(text)


class TestCli(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_accountant_round_trip(self):
        table = str(self.root / "rdp.csv")
        code, out = invoke("accountant", "--epsilon", "3", "--steps", "200", "--q-c", "0.5", "--q-s", "0.05",
                           "--out", table)
        self.assertEqual(code, EXIT_OK)
        self.assertLessEqual(out["epsilon"], 3.0)
        self.assertEqual(out["table"], table)
        code, back = invoke("accountant", "--sigma", str(out["sigma"]), "--steps", "200",
                            "--q-c", "0.5", "--q-s", "0.05", "--out", table)
        self.assertAlmostEqual(back["epsilon"], out["epsilon"], places=9)

    def test_accountant_prints_rdp_table(self):
        code, text = capture("accountant", "--epsilon", "3", "--steps", "200", "--q-c", "0.5", "--q-s", "0.05")
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(text.startswith("# sigma="))
        self.assertIn("order,rdp\n", text)
        rows = pd.read_csv(io.StringIO(text), comment="#")
        self.assertEqual(list(rows.columns), ["order", "rdp"])
        self.assertEqual(len(rows), len(hooks.default_orders))
        np.testing.assert_allclose(rows["order"], hooks.default_orders)
        self.assertTrue((rows["rdp"] > 0).all())

    def test_accountant_table_file_matches_stdout(self):
        argv = ("accountant", "--sigma", "1.5", "--steps", "50", "--q-c", "0.2")
        code, text = capture(*argv)
        self.assertEqual(code, EXIT_OK)
        code, out = invoke(*argv, "--out", str(self.root / "t.csv"))
        printed = pd.read_csv(io.StringIO(text), comment="#")
        written = pd.read_csv(self.root / "t.csv")
        pd.testing.assert_frame_equal(printed, written)

    def test_accountant_needs_exactly_one_target(self):
        code, out = invoke("accountant", "--steps", "10")
        self.assertEqual(code, EXIT_CONFIG)
        self.assertFalse(out["success"])

    def test_factorize(self):
        w = np.random.default_rng(0).normal(size=(6, 5))
        write_matrix(self.root / "w.fpmx", w)
        code, out = invoke("factorize", "--input", str(self.root / "w.fpmx"), "--rank", "5",
                           "--iters", "3", "--out-a", str(self.root / "a.fpmx"),
                           "--out-b", str(self.root / "b.fpmx"))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out["method"], "powerdp")
        self.assertLess(out["reconstruction_error"], 1e-9)
        merged = read_matrix(self.root / "b.fpmx") @ read_matrix(self.root / "a.fpmx")
        np.testing.assert_allclose(merged, w, atol=1e-9)

    def test_factorize_plain_power_iteration(self):
        rng = np.random.default_rng(1)
        w = rng.normal(size=(8, 2)) @ rng.normal(size=(2, 6))
        write_matrix(self.root / "w.fpmx", w)
        code, out = invoke("factorize", "--input", str(self.root / "w.fpmx"), "--method", "power",
                           "--rank", "2", "--iters", "4", "--sigma", "5.0",
                           "--out-a", str(self.root / "a.fpmx"), "--out-b", str(self.root / "b.fpmx"))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out["method"], "power")
        a = read_matrix(self.root / "a.fpmx")
        self.assertEqual(a.shape, (2, 6))
        np.testing.assert_allclose(a @ a.T, np.eye(2), atol=1e-10)
        # sigma is ignored, so a rank-2 input comes back exactly
        np.testing.assert_allclose(read_matrix(self.root / "b.fpmx") @ a, w, atol=1e-8)

    def test_factorize_rejects_unknown_method(self):
        with contextlib.redirect_stderr(io.StringIO()), self.assertRaises(SystemExit):
            main(["factorize", "--input", "w.fpmx", "--method", "svd", "--rank", "2",
                  "--out-a", "a.fpmx", "--out-b", "b.fpmx"])

    def test_run_and_report(self):
        config_path = tiny_config(T=2).save(self.root / "config.json")
        code, out = invoke("run", "--config", str(config_path), "--out", str(self.root / "run"))
        self.assertEqual(code, EXIT_OK)
        self.assertTrue((self.root / "run" / "rounds.csv").exists())
        code, out = invoke("report", "--runs", str(self.root / "run"), "--out", str(self.root / "report"))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out["rows"], 2)

    def test_bad_config_exits_with_one(self):
        path = self.root / "bad.json"
        path.write_text(json.dumps({"privacy": {"epsilon": 3.0, "sigma": 1.0}}))
        code, out = invoke("run", "--config", str(path))
        self.assertEqual(code, EXIT_CONFIG)
        self.assertEqual(out["error_type"], "ConfigError")

    def test_missing_run_dir_is_rejected(self):
        code, out = invoke("attack", "--model", str(self.root / "nowhere"))
        self.assertEqual(code, EXIT_CONFIG)
        self.assertFalse(out["success"])


if __name__ == "__main__":
    unittest.main()
