import json
import os
import tempfile
import unittest
from pathlib import Path

import numpy as np

from fedpower.fl.test_simulation import tiny_config
from fedpower.harness import overfit_control, preset
from fedpower.services import AttackService, ExperimentService

SLOW = os.environ.get("FEDPOWER_SLOW_TESTS") == "1"


class TestExperimentService(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.service = ExperimentService(output_dir=self.root)

    def tearDown(self):
        self.tmp.cleanup()

    def test_run_writes_artifacts(self):
        config = tiny_config(T=3).with_overrides(privacy={"clip": 2.0, "epsilon": 50.0})
        response = self.service.run(config, target=0.5)
        self.assertTrue(response["success"])
        run_dir = Path(response["run_dir"])
        for name in ("config.json", "rounds.csv", "timings.csv", "summary.json",
                     "final_a.fpmx", "final_b.fpmx", "base_weight.fpmx"):
            self.assertTrue((run_dir / name).exists(), name)

        summary = json.loads((run_dir / "summary.json").read_text())
        self.assertEqual(summary["sigma_source"], "accountant")
        self.assertLessEqual(summary["certified_epsilon"], 50.0)
        self.assertEqual(summary["rounds"], 3)

        loaded = ExperimentService.load(run_dir)
        self.assertEqual(loaded.config, config)
        np.testing.assert_array_equal(loaded.final_weight, response["result"].final_weight)

    def test_rounds_csv_is_reproducible(self):
        first = self.service.run(tiny_config(T=4), run_dir=self.root / "a")
        second = self.service.run(tiny_config(T=4, workers=2), run_dir=self.root / "b")
        self.assertEqual((Path(first["run_dir"]) / "rounds.csv").read_bytes(),
                         (Path(second["run_dir"]) / "rounds.csv").read_bytes())

    def test_nonprivate_summary(self):
        response = self.service.run(tiny_config(T=2), write=False)
        self.assertIsNone(response["summary"]["certified_epsilon"])
        self.assertEqual(response["summary"]["sigma"], 0.0)

    def test_failure_becomes_a_result(self):
        config = tiny_config(T=2).with_overrides(privacy={"clip": 2.0, "epsilon": 1e-6})
        response = self.service.run(config, write=False)
        self.assertFalse(response["success"])
        self.assertEqual(response["error_type"], "ConfigError")


class TestAttackService(unittest.TestCase):
    def test_attacks_a_finished_run(self):
        with tempfile.TemporaryDirectory() as tmp:
            run = ExperimentService(output_dir=tmp).run(tiny_config(T=2))
            response = AttackService(shadows=2, eval_size=20).run(run["run_dir"], attack="all")
            self.assertTrue(response["success"], response.get("error"))
            out = Path(response["out_dir"])
            self.assertTrue((out / "attack.csv").exists())
            summary = json.loads((out / "attack_summary.json").read_text())
        self.assertEqual(set(summary["attacks"]), {"shadow", "loss", "calibration"})
        for result in summary["attacks"].values():
            self.assertTrue(0.0 <= result["accuracy"] <= 1.0)

    def test_unknown_attack(self):
        with tempfile.TemporaryDirectory() as tmp:
            run = ExperimentService(output_dir=tmp).run(tiny_config(T=1))
            response = AttackService(shadows=2).run(run["run_dir"], attack="lira")
        self.assertFalse(response["success"])
        self.assertEqual(response["error_type"], "ConfigError")

    @unittest.skipUnless(SLOW, "set FEDPOWER_SLOW_TESTS=1")
    def test_private_releases_resist_and_overfit_control_leaks(self):
        service = AttackService(eval_size=500)
        leaks = 0
        for seed in range(5):
            control = ExperimentService().run(overfit_control(seed=seed), write=False)["result"]
            results, _ = service.attack_model(control.released_model, control.config, control.task, seed=seed)
            leaks += any(r.accuracy >= 0.55 for r in results.values())
            for name in ("eps9", "eps6", "eps3"):
                private = ExperimentService().run(preset(name, seed=seed), write=False)["result"]
                results, _ = service.attack_model(private.released_model, private.config, private.task, seed=seed)
                for result in results.values():
                    self.assertTrue(0.40 <= result.accuracy <= 0.60, (name, result.name, result.accuracy))
                    self.assertTrue(0.40 <= result.auc <= 0.60, (name, result.name, result.auc))
        self.assertGreaterEqual(leaks, 4)


if __name__ == "__main__":
    unittest.main()
