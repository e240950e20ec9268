import json
from pathlib import Path

import pandas as pd

from fedpower import hooks
from fedpower.attacks import (
    EvaluationSet,
    FederatedTrainer,
    calibration_attack,
    collect_records,
    loss_threshold_attack,
    record_table,
    shadow_model_attack,
    train_shadows,
)
from fedpower.exceptions import ConfigError
from fedpower.fl import ReleasedModel, SyntheticTask
from fedpower.linalg import Purpose, RngStream
from fedpower.services.experiment_service import ExperimentService
from fedpower.utils import log_error, logger

ATTACKS = ("shadow", "loss", "calibration")


class AttackService:
    """Membership attacks against a released model, using only its outputs and the aux pool."""

    def __init__(self, shadows=hooks.default_shadow_count, eval_size=500, workers=1):
        self.shadows = shadows
        self.eval_size = eval_size
        self.workers = workers
        self.log = logger("services")

    def attack_model(self, model, config, task, attack="all", seed=0):
        """Run the requested attacks; returns {name: AttackResult} and the scored records."""
        names = ATTACKS if attack == "all" else (attack,)
        unknown = set(names) - set(ATTACKS)
        if unknown:
            raise ConfigError(f"unknown attack {sorted(unknown)}; expected one of {ATTACKS + ('all',)}")

        rng = RngStream(seed, (Purpose.ATTACK,))
        evaluation = EvaluationSet.balanced(task.train_pool, task.holdout, self.eval_size, rng.child(0))
        trainer = FederatedTrainer(config, task)
        shadows = train_shadows(task.aux, self.shadows, trainer, rng.child(Purpose.SHADOW), workers=self.workers)

        results = {}
        if "shadow" in names:
            results["shadow"] = shadow_model_attack(
                model, task.aux, self.shadows, trainer, evaluation, rng.child(1), shadows=shadows,
            )
        if "loss" in names:
            results["loss"] = loss_threshold_attack(model, shadows.models[0], shadows.members[0], evaluation)
        if "calibration" in names:
            results["calibration"] = calibration_attack(model, shadows.models, evaluation)
        return results, collect_records(model, evaluation)

    def run(self, run_dir, attack="all", seed=0, out_dir=None):
        try:
            loaded = ExperimentService.load(run_dir)
            task = SyntheticTask.generate(loaded.config.task)
            model = ReleasedModel(loaded.final_weight)
            results, records = self.attack_model(model, loaded.config, task, attack=attack, seed=seed)

            out = Path(out_dir or run_dir)
            out.mkdir(parents=True, exist_ok=True)
            rows = [row for result in results.values() for row in record_table(result, records)]
            pd.DataFrame(rows).to_csv(out / "attack.csv", index=False)
            summary = {
                "run": str(run_dir),
                "seed": seed,
                "shadows": self.shadows,
                "evaluation_size": len(records),
                "attacks": {name: result.summary() for name, result in results.items()},
            }
            (out / "attack_summary.json").write_text(json.dumps(summary, indent=2))
            for name, result in results.items():
                self.log.info(f"{name}: accuracy {result.accuracy:.4f} auc {result.auc:.4f}")
            return {"success": True, "summary": summary, "out_dir": str(out)}
        except Exception as e:
            log_error(f"Attack on {run_dir} failed: {e}", "services")
            return {"success": False, "error": str(e), "error_type": type(e).__name__}
