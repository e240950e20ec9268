import json
import math
import statistics
from dataclasses import dataclass
from pathlib import Path

import pandas as pd

from fedpower.config import FLRunConfig
from fedpower.factorize import LoRAPair
from fedpower.fl import ROUND_COLUMNS, run_experiment
from fedpower.harness.report import bits_to_target
from fedpower.utils import log_error, logger, output_root
from fedpower.utils.matrix_io import read_matrix, write_matrix

RUN_FILES = {
    "config": "config.json",
    "rounds": "rounds.csv",
    "timings": "timings.csv",
    "summary": "summary.json",
    "a": "final_a.fpmx",
    "b": "final_b.fpmx",
    "base": "base_weight.fpmx",
}


def _finite(value):
    return None if value is None or (isinstance(value, float) and math.isinf(value)) else value


@dataclass
class LoadedRun:
    config: FLRunConfig
    pair: LoRAPair
    base_weight: object
    summary: dict

    @property
    def final_weight(self):
        return self.base_weight + self.pair.merged()


class ExperimentService:
    """Runs one configured experiment and persists its artifacts."""

    def __init__(self, output_dir=None):
        self.output_dir = Path(output_dir or output_root())
        self.log = logger("services")

    def default_run_dir(self, config):
        return self.output_dir / config.name / f"seed{config.seed}"

    @staticmethod
    def summarize(result, target=None):
        config = result.config
        times = result.aggregation_times
        certified, order = config.certify()
        summary = {
            "name": config.name,
            "protocol": config.protocol.name,
            "noise_scheme": config.protocol.noise_scheme,
            "refactor_frequency": config.protocol.refactor_frequency,
            "rank": config.protocol.r,
            "power_iterations": config.protocol.k,
            "seed": config.seed,
            "rounds": len(result.rounds),
            "epsilon": config.privacy.epsilon,
            "certified_epsilon": _finite(certified),
            "renyi_order": order,
            "delta": config.privacy.delta,
            "sigma": result.sigma,
            "sigma_source": config.sigma_source,
            "adjacency": config.privacy.adjacency,
            "sampling_rate": config.sampling_rate,
            "clip": config.privacy.clip,
            "tight_sensitivity": config.privacy.tight_sensitivity,
            "eta": config.training.eta,
            "optimizer": config.training.optimizer,
            "value_width": config.value_width,
            "base_accuracy": result.base_accuracy,
            "final_accuracy": result.final_accuracy,
            "total_bits": result.total_bits,
            "agg_seconds_mean": statistics.fmean(times) if times else 0.0,
            "agg_seconds_median": statistics.median(times) if times else 0.0,
            "deficient_total": sum(log.deficient for log in result.rounds),
            "skipped_steps": sum(c.skipped_steps for c in result.clients),
        }
        if target is not None:
            summary["target_accuracy"] = target
            summary["rounds_to_target"], summary["bits_to_target"] = bits_to_target(result.rounds, target)
        return summary

    def write(self, result, run_dir, summary):
        run_dir = Path(run_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        result.config.save(run_dir / RUN_FILES["config"])
        rows = pd.DataFrame([log.as_row() for log in result.rounds], columns=list(ROUND_COLUMNS))
        rows.to_csv(run_dir / RUN_FILES["rounds"], index=False)
        timings = pd.DataFrame(
            {"round": [log.round for log in result.rounds], "aggregation_seconds": result.aggregation_times}
        )
        timings.to_csv(run_dir / RUN_FILES["timings"], index=False)
        (run_dir / RUN_FILES["summary"]).write_text(json.dumps(summary, indent=2))
        write_matrix(run_dir / RUN_FILES["a"], result.final_pair.a)
        write_matrix(run_dir / RUN_FILES["b"], result.final_pair.b)
        write_matrix(run_dir / RUN_FILES["base"], result.task.base_weight)
        return run_dir

    def run(self, config, run_dir=None, write=True, target=None, progress=False):
        try:
            result = run_experiment(config, progress=progress)
            summary = self.summarize(result, target=target)
            response = {"success": True, "summary": summary, "result": result}
            if write:
                run_dir = self.write(result, run_dir or self.default_run_dir(config), summary)
                response["run_dir"] = str(run_dir)
                self.log.info(f"run {config.name} seed {config.seed} written to {run_dir}")
            return response
        except Exception as e:
            log_error(f"Run {config.name} seed {config.seed} failed: {e}", "services")
            return {"success": False, "error": str(e), "error_type": type(e).__name__}

    @staticmethod
    def load(run_dir):
        run_dir = Path(run_dir)
        config = FLRunConfig.load(run_dir / RUN_FILES["config"])
        pair = LoRAPair(a=read_matrix(run_dir / RUN_FILES["a"]), b=read_matrix(run_dir / RUN_FILES["b"]))
        base = read_matrix(run_dir / RUN_FILES["base"])
        summary = json.loads((run_dir / RUN_FILES["summary"]).read_text())
        return LoadedRun(config=config, pair=pair, base_weight=base, summary=summary)
