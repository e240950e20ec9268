# tasks.py
from fedpower.config import FLRunConfig
from fedpower.services import AttackService, ExperimentService
from fedpower.utils import log_error, logger


def run_job(config_data, target=None, run_dir=None, write=False):
    """Run one configuration given as a config dict; returns a flat result dict."""
    try:
        config = FLRunConfig.from_dict(config_data)
    except Exception as e:
        log_error(f"Invalid run config: {e}", "tasks")
        return {"success": False, "error": str(e), "error_type": type(e).__name__}

    response = ExperimentService().run(config, run_dir=run_dir, write=write or run_dir is not None, target=target)
    if not response["success"]:
        return response
    outcome = {"success": True, **response["summary"]}
    if "run_dir" in response:
        outcome["run_dir"] = response["run_dir"]
    logger("tasks").debug(f"job {config.name} seed {config.seed} finished")
    return outcome


def attack_job(run_dir, attack="all", seed=0, shadows=None, eval_size=500, workers=1, out_dir=None):
    """Attack a finished run directory."""
    kwargs = {"eval_size": eval_size, "workers": workers}
    if shadows is not None:
        kwargs["shadows"] = shadows
    return AttackService(**kwargs).run(run_dir, attack=attack, seed=seed, out_dir=out_dir)
