from concurrent.futures import ThreadPoolExecutor

import pandas as pd
from tqdm import tqdm

from fedpower import hooks
from fedpower.config import NOISE_SCHEMES, PROTOCOLS
from fedpower.exceptions import ConfigError
from fedpower.utils import get_attr, logger

SUMMARY_COLUMNS = (
    "value", "runs", "accuracy_mean", "accuracy_std", "agg_seconds_mean",
    "agg_seconds_median", "overhead", "rounds_to_target", "bits_to_target",
)


def apply_axis(config, axis, value):
    """`config` with one sweep coordinate set."""
    if axis == "epsilon":
        if value in (None, "nonprivate"):
            return config.with_overrides(privacy={"epsilon": None, "sigma": None})
        clip = config.privacy.clip if config.privacy.clip is not None else 2.0
        return config.with_overrides(privacy={"epsilon": float(value), "sigma": None, "clip": clip})
    if axis == "refactor_frequency":
        return config.with_overrides(protocol={"refactor_frequency": int(value)})
    if axis == "protocol":
        if value not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {value!r}")
        return config.with_overrides(protocol={"name": value})
    if axis == "noise_scheme":
        if value not in NOISE_SCHEMES:
            raise ConfigError(f"unknown noise scheme {value!r}")
        return config.with_overrides(protocol={"noise_scheme": value})
    raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {hooks.sweep_axes}")


def summarize_runs(runs):
    """Per-value mean and sample std (ddof=1) of final accuracy with timing columns."""
    ok = runs[runs["success"]] if "success" in runs else runs
    if ok.empty:
        return pd.DataFrame(columns=list(SUMMARY_COLUMNS))
    grouped = ok.groupby("value", sort=False, dropna=False)
    summary = pd.DataFrame({
        "runs": grouped.size(),
        "accuracy_mean": grouped["final_accuracy"].mean(),
        "accuracy_std": grouped["final_accuracy"].std(ddof=1),
        "agg_seconds_mean": grouped["agg_seconds_mean"].mean(),
        "agg_seconds_median": grouped["agg_seconds_median"].mean(),
        "overhead": grouped["overhead"].mean() if "overhead" in ok else float("nan"),
        "rounds_to_target": grouped["rounds_to_target"].mean() if "rounds_to_target" in ok else float("nan"),
        "bits_to_target": grouped["bits_to_target"].mean() if "bits_to_target" in ok else float("nan"),
    }).reset_index()
    return summary[list(SUMMARY_COLUMNS)]


def _baseline(config):
    return config.with_overrides(protocol={"name": "fedlora", "refactor_frequency": 1})


def sweep(base_config, axis, values, seeds=None, workers=1, target=None, baseline=True, progress=False):
    """Run every (value, seed) pair; failures are recorded, not raised.

    With `baseline`, a FedLoRA run per distinct setting gives the relative
    aggregation overhead of each run.
    """
    log = logger("harness")
    seeds = list(seeds if seeds is not None else base_config.seeds)
    run_job = get_attr(hooks.job_handlers["run"])

    jobs, rejected = [], []
    for value in values:
        for seed in seeds:
            try:
                jobs.append((value, apply_axis(base_config, axis, value).with_overrides(seed=seed)))
            except ConfigError as e:
                log.warning(f"{axis}={value} seed={seed} rejected: {e}")
                rejected.append({"axis": axis, "value": value, "seed": seed, "success": False,
                                 "error": str(e), "error_type": type(e).__name__})

    baselines = {}
    if baseline:
        for _, config in jobs:
            reference = _baseline(config)
            baselines.setdefault(_key(reference), reference)

    payloads = [(("run", value), config) for value, config in jobs]
    payloads += [(("baseline", key), config) for key, config in baselines.items()]
    log.info(f"sweep over {axis}: {len(jobs)} runs plus {len(baselines)} baselines")

    def execute(payload):
        tag, config = payload
        return tag, run_job(config.to_dict(), target=target)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(tqdm(pool.map(execute, payloads), total=len(payloads), disable=not progress))
    else:
        outcomes = [execute(p) for p in tqdm(payloads, disable=not progress)]

    reference_times = {
        tag[1]: outcome.get("agg_seconds_mean")
        for tag, outcome in outcomes if tag[0] == "baseline" and outcome["success"]
    }
    rows = []
    for (tag, outcome), (value, config) in zip(outcomes, jobs):
        row = {"axis": axis, "value": value, "seed": config.seed, **outcome}
        if baseline and outcome["success"]:
            reference = reference_times.get(_key(_baseline(config)))
            row["overhead"] = (outcome["agg_seconds_mean"] - reference) / reference if reference else float("nan")
        if not outcome["success"]:
            log.warning(f"{axis}={value} seed={config.seed} failed: {outcome['error']}")
        rows.append(row)

    runs = pd.DataFrame(rows + rejected)
    return {"success": bool(runs["success"].all()) if len(runs) else True,
            "runs": runs, "summary": summarize_runs(runs)}


def _key(config):
    return repr(sorted(config.to_dict().items()))
