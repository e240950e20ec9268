import json
from pathlib import Path

import pandas as pd

from fedpower.fl.simulation import ROUND_COLUMNS
from fedpower.utils import logger

KEY_COLUMNS = ("protocol", "epsilon", "seed")
LONG_COLUMNS = KEY_COLUMNS + ROUND_COLUMNS


def first_crossing(accuracies, target):
    """Index of the first value >= target, or None."""
    for index, value in enumerate(accuracies):
        if value >= target:
            return index
    return None


def bits_to_target(rounds, target):
    """(round, cumulative bits) when accuracy first reaches `target`; (None, None) otherwise.

    `rounds` is a rounds.csv frame or a list of RoundLog.
    """
    if isinstance(rounds, pd.DataFrame):
        accuracy, round_ids, bits = rounds["accuracy"].tolist(), rounds["round"].tolist(), rounds["cumulative_bits"].tolist()
    else:
        accuracy = [log.accuracy for log in rounds]
        round_ids = [log.round for log in rounds]
        bits = [log.cumulative_bits for log in rounds]
    hit = first_crossing(accuracy, target)
    if hit is None:
        return None, None
    return int(round_ids[hit]), int(bits[hit])


def _read_run(run_dir):
    run_dir = Path(run_dir)
    summary = json.loads((run_dir / "summary.json").read_text())
    rounds = pd.read_csv(run_dir / "rounds.csv", dtype={"clients": str})
    missing = set(ROUND_COLUMNS) - set(rounds.columns)
    if missing:
        raise ValueError(f"rounds.csv lacks columns {sorted(missing)}")
    return summary, rounds


def report(run_dirs, out_dir=None, target=None):
    """Merge run directories into one long table plus per-run summaries.

    Unreadable runs are skipped with a warning and listed under "failures".
    """
    log = logger("harness")
    frames, summaries, failures = [], [], []
    for run_dir in run_dirs:
        try:
            summary, rounds = _read_run(run_dir)
        except Exception as e:
            log.warning(f"skipping {run_dir}: {e}")
            failures.append({"success": False, "run": str(run_dir), "error": str(e)})
            continue
        epsilon = summary.get("epsilon")
        rounds.insert(0, "seed", summary.get("seed"))
        rounds.insert(0, "epsilon", "nonprivate" if epsilon is None else epsilon)
        rounds.insert(0, "protocol", summary.get("protocol"))
        frames.append(rounds[list(LONG_COLUMNS)])
        entry = dict(summary, run=str(run_dir))
        if target is not None:
            entry["target_accuracy"] = target
            entry["rounds_to_target"], entry["bits_to_target"] = bits_to_target(rounds, target)
        summaries.append(entry)

    table = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=list(LONG_COLUMNS))
    if len(table):
        table["epsilon"] = table["epsilon"].astype(str)
        table = table.sort_values(list(KEY_COLUMNS) + ["round"], kind="mergesort").reset_index(drop=True)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        table.to_csv(out / "report.csv", index=False)
        (out / "report.json").write_text(json.dumps({"runs": summaries, "failures": failures}, indent=2, default=str))
        log.info(f"report over {len(summaries)} runs written to {out}")
    return {"success": not failures, "table": table, "runs": summaries, "failures": failures}
