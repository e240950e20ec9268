import argparse
import json
import logging
import sys
from pathlib import Path

import pandas as pd

from fedpower import __version__, hooks
from fedpower.accountant import (
    AccountantState,
    certify,
    compose,
    effective_rate,
    required_sigma,
    step_rdp,
)
from fedpower.config import FLRunConfig, NOISE_SCHEMES
from fedpower.exceptions import ConfigError, ValidationError
from fedpower.factorize import power_iteration, private_factorizer, reconstruction_error
from fedpower.harness import preset, report, sweep
from fedpower.linalg import RngStream, frobenius_norm
from fedpower.services import ATTACKS, ExperimentService
from fedpower.utils import get_attr, log_error, logger, output_root
from fedpower.utils.matrix_io import read_matrix, write_matrix

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

# failures that mean the request itself was invalid
_CONFIG_ERRORS = ("ConfigError", "FormatError")


def _load_config(args):
    if getattr(args, "config", None):
        config = FLRunConfig.load(args.config)
    else:
        config = preset(args.preset, protocol=args.protocol)
    if getattr(args, "seed", None) is not None:
        config = config.with_overrides(seed=args.seed)
    # surfaces an unreachable epsilon before anything runs
    config.privacy_spec()
    return config


def _emit(payload):
    print(json.dumps(payload, indent=2, default=str))


def cmd_run(args):
    config = _load_config(args)
    out = Path(args.out) if args.out else None
    response = ExperimentService().run(config, run_dir=out, target=args.target, progress=args.progress)
    response.pop("result", None)
    return response


def cmd_sweep(args):
    config = _load_config(args)
    values = [_parse_value(v) for v in args.values.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else None
    outcome = sweep(config, args.axis, values, seeds=seeds, workers=args.workers,
                    target=args.target, baseline=not args.no_baseline, progress=args.progress)
    out = Path(args.out or output_root()) / f"sweep-{args.axis}"
    out.mkdir(parents=True, exist_ok=True)
    outcome["runs"].to_csv(out / "sweep_runs.csv", index=False)
    outcome["summary"].to_csv(out / "sweep_summary.csv", index=False)
    failures = outcome["runs"][~outcome["runs"]["success"]] if len(outcome["runs"]) else []
    return {
        "success": True,
        "out_dir": str(out),
        "failed_runs": len(failures),
        "summary": outcome["summary"].to_dict(orient="records"),
    }


def _parse_value(text):
    text = text.strip()
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


def cmd_attack(args):
    attack_job = get_attr(hooks.job_handlers["attack"])
    return attack_job(args.model, attack=args.attack, seed=args.seed, shadows=args.shadows,
                      eval_size=args.eval_size, workers=args.workers, out_dir=args.out)


def cmd_factorize(args):
    w = read_matrix(args.input)
    rng = RngStream(args.seed)
    if args.method == "power":
        pair = power_iteration(w, args.rank, args.iters, rng)
    else:
        clip = args.clip if args.clip is not None else (frobenius_norm(w) or 1.0)
        pair = private_factorizer(args.method)(w, args.rank, args.iters, args.sigma, clip, rng)
    write_matrix(args.out_a, pair.a)
    write_matrix(args.out_b, pair.b)
    return {
        "success": True,
        "method": args.method,
        "reconstruction_error": reconstruction_error(w, pair),
        "deficient": pair.deficient,
    }


def cmd_accountant(args):
    q = effective_rate(args.q_c, args.q_s, args.adjacency)
    if (args.sigma is None) == (args.epsilon is None):
        raise ConfigError("give exactly one of --sigma or --epsilon")
    if args.epsilon is not None:
        sigma = required_sigma(args.epsilon, args.delta, q, args.steps)
    else:
        sigma = args.sigma
    epsilon, order = certify(sigma, q, args.steps, args.delta)
    state = compose(AccountantState(), step_rdp(sigma, q, hooks.default_orders), args.steps)
    table = pd.DataFrame(state.as_rows(), columns=["order", "rdp"])
    outcome = {"success": True, "sigma": sigma, "q": q, "steps": args.steps, "delta": args.delta,
               "epsilon": epsilon, "renyi_order": order}
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(out, index=False)
        outcome["table"] = str(out)
        return outcome
    # the table itself goes to stdout; the scalars ride along as comment lines
    scalars = ("sigma", "q", "steps", "delta", "epsilon", "renyi_order")
    header = "".join(f"# {key}={outcome[key]}\n" for key in scalars)
    outcome["stdout"] = header + table.to_csv(index=False)
    return outcome


def cmd_report(args):
    outcome = report(args.runs, out_dir=args.out, target=args.target)
    return {"success": True, "rows": len(outcome["table"]), "runs": len(outcome["runs"]),
            "failures": outcome["failures"], "out_dir": args.out}


def _config_arguments(parser):
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--config", help="JSON run configuration")
    source.add_argument("--preset", default="eps3", choices=hooks.preset_names + hooks.control_presets)
    parser.add_argument("--protocol", default="fedpower", help="protocol for presets")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--target", type=float, default=hooks.default_target_accuracy,
                        help="accuracy for rounds/bits-to-target")
    parser.add_argument("--progress", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="fedpower", description=hooks.app_description)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one federated experiment")
    _config_arguments(run)
    run.add_argument("--out")
    run.set_defaults(handler=cmd_run)

    sw = sub.add_parser("sweep", help="run a grid over one axis and several seeds")
    _config_arguments(sw)
    sw.add_argument("--axis", required=True, choices=hooks.sweep_axes)
    sw.add_argument("--values", required=True, help="comma separated")
    sw.add_argument("--seeds", help="comma separated; defaults to the config's seeds")
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--no-baseline", action="store_true", help="skip FedLoRA timing baselines")
    sw.add_argument("--out")
    sw.set_defaults(handler=cmd_sweep)

    at = sub.add_parser("attack", help="membership inference against a finished run")
    at.add_argument("--model", required=True, help="run directory")
    at.add_argument("--attack", default="all", choices=ATTACKS + ("all",))
    at.add_argument("--shadows", type=int, default=hooks.default_shadow_count)
    at.add_argument("--eval-size", type=int, default=500)
    at.add_argument("--workers", type=int, default=1)
    at.add_argument("--seed", type=int, default=0)
    at.add_argument("--out")
    at.set_defaults(handler=cmd_attack)

    fz = sub.add_parser("factorize", help="rank-r private factorization of an FPMX matrix")
    fz.add_argument("--input", required=True)
    fz.add_argument("--rank", type=int, required=True)
    fz.add_argument("--iters", type=int, default=hooks.default_power_iterations)
    fz.add_argument("--sigma", type=float, default=0.0)
    fz.add_argument("--clip", type=float, help="norm bound; defaults to the input norm")
    fz.add_argument("--method", default="powerdp", choices=("power",) + NOISE_SCHEMES,
                    help="power ignores --sigma and --clip")
    fz.add_argument("--seed", type=int, default=0)
    fz.add_argument("--out-a", required=True)
    fz.add_argument("--out-b", required=True)
    fz.set_defaults(handler=cmd_factorize)

    ac = sub.add_parser("accountant", help="epsilon for a sigma, or sigma for an epsilon")
    ac.add_argument("--sigma", type=float)
    ac.add_argument("--epsilon", type=float)
    ac.add_argument("--delta", type=float, default=1e-5)
    ac.add_argument("--steps", type=int, required=True)
    ac.add_argument("--q-c", type=float, default=1.0)
    ac.add_argument("--q-s", type=float, default=1.0)
    ac.add_argument("--adjacency", default="sample", choices=("sample", "client"))
    ac.add_argument("--out", help="write the per-order RDP table here instead of stdout")
    ac.set_defaults(handler=cmd_accountant)

    rp = sub.add_parser("report", help="merge run directories")
    rp.add_argument("--runs", nargs="*", default=[])
    rp.add_argument("--out")
    rp.add_argument("--target", type=float)
    rp.set_defaults(handler=cmd_report)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        outcome = args.handler(args)
    except (ConfigError, ValidationError) as e:
        logger("cli").error(str(e))
        _emit({"success": False, "error": str(e), "error_type": type(e).__name__})
        return EXIT_CONFIG
    except Exception as e:
        log_error(f"{args.command} failed: {e}", "cli")
        _emit({"success": False, "error": str(e), "error_type": type(e).__name__})
        return EXIT_RUNTIME

    text = outcome.pop("stdout", None)
    if text is None:
        _emit(outcome)
    else:
        sys.stdout.write(text)
    if outcome.get("success"):
        return EXIT_OK
    return EXIT_CONFIG if outcome.get("error_type") in _CONFIG_ERRORS else EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
