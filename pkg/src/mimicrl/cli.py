"""Command-line surface: expert data, training, evaluation, inspection.

Subcommands: gen-expert | train | train-bc | eval | inspect.
Hyperparameters travel in JSON config files; flags carry only paths and
identity. Every artifact-producing run echoes its fully resolved config
to a config.json next to its outputs, and re-running any command from
that echo reproduces the outputs byte for byte.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import net, objectives, trainer
from .actor import ActorPolicy
from .data import load_dataset
from .envs import env_spec
from .errors import MimicError


def _echo_config(doc, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def _load_json(path, what):
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise MimicError(f"{what} {path}: malformed JSON at line {e.lineno}") from None


def cmd_gen_expert(args):
    dataset = trainer.generate_expert(
        args.env, args.n, args.threshold, args.seed, out_path=args.out,
    )
    _echo_config(
        {"command": "gen-expert", "env_id": args.env, "n": args.n,
         "threshold": args.threshold, "seed": args.seed, "out": args.out},
        args.out + ".config.json",
    )
    mean, lo, hi = dataset.return_stats
    print(f"wrote {args.out}: {dataset.n_trajectories} trajectories, "
          f"{len(dataset)} transitions")
    print(f"returns: mean {mean:.3f}, min {lo:.3f}, max {hi:.3f} "
          f"(threshold {args.threshold})")
    return 0


def cmd_train(args):
    doc = _load_json(args.config, "config")
    config = trainer.TrainConfig.from_dict(doc)
    dataset = load_dataset(args.expert)
    if dataset.spec.env_id != config.env_id:
        print(f"error: dataset env {dataset.spec.env_id!r} does not match "
              f"config env {config.env_id!r}", file=sys.stderr)
        return 1
    result = trainer.train(config, dataset, out_dir=args.out, verbose=True)
    last = result.metrics.eval_rows[-1]
    print(f"done: {result.env_steps} env steps, final eval return "
          f"{last['mean_return']:.3f} +- {last['std_return']:.3f}")
    return 0


def cmd_train_bc(args):
    doc = _load_json(args.config, "config")
    known = set(objectives.BCConfig.__dataclass_fields__)
    unknown = sorted(set(doc) - known)
    if unknown:
        raise MimicError(f"unknown config keys: {unknown}")
    if "env_id" not in doc or "seed" not in doc:
        raise MimicError("config requires at least env_id and seed")
    config = objectives.BCConfig(**doc)
    dataset = load_dataset(args.expert)
    if dataset.spec.env_id != config.env_id:
        print(f"error: dataset env {dataset.spec.env_id!r} does not match "
              f"config env {config.env_id!r}", file=sys.stderr)
        return 1
    policy, history = objectives.train_bc(config, dataset)
    os.makedirs(args.out, exist_ok=True)
    _echo_config(
        {**doc, "steps": config.steps, "lr": config.lr, "batch": config.batch,
         "hidden": list(config.hidden), "log_std_init": config.log_std_init},
        os.path.join(args.out, "config.json"),
    )
    ckpt = os.path.join(args.out, "bc.ckpt")
    objectives.save_bc_policy(policy, ckpt)
    with open(os.path.join(args.out, "nll_history.csv"), "w", encoding="utf-8") as f:
        f.write("step,nll\n")
        for step_i, nll in history:
            f.write(f"{step_i},{nll!r}\n")
    print(f"wrote {ckpt}: final nll {history[-1][1]:.6f}")
    return 0


def _load_policy_checkpoint(path, spec):
    params, doc = net.load_checkpoint(path)
    if "log_std" in doc:
        return objectives.load_bc_policy(path, spec)
    if "noise_dim" in doc:
        return ActorPolicy(
            params=params,
            noise_dim=int(doc["noise_dim"]),
            action_center=np.asarray(doc["action_center"], dtype=np.float64),
            action_halfwidth=np.asarray(doc["action_halfwidth"], dtype=np.float64),
            env_id=doc.get("env_id", ""),
        )
    raise MimicError(f"{path} is neither an actor nor a BC checkpoint")


def cmd_eval(args):
    spec = env_spec(args.env)
    policy = _load_policy_checkpoint(args.actor, spec)
    mean, std, returns = trainer.evaluate(policy, args.env, args.episodes, args.seed)
    resolved = {"command": "eval", "actor": args.actor, "env_id": args.env,
                "episodes": args.episodes, "seed": args.seed}
    if args.json:
        print(json.dumps({"config": resolved, "mean_return": mean,
                          "std_return": std, "returns": returns}))
    else:
        print(f"{args.env}: {args.episodes} episodes from seed {args.seed}")
        print(f"mean return {mean:.3f} +- {std:.3f} "
              f"(min {min(returns):.3f}, max {max(returns):.3f})")
    return 0


def cmd_inspect(args):
    dataset = load_dataset(args.data)
    mean, lo, hi = dataset.return_stats
    doc = {
        "config": {"command": "inspect", "data": args.data},
        "env_id": dataset.spec.env_id,
        "obs_dim": dataset.spec.obs_dim,
        "act_dim": dataset.spec.act_dim,
        "horizon": dataset.spec.horizon,
        "n_trajectories": dataset.n_trajectories,
        "n_transitions": len(dataset),
        "filter_threshold": dataset.filter_threshold,
        "return_mean": mean,
        "return_min": lo,
        "return_max": hi,
    }
    if args.json:
        print(json.dumps(doc))
    else:
        print(f"{args.data}: {dataset.spec.env_id}, "
              f"{dataset.n_trajectories} trajectories x {dataset.spec.horizon} steps")
        print(f"returns: mean {mean:.3f}, min {lo:.3f}, max {hi:.3f} "
              f"(filter threshold {dataset.filter_threshold})")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mimicrl",
        description="Off-policy imitation learning from expert demonstrations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-expert", help="roll the scripted expert into a dataset")
    p.add_argument("--env", required=True, help="environment id")
    p.add_argument("--n", type=int, default=100, help="trajectories to keep")
    p.add_argument("--threshold", type=float, required=True,
                   help="keep only episodes with return strictly above this")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="dataset file to write")
    p.set_defaults(fn=cmd_gen_expert)

    p = sub.add_parser("train", help="train the off-policy imitator")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--expert", required=True, help="expert dataset file")
    p.add_argument("--out", required=True, help="run directory")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("train-bc", help="train the behavior-cloning baseline")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--expert", required=True, help="expert dataset file")
    p.add_argument("--out", required=True, help="run directory")
    p.set_defaults(fn=cmd_train_bc)

    p = sub.add_parser("eval", help="evaluate a saved policy checkpoint")
    p.add_argument("--actor", required=True, help="actor or BC checkpoint")
    p.add_argument("--env", required=True)
    p.add_argument("--episodes", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("inspect", help="print dataset metadata and return stats")
    p.add_argument("--data", required=True, help="dataset file")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(fn=cmd_inspect)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (MimicError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
