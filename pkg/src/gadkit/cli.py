"""Command-line surface.

Subcommands: parse, synth, train, score, run, sweep, dump-embeddings.
Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, DataError, GadkitError, NumericError
from .experiment import (
    ExperimentConfig,
    dump_embeddings,
    load_config,
    load_dataset,
    load_model_and_head,
    run_experiment,
    score_and_dump,
    sweep,
    train_and_save,
)
from .graphs import gen_synthetic
from .tudata import parse_tudataset, validate_dataset, write_tudataset


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="gadkit",
        description="Contamination-robust unsupervised graph-level anomaly detection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *names):
        if "config" in names:
            p.add_argument("--config", type=Path, help="JSON config file")
        if "dataset" in names:
            p.add_argument("--dataset", help="TU-format directory or 'synthetic'")
        if "beta" in names:
            p.add_argument("--beta", type=float, help="contamination rate")
        if "seed" in names:
            p.add_argument("--seed", type=int, help="master seed")
        if "trials" in names:
            p.add_argument("--trials", type=int, help="number of trials")
        if "out" in names:
            p.add_argument("--out", type=Path, help="output directory or file")

    p = sub.add_parser("parse", help="validate a TU-format dataset directory")
    common(p, "dataset")
    p.add_argument("--name", help="dataset file prefix when ambiguous")

    p = sub.add_parser("synth", help="emit a synthetic dataset in TU format")
    common(p, "config", "seed", "out")

    p = sub.add_parser("train", help="train one model on a whole dataset")
    common(p, "config", "dataset", "seed", "out")

    p = sub.add_parser("score", help="score a dataset with a trained checkpoint")
    common(p, "config", "dataset", "out")
    p.add_argument("--model", type=Path, required=True, help="checkpoint path")

    p = sub.add_parser("run", help="full multi-trial experiment")
    common(p, "config", "dataset", "beta", "seed", "trials", "out")

    p = sub.add_parser("sweep", help="hyperparameter grid of experiments")
    common(p, "config", "dataset", "seed", "out")

    p = sub.add_parser("dump-embeddings", help="write graph embeddings as CSV")
    common(p, "config", "dataset", "out")
    p.add_argument("--model", type=Path, required=True, help="checkpoint path")

    return parser


def _load_cfg(args):
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    for key in ("dataset", "beta", "seed", "trials"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    return cfg


def _require(args, name):
    value = getattr(args, name, None)
    if value is None:
        raise ConfigError(f"--{name} is required for this command")
    return value


def _cmd_parse(args):
    dataset = parse_tudataset(_require(args, "dataset"), name=args.name)
    print(validate_dataset(dataset))


def _cmd_synth(args):
    cfg = _load_cfg(args)
    dataset = gen_synthetic(cfg.synth_config(), seed=cfg.seed)
    out = write_tudataset(dataset, _require(args, "out"), name="SYNTH")
    print(f"wrote {len(dataset)} graphs to {out}")


def _cmd_train(args):
    cfg = _load_cfg(args)
    dataset = load_dataset(cfg)
    out = _require(args, "out")
    train_and_save(dataset, cfg, out)
    print(f"checkpoint and history written to {out}")


def _cmd_score(args):
    cfg = _load_cfg(args)
    dataset = load_dataset(cfg)
    model, head = load_model_and_head(args.model)
    scores = score_and_dump(dataset, model, head, _require(args, "out"), tau_exp=cfg.tau_exp)
    print(f"scored {len(scores)} graphs -> {args.out}")


def _cmd_run(args):
    cfg = _load_cfg(args)
    report = run_experiment(cfg, out_dir=_require(args, "out"))
    print(f"mean test AUC {report.mean_auc:.4f} +/- {report.std_auc:.4f} over {cfg.trials} trials")


def _cmd_sweep(args):
    cfg = _load_cfg(args)
    rows = sweep(cfg, out_dir=_require(args, "out"))
    for overrides, report in rows:
        print(f"{overrides}: mean AUC {report.mean_auc:.4f}")


def _cmd_dump_embeddings(args):
    cfg = _load_cfg(args)
    dataset = load_dataset(cfg)
    model, _ = load_model_and_head(args.model)
    assignment = ["all"] * len(dataset)
    dump_embeddings(model, dataset, assignment, _require(args, "out"))
    print(f"embeddings -> {args.out}")


_COMMANDS = {
    "parse": _cmd_parse,
    "synth": _cmd_synth,
    "train": _cmd_train,
    "score": _cmd_score,
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "dump-embeddings": _cmd_dump_embeddings,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 4
    except GadkitError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
