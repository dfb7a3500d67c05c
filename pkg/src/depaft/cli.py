"""Command-line surface.

Subcommands: simulate, train, predict, evaluate, cv, study.  Exit codes:
0 success, 2 configuration or usage error, 3 data error, 4 internal
numeric error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import booster, dataset
from .booster import TrainConfig
from .errors import ConfigError, DataError, NumericError
from .loss import loss_from_config
from .metrics import evaluate_predictions
from .simulate import DgpConfig, generate
from .studies import StudyConfig, run_study
from .tuning import CvConfig, grid_search


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON: {exc}") from exc


def _write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _say(args, msg) -> None:
    if not args.quiet:
        print(msg, flush=True)


def cmd_simulate(args) -> int:
    cfg_dict = _load_json(args.config)
    if args.seed is not None:
        cfg_dict["seed"] = args.seed
    config = DgpConfig.from_dict(cfg_dict)
    sim = generate(config)
    os.makedirs(args.out, exist_ok=True)
    dataset.write_csv(sim.data, os.path.join(args.out, "data.csv"))
    _write_json(sim.metadata(), os.path.join(args.out, "metadata.json"))
    _say(args, f"wrote {sim.data.n} rows; censoring fraction {sim.censoring_fraction:.4f}")
    return 0


def _train_configs(cfg_dict: dict, seed_override):
    if "loss" not in cfg_dict:
        raise ConfigError("train config requires a 'loss' section")
    loss = loss_from_config(cfg_dict["loss"])
    train_dict = dict(cfg_dict.get("train", {}))
    if seed_override is not None:
        train_dict["seed"] = seed_override
    return loss, TrainConfig.from_dict(train_dict)


def cmd_train(args) -> int:
    data = dataset.read_csv(args.data)
    loss, train_cfg = _train_configs(_load_json(args.config), args.seed)
    model = booster.train(data, loss, train_cfg)
    booster.save(model, args.out)
    final_loss = model.train_loss_history[-1]
    _say(args, f"trained {model.n_rounds} rounds; final training loss {final_loss!r}")
    return 0


def cmd_predict(args) -> int:
    model = booster.load(args.model)
    data = dataset.read_csv(args.data)
    log_times = model.predict(data.X)
    dataset.write_predictions_csv(log_times, np.exp(log_times), args.out)
    _say(args, f"wrote {data.n} predictions to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    data = dataset.read_csv(args.data)
    _, predicted_times = dataset.read_predictions_csv(args.predictions)
    if predicted_times.shape[0] != data.n:
        raise DataError(
            f"row mismatch: {predicted_times.shape[0]} predictions vs {data.n} data rows"
        )
    report = evaluate_predictions(data, predicted_times, n_horizons=args.horizons)
    os.makedirs(args.out, exist_ok=True)
    _write_json(report.to_dict(), os.path.join(args.out, "metrics.json"))
    cal_path = os.path.join(args.out, "calibration.csv")
    with open(cal_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["horizon", "predicted_proportion", "observed_proportion"])
        curve = report.calibration
        for h, p, o in zip(
            curve.horizons, curve.predicted_proportion, curve.observed_proportion
        ):
            writer.writerow([repr(float(h)), repr(float(p)), repr(float(o))])
    _say(args, f"c-index {report.c_index:.4f}; metrics in {args.out}")
    return 0


def cmd_cv(args) -> int:
    data = dataset.read_csv(args.data)
    cfg_dict = _load_json(args.config)
    loss, train_cfg = _train_configs(cfg_dict, args.seed)
    cv_dict = dict(cfg_dict.get("cv", {}))
    if args.seed is not None:
        cv_dict["seed"] = args.seed
    cv = CvConfig.from_dict(cv_dict)
    result, model = grid_search(data, loss.to_config(), train_cfg, cv)
    os.makedirs(args.out, exist_ok=True)
    _write_json(result, os.path.join(args.out, "cv_results.json"))
    booster.save(model, os.path.join(args.out, "model.json"))
    best = result["best"]
    _say(
        args,
        f"best: theta={best['theta']}, rounds={best['rounds']}, "
        f"mean c-index {best['mean_score']:.4f}",
    )
    return 0


def cmd_study(args) -> int:
    cfg_dict = _load_json(args.config)
    if args.seed is not None:
        cfg_dict["seed"] = args.seed
    if args.repetitions is not None:
        cfg_dict["repetitions"] = args.repetitions
    config = StudyConfig.from_dict(cfg_dict)
    os.makedirs(args.out, exist_ok=True)
    run_study(config, args.out, workers=args.threads, quiet=args.quiet)
    return 0


def _add_common(parser, *, out_required=True, out_help="output directory"):
    parser.add_argument("--out", required=out_required, help=out_help)
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--threads", type=int, default=1, help="worker processes")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depaft",
        description=(
            "Boosted AFT survival regression under dependent censoring: "
            "simulate, train, predict, evaluate, cross-validate, and run studies."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a dependently censored dataset")
    p.add_argument("--config", required=True, help="DGP config JSON")
    _add_common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("train", help="train a boosted model on a dataset CSV")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--config", required=True, help="loss + train config JSON")
    _add_common(p, out_help="model JSON path")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("predict", help="predict log times and times for a dataset")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("--data", required=True, help="dataset CSV")
    _add_common(p, out_help="predictions CSV path")
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against a dataset")
    p.add_argument("--predictions", required=True, help="predictions CSV")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--horizons", type=int, default=9, help="calibration horizons")
    _add_common(p)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("cv", help="k-fold grid-search cross-validation")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--config", required=True, help="loss + train + cv config JSON")
    _add_common(p)
    p.set_defaults(fn=cmd_cv)

    p = sub.add_parser("study", help="run a simulation study end to end")
    p.add_argument("--config", required=True, help="study config JSON")
    p.add_argument(
        "--repetitions", type=int, default=None, help="override config repetitions"
    )
    _add_common(p)
    p.set_defaults(fn=cmd_study)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
