"""Runners for the three simulation studies.

Each study sweeps one axis of the data-generating process and, per grid
point and repetition, simulates a train/test pair, fits the
copula-linked model ("clayton") and the independence-assuming comparator
("independent") with 2-fold round selection, and evaluates both on the
test set.  Study axes:

* study 1: dependence strength theta at ~50% censoring (c = 1.49)
* study 2: censoring level via c at theta = 3
* study 3: four dependence structures with matched rank correlation at
  c = 1.2

Results are flushed per repetition (one JSON per task under partial/),
so interrupted runs resume, and the final CSVs are written sorted so
output bytes do not depend on worker count.
"""
from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .booster import TrainConfig
from .copula import CopulaSpec
from .errors import ConfigError
from .metrics import evaluate_predictions
from .simulate import DgpConfig, generate
from .tuning import CvConfig, grid_search

STUDY1_THETAS = (1e-10, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0)
STUDY1_C = 1.49
STUDY2_CS = (0.89, 1.2, 1.49, 2.06)
STUDY2_THETA = 3.0
STUDY3_C = 1.2
STUDY3_COPULAS = (
    CopulaSpec("clayton", 3.0),
    CopulaSpec("gumbel", 2.5),
    CopulaSpec("frank", 7.5),
    CopulaSpec("independent"),
)

MODELS = ("clayton", "independent")


@dataclass(frozen=True)
class StudyConfig:
    study: int
    repetitions: int = 20
    n_train: int = 1000
    n_test: int = 1000
    seed: int = 29
    max_rounds: int = 400
    checkpoint_stride: int = 25
    learning_rate: float = 0.1
    max_depth: int = 3
    min_child_weight: float = 1.0
    reg_lambda: float = 1.0
    gamma: float = 0.0
    n_horizons: int = 9

    def __post_init__(self):
        if self.study not in (1, 2, 3):
            raise ConfigError(f"study must be 1, 2, or 3, got {self.study}")
        if not (isinstance(self.repetitions, int) and self.repetitions >= 1):
            raise ConfigError("repetitions must be a positive integer")
        if self.n_train < 2 or self.n_test < 2:
            raise ConfigError("n_train and n_test must be >= 2")

    def to_dict(self) -> dict:
        return {
            "study": self.study,
            "repetitions": self.repetitions,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "seed": self.seed,
            "max_rounds": self.max_rounds,
            "checkpoint_stride": self.checkpoint_stride,
            "learning_rate": self.learning_rate,
            "max_depth": self.max_depth,
            "min_child_weight": self.min_child_weight,
            "lambda": self.reg_lambda,
            "gamma": self.gamma,
            "n_horizons": self.n_horizons,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StudyConfig":
        known = {
            "study", "repetitions", "n_train", "n_test", "seed", "max_rounds",
            "checkpoint_stride", "learning_rate", "max_depth", "min_child_weight",
            "lambda", "gamma", "n_horizons",
        }
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown study config fields: {sorted(extra)}")
        if "study" not in d:
            raise ConfigError("study config requires field 'study'")
        kwargs = dict(d)
        if "lambda" in kwargs:
            kwargs["reg_lambda"] = kwargs.pop("lambda")
        kwargs["study"] = int(kwargs["study"])
        return cls(**kwargs)


@dataclass(frozen=True)
class GridPoint:
    index: int
    label: str
    copula: CopulaSpec
    c: float


def grid_points(config: StudyConfig) -> list[GridPoint]:
    if config.study == 1:
        return [
            GridPoint(i, f"theta={theta:g}", CopulaSpec("clayton", theta), STUDY1_C)
            for i, theta in enumerate(STUDY1_THETAS)
        ]
    if config.study == 2:
        return [
            GridPoint(i, f"c={c:g}", CopulaSpec("clayton", STUDY2_THETA), c)
            for i, c in enumerate(STUDY2_CS)
        ]
    return [
        GridPoint(i, spec.family, spec, STUDY3_C)
        for i, spec in enumerate(STUDY3_COPULAS)
    ]


def _task_seeds(config: StudyConfig, grid_index: int, rep: int) -> tuple[int, int]:
    base = config.seed * 1_000_000 + grid_index * 1_000 + 2 * rep
    return base, base + 1


def run_task(config: StudyConfig, point: GridPoint, rep: int) -> dict:
    """One repetition at one grid point; returns a JSON-able record."""
    train_seed, test_seed = _task_seeds(config, point.index, rep)
    sim_train = generate(
        DgpConfig(n=config.n_train, c=point.c, copula=point.copula, seed=train_seed)
    )
    sim_test = generate(
        DgpConfig(n=config.n_test, c=point.c, copula=point.copula, seed=test_seed)
    )
    loss_configs = {
        "clayton": {
            "loss": "clayton",
            "theta": sim_train.clayton_equivalent_theta,
            "event_baseline": sim_train.event_baseline,
            "censor_baseline": sim_train.censor_baseline,
        },
        "independent": {
            "loss": "independent",
            "event_baseline": sim_train.event_baseline,
        },
    }
    train_cfg = TrainConfig(
        rounds=config.max_rounds,
        learning_rate=config.learning_rate,
        max_depth=config.max_depth,
        min_child_weight=config.min_child_weight,
        reg_lambda=config.reg_lambda,
        gamma=config.gamma,
    )
    cv = CvConfig(
        folds=2,
        max_rounds=config.max_rounds,
        checkpoint_stride=config.checkpoint_stride,
        seed=train_seed,
    )
    record = {
        "grid_index": point.index,
        "grid_label": point.label,
        "copula_family": point.copula.family,
        "copula_theta": point.copula.theta,
        "c": point.c,
        "rep": rep,
        "train_censoring": sim_train.censoring_fraction,
        "test_censoring": sim_test.censoring_fraction,
        "models": {},
    }
    for name in MODELS:
        result, model = grid_search(sim_train.data, loss_configs[name], train_cfg, cv)
        predicted = model.predict_time(sim_test.data.X)
        report = evaluate_predictions(sim_test.data, predicted, config.n_horizons)
        record["models"][name] = {
            "rounds": result["best"]["rounds"],
            "cv_score": result["best"]["mean_score"],
            "c_index": report.c_index,
            "mae": report.mae,
            "event_mae": report.event_mae,
            "calibration": report.calibration.to_dict(),
        }
    return record


def _partial_path(out_dir: str, grid_index: int, rep: int) -> str:
    return os.path.join(out_dir, "partial", f"task_g{grid_index:03d}_r{rep:04d}.json")


def _write_atomic(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _task_entry(args):
    config, point, rep = args
    return run_task(config, point, rep)


def run_study(config: StudyConfig, out_dir: str, workers: int = 1, quiet: bool = False):
    """Run all grid points and repetitions, then write the result CSVs.

    Completed repetitions found under partial/ are reused, so an
    interrupted run resumes where it stopped.
    """
    points = grid_points(config)
    os.makedirs(os.path.join(out_dir, "partial"), exist_ok=True)
    tasks = [(point, rep) for point in points for rep in range(config.repetitions)]

    records: dict[tuple[int, int], dict] = {}
    pending = []
    for point, rep in tasks:
        path = _partial_path(out_dir, point.index, rep)
        if os.path.exists(path):
            with open(path) as fh:
                records[(point.index, rep)] = json.load(fh)
        else:
            pending.append((point, rep))

    def note(msg):
        if not quiet:
            print(msg, flush=True)

    note(
        f"study {config.study}: {len(points)} grid points x {config.repetitions} reps; "
        f"{len(pending)} to run, {len(records)} reused"
    )
    if pending:
        if workers > 1:
            args = [(config, point, rep) for point, rep in pending]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for (point, rep), record in zip(pending, pool.map(_task_entry, args)):
                    _write_atomic(
                        _partial_path(out_dir, point.index, rep),
                        json.dumps(record, sort_keys=True),
                    )
                    records[(point.index, rep)] = record
                    note(f"  done grid={point.label} rep={rep}")
        else:
            for point, rep in pending:
                record = run_task(config, point, rep)
                _write_atomic(
                    _partial_path(out_dir, point.index, rep),
                    json.dumps(record, sort_keys=True),
                )
                records[(point.index, rep)] = record
                note(f"  done grid={point.label} rep={rep}")

    _write_results(config, points, records, out_dir)
    note(f"wrote results to {out_dir}")
    return records


def _fmt(x) -> str:
    return repr(float(x))


def _write_results(config, points, records, out_dir):
    rows_path = os.path.join(out_dir, "results.csv")
    with open(rows_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "study", "grid_index", "grid_label", "copula_family", "copula_theta",
                "c", "model", "rep", "rounds", "train_censoring", "test_censoring",
                "c_index", "mae", "event_mae",
            ]
        )
        for point in points:
            for model in MODELS:
                for rep in range(config.repetitions):
                    rec = records[(point.index, rep)]
                    m = rec["models"][model]
                    writer.writerow(
                        [
                            config.study, point.index, rec["grid_label"],
                            rec["copula_family"], _fmt(rec["copula_theta"]),
                            _fmt(rec["c"]), model, rep, m["rounds"],
                            _fmt(rec["train_censoring"]), _fmt(rec["test_censoring"]),
                            _fmt(m["c_index"]), _fmt(m["mae"]), _fmt(m["event_mae"]),
                        ]
                    )

    mean_path = os.path.join(out_dir, "results_mean.csv")
    with open(mean_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "study", "grid_index", "grid_label", "copula_family", "copula_theta",
                "c", "model", "repetitions", "mean_test_censoring", "mean_c_index",
                "mean_mae", "mean_event_mae",
            ]
        )
        for point in points:
            recs = [records[(point.index, rep)] for rep in range(config.repetitions)]
            for model in MODELS:
                vals = [r["models"][model] for r in recs]
                writer.writerow(
                    [
                        config.study, point.index, recs[0]["grid_label"],
                        recs[0]["copula_family"], _fmt(recs[0]["copula_theta"]),
                        _fmt(recs[0]["c"]), model, config.repetitions,
                        _fmt(np.mean([r["test_censoring"] for r in recs])),
                        _fmt(np.mean([v["c_index"] for v in vals])),
                        _fmt(np.mean([v["mae"] for v in vals])),
                        _fmt(np.mean([v["event_mae"] for v in vals])),
                    ]
                )

    cal_path = os.path.join(out_dir, "calibration_mean.csv")
    with open(cal_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "study", "grid_index", "grid_label", "model", "horizon_index",
                "horizon", "predicted_proportion", "observed_proportion",
            ]
        )
        for point in points:
            recs = [records[(point.index, rep)] for rep in range(config.repetitions)]
            for model in MODELS:
                curves = [r["models"][model]["calibration"] for r in recs]
                n_h = min(len(c["horizons"]) for c in curves)
                for j in range(n_h):
                    writer.writerow(
                        [
                            config.study, point.index, recs[0]["grid_label"], model, j,
                            _fmt(np.mean([c["horizons"][j] for c in curves])),
                            _fmt(np.mean([c["predicted_proportion"][j] for c in curves])),
                            _fmt(np.mean([c["observed_proportion"][j] for c in curves])),
                        ]
                    )
