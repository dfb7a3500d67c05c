"""K-fold grid-search cross-validation for the boosted models.

The search maximizes mean validation concordance across folds.  Round
counts are searched by training once per fold to the maximum and scoring
checkpoints along the way; an optional theta grid multiplies the search
for the Clayton loss.  The winning configuration is refit on all data.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .booster import TrainConfig, TreeEnsemble, train
from .dataset import SurvivalDataset
from .errors import ConfigError
from .loss import loss_from_config
from .metrics import concordance


@dataclass(frozen=True)
class CvConfig:
    folds: int = 2
    max_rounds: int = 500
    checkpoint_stride: int = 50
    theta_grid: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if not (isinstance(self.folds, int) and self.folds >= 2):
            raise ConfigError("folds must be an integer >= 2")
        if not (isinstance(self.max_rounds, int) and self.max_rounds >= 1):
            raise ConfigError("max_rounds must be a positive integer")
        if not (isinstance(self.checkpoint_stride, int) and self.checkpoint_stride >= 1):
            raise ConfigError("checkpoint_stride must be a positive integer")
        if self.theta_grid is not None and len(self.theta_grid) == 0:
            raise ConfigError("theta_grid must be non-empty when given")

    def to_dict(self) -> dict:
        out = {
            "folds": self.folds,
            "max_rounds": self.max_rounds,
            "checkpoint_stride": self.checkpoint_stride,
            "seed": self.seed,
        }
        if self.theta_grid is not None:
            out["theta_grid"] = list(self.theta_grid)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "CvConfig":
        known = {"folds", "max_rounds", "checkpoint_stride", "theta_grid", "seed"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown cv config fields: {sorted(extra)}")
        grid = d.get("theta_grid")
        return cls(
            folds=int(d.get("folds", 2)),
            max_rounds=int(d.get("max_rounds", 500)),
            checkpoint_stride=int(d.get("checkpoint_stride", 50)),
            theta_grid=None if grid is None else tuple(float(x) for x in grid),
            seed=int(d.get("seed", 0)),
        )


def checkpoint_schedule(max_rounds: int, stride: int) -> list[int]:
    """Stride multiples up to max_rounds, always including max_rounds."""
    points = list(range(stride, max_rounds + 1, stride))
    if not points or points[-1] != max_rounds:
        points.append(max_rounds)
    return points


def stratified_folds(events, folds: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Seeded k-fold split stratified on the event indicator."""
    events = np.asarray(events)
    n = events.shape[0]
    if folds > n:
        raise ConfigError(f"cannot make {folds} folds from {n} rows")
    assignment = [[] for _ in range(folds)]
    for cls in (1, 0):
        idx = np.flatnonzero(events == cls)
        idx = idx[rng.permutation(idx.shape[0])]
        for j, row in enumerate(idx):
            assignment[j % folds].append(row)
    out = [np.sort(np.asarray(a, dtype=np.int64)) for a in assignment]
    if any(a.shape[0] == 0 for a in out):
        raise ConfigError("fold larger than data: some fold is empty")
    return out


def _checkpoint_scores(model: TreeEnsemble, val: SurvivalDataset, checkpoints) -> list[float]:
    """Validation c-index at each round checkpoint, one tree pass total."""
    pred = np.full(val.n, model.base_score)
    scores = []
    next_i = 0
    for k, tree in enumerate(model.trees, start=1):
        pred += model.learning_rate * tree.predict(val.X)
        if next_i < len(checkpoints) and k == checkpoints[next_i]:
            scores.append(concordance(val.times, val.events, np.exp(pred)))
            next_i += 1
    return scores


def grid_search(
    data: SurvivalDataset,
    loss_config: dict,
    train_config: TrainConfig,
    cv: CvConfig,
) -> tuple[dict, TreeEnsemble]:
    """Run the search and refit the best point on all rows.

    Returns (result, refit_model); result records per-point fold scores.
    Ties break toward fewer rounds, then smaller theta.
    """
    if cv.theta_grid is not None and loss_config.get("loss") != "clayton":
        raise ConfigError("theta_grid applies only to the clayton loss")
    rng = np.random.default_rng(cv.seed)
    folds = stratified_folds(data.events, cv.folds, rng)
    checkpoints = checkpoint_schedule(cv.max_rounds, cv.checkpoint_stride)
    thetas = list(cv.theta_grid) if cv.theta_grid is not None else [None]

    points = []
    best = None  # (score, rounds, theta_key, point_dict)
    for theta in thetas:
        cfg = dict(loss_config)
        if theta is not None:
            cfg["theta"] = theta
        loss = loss_from_config(cfg)
        fold_scores = np.zeros((cv.folds, len(checkpoints)))
        for i, val_idx in enumerate(folds):
            train_idx = np.sort(
                np.concatenate([f for j, f in enumerate(folds) if j != i])
            )
            sub_cfg = TrainConfig(
                rounds=cv.max_rounds,
                learning_rate=train_config.learning_rate,
                max_depth=train_config.max_depth,
                reg_lambda=train_config.reg_lambda,
                gamma=train_config.gamma,
                min_child_weight=train_config.min_child_weight,
                base_score=train_config.base_score,
                seed=train_config.seed,
            )
            model = train(data.subset(train_idx), loss, sub_cfg)
            fold_scores[i] = _checkpoint_scores(model, data.subset(val_idx), checkpoints)
        means = fold_scores.mean(axis=0)
        for j, rounds in enumerate(checkpoints):
            point = {
                "theta": theta,
                "rounds": rounds,
                "fold_scores": [float(x) for x in fold_scores[:, j]],
                "mean_score": float(means[j]),
            }
            points.append(point)
            key = (
                -point["mean_score"],
                rounds,
                theta if theta is not None else 0.0,
            )
            if best is None or key < best[0]:
                best = (key, point)

    best_point = best[1]
    refit_cfg = dict(loss_config)
    if best_point["theta"] is not None:
        refit_cfg["theta"] = best_point["theta"]
    final_train_cfg = TrainConfig(
        rounds=best_point["rounds"],
        learning_rate=train_config.learning_rate,
        max_depth=train_config.max_depth,
        reg_lambda=train_config.reg_lambda,
        gamma=train_config.gamma,
        min_child_weight=train_config.min_child_weight,
        base_score=train_config.base_score,
        seed=train_config.seed,
    )
    refit = train(data, loss_from_config(refit_cfg), final_train_cfg)
    result = {
        "folds": cv.folds,
        "checkpoints": checkpoints,
        "selection_metric": "c_index",
        "points": points,
        "best": {
            "theta": best_point["theta"],
            "rounds": best_point["rounds"],
            "mean_score": best_point["mean_score"],
        },
    }
    return result, refit
