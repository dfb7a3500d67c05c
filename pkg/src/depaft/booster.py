"""Second-order gradient-boosted regression trees.

Exact greedy split search over sorted unique feature values with midpoint
thresholds.  Each tree is grown on per-observation gradient/Hessian
statistics; node gain is

    1/2 [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - (G_L+G_R)^2/(H_L+H_R+lambda)] - gamma

and leaf weights are -G/(H+lambda).  Shrinkage scales leaf contributions
at prediction time.  Training is single-threaded and fully deterministic:
ties between equal-gain splits break toward the lowest feature index and
then the lowest threshold.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dataset import SurvivalDataset
from .errors import ConfigError, DataError, NumericError, PersistenceError
from .loss import loss_from_config

FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    rounds: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    reg_lambda: float = 1.0  # L2 on leaf weights ("lambda" in config files)
    gamma: float = 0.0  # per-leaf penalty
    min_child_weight: float = 0.0  # minimum Hessian sum per child
    base_score: float | str = "auto"
    seed: int = 0

    def __post_init__(self):
        if not (isinstance(self.rounds, int) and self.rounds >= 1):
            raise ConfigError(f"rounds must be a positive integer, got {self.rounds}")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ConfigError("learning_rate must lie in (0, 1]")
        if not (isinstance(self.max_depth, int) and self.max_depth >= 1):
            raise ConfigError("max_depth must be a positive integer")
        if self.reg_lambda < 0 or self.gamma < 0 or self.min_child_weight < 0:
            raise ConfigError("lambda, gamma, min_child_weight must be >= 0")
        if self.base_score != "auto" and not np.isfinite(self.base_score):
            raise ConfigError("base_score must be finite or 'auto'")

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "learning_rate": self.learning_rate,
            "max_depth": self.max_depth,
            "lambda": self.reg_lambda,
            "gamma": self.gamma,
            "min_child_weight": self.min_child_weight,
            "base_score": self.base_score,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {
            "rounds", "learning_rate", "max_depth", "lambda", "gamma",
            "min_child_weight", "base_score", "seed",
        }
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown train config fields: {sorted(extra)}")
        kwargs = dict(d)
        if "lambda" in kwargs:
            kwargs["reg_lambda"] = kwargs.pop("lambda")
        return cls(**kwargs)


class RegressionTree:
    """Array-of-nodes binary tree.  feature[i] == -1 marks a leaf."""

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=float)

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Raw (unshrunk) leaf weight for every row of X."""
        idx = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            at_leaf = self.feature[idx] < 0
            if np.all(at_leaf):
                break
            feat = np.where(at_leaf, 0, self.feature[idx])
            go_left = X[np.arange(X.shape[0]), feat] < self.threshold[idx]
            nxt = np.where(go_left, self.left[idx], self.right[idx])
            idx = np.where(at_leaf, idx, nxt)
        return self.value[idx]

    def depth(self) -> int:
        def walk(i):
            if self.feature[i] < 0:
                return 0
            return 1 + max(walk(self.left[i]), walk(self.right[i]))

        return walk(0)


@dataclass
class TreeEnsemble:
    """Additive model on the log-time scale: h(x) = base + lr * sum trees."""

    base_score: float
    learning_rate: float
    n_features: int
    loss_config: dict
    trees: list[RegressionTree] = field(default_factory=list)
    train_loss_history: list[float] = field(default_factory=list, repr=False)

    def predict(self, X, num_trees: int | None = None) -> np.ndarray:
        """Predicted log event time per row."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DataError(
                f"feature matrix must have shape (n, {self.n_features}), got {X.shape}"
            )
        out = np.full(X.shape[0], self.base_score)
        use = self.trees if num_trees is None else self.trees[:num_trees]
        for tree in use:
            out += self.learning_rate * tree.predict(X)
        return out

    def predict_time(self, X, num_trees: int | None = None) -> np.ndarray:
        """Predicted event time per row (exp of the log-scale prediction)."""
        return np.exp(self.predict(X, num_trees=num_trees))

    @property
    def n_rounds(self) -> int:
        return len(self.trees)


def _best_split(X, g, h, rows, cfg: TrainConfig):
    """Best (feature, threshold, gain) over a node, or None.

    Scans features in index order and thresholds ascending; a candidate
    replaces the incumbent only on strictly larger gain, which realizes
    the lowest-feature-then-lowest-threshold tie-break.
    """
    g_total = g[rows].sum()
    h_total = h[rows].sum()
    lam = cfg.reg_lambda
    parent_score = g_total * g_total / (h_total + lam)
    best = None  # (gain, feature, threshold)
    for f in range(X.shape[1]):
        xs = X[rows, f]
        order = np.argsort(xs, kind="stable")
        xs_sorted = xs[order]
        if xs_sorted[0] == xs_sorted[-1]:
            continue
        gl = np.cumsum(g[rows][order])[:-1]
        hl = np.cumsum(h[rows][order])[:-1]
        gr = g_total - gl
        hr = h_total - hl
        mid = 0.5 * (xs_sorted[:-1] + xs_sorted[1:])
        # valid cut: between distinct values, midpoint strictly above the
        # left value (guards against rounding collapsing the cut), and
        # both children above the Hessian-mass floor
        valid = (
            (xs_sorted[:-1] < xs_sorted[1:])
            & (mid > xs_sorted[:-1])
            & (hl >= cfg.min_child_weight)
            & (hr >= cfg.min_child_weight)
        )
        if not np.any(valid):
            continue
        gains = np.full(mid.shape, -np.inf)
        gains[valid] = 0.5 * (
            gl[valid] ** 2 / (hl[valid] + lam)
            + gr[valid] ** 2 / (hr[valid] + lam)
            - parent_score
        ) - cfg.gamma
        k = int(np.argmax(gains))  # first max -> lowest threshold
        if best is None or gains[k] > best[0]:
            best = (float(gains[k]), f, float(mid[k]))
    return best


def _grow_tree(X, g, h, cfg: TrainConfig):
    """Grow one tree; returns (tree, leaf_index_per_row)."""
    n = X.shape[0]
    feature, threshold, left, right, value = [], [], [], [], []
    row_leaf = np.empty(n, dtype=np.int64)

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    lam = cfg.reg_lambda
    stack = [(new_node(), np.arange(n), 0)]
    while stack:
        node, rows, depth = stack.pop()
        split = _best_split(X, g, h, rows, cfg) if depth < cfg.max_depth else None
        if split is not None and split[0] > 0.0:
            _, f, thr = split
            go_left = X[rows, f] < thr
            feature[node] = f
            threshold[node] = thr
            left[node] = new_node()
            right[node] = new_node()
            # push right first so nodes are numbered in left-first order
            stack.append((right[node], rows[~go_left], depth + 1))
            stack.append((left[node], rows[go_left], depth + 1))
        else:
            w = -g[rows].sum() / (h[rows].sum() + lam)
            value[node] = float(w)
            row_leaf[rows] = node
    return RegressionTree(feature, threshold, left, right, value), row_leaf


def train(data: SurvivalDataset, loss, config: TrainConfig) -> TreeEnsemble:
    """Fit a boosted ensemble by iterating loss -> statistics -> tree.

    base_score "auto" initializes at the mean log observed time.  Raises
    NumericError naming the round and row if the loss produces a
    non-finite statistic.
    """
    X, t, delta = data.X, data.times, data.events
    if X.shape[1] == 0:
        raise ConfigError("training requires at least one feature")
    base = float(np.mean(np.log(t))) if config.base_score == "auto" else float(config.base_score)
    model = TreeEnsemble(
        base_score=base,
        learning_rate=config.learning_rate,
        n_features=X.shape[1],
        loss_config=loss.to_config(),
    )
    pred = np.full(data.n, base)
    for k in range(config.rounds):
        g, h = loss.grad_hess(t, delta, pred)
        bad = ~(np.isfinite(g) & np.isfinite(h))
        if np.any(bad):
            row = int(np.argmax(bad))
            raise NumericError(f"non-finite gradient statistic at round {k}, row {row}")
        tree, row_leaf = _grow_tree(X, g, h, config)
        model.trees.append(tree)
        pred += config.learning_rate * tree.value[row_leaf]
        model.train_loss_history.append(float(np.mean(loss.loss(t, delta, pred))))
    return model


# -- persistence ---------------------------------------------------------
#
# Model files are JSON with floats printed at 17 significant digits, which
# round-trips float64 exactly and keeps the bytes deterministic.


def _emit(obj, out: list) -> None:
    if isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(",")
            out.append(json.dumps(k))
            out.append(":")
            _emit(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _emit(v, out)
        out.append("]")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        if not np.isfinite(obj):
            raise NumericError("cannot serialize non-finite number")
        out.append(format(float(obj), ".17g"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif obj is None:
        out.append("null")
    else:
        raise TypeError(f"unserializable value of type {type(obj)!r}")


def _tree_to_nodes(tree: RegressionTree) -> list[dict]:
    nodes = []
    for i in range(tree.n_nodes):
        if tree.feature[i] < 0:
            nodes.append({"id": i, "weight": float(tree.value[i])})
        else:
            nodes.append(
                {
                    "id": i,
                    "split_feature": int(tree.feature[i]),
                    "threshold": float(tree.threshold[i]),
                    "left": int(tree.left[i]),
                    "right": int(tree.right[i]),
                    "default_direction": "left",
                }
            )
    return nodes


def save(model: TreeEnsemble, path) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "base_score": model.base_score,
        "learning_rate": model.learning_rate,
        "n_features": model.n_features,
        "loss": model.loss_config,
        "trees": [{"nodes": _tree_to_nodes(t)} for t in model.trees],
    }
    pieces: list[str] = []
    _emit(doc, pieces)
    with open(path, "w") as fh:
        fh.write("".join(pieces))
        fh.write("\n")


def _nodes_to_tree(nodes: list[dict]) -> RegressionTree:
    n = len(nodes)
    feature = np.full(n, -1, dtype=np.int64)
    threshold = np.zeros(n)
    left = np.full(n, -1, dtype=np.int64)
    right = np.full(n, -1, dtype=np.int64)
    value = np.zeros(n)
    for node in nodes:
        try:
            i = int(node["id"])
        except (KeyError, TypeError) as exc:
            raise PersistenceError("tree node missing field 'id'") from exc
        if not 0 <= i < n:
            raise PersistenceError(f"tree node id {i} out of range")
        if "weight" in node:
            value[i] = float(node["weight"])
            if not np.isfinite(value[i]):
                raise PersistenceError(f"leaf {i}: field 'weight' must be finite")
        else:
            try:
                feature[i] = int(node["split_feature"])
                threshold[i] = float(node["threshold"])
                left[i] = int(node["left"])
                right[i] = int(node["right"])
            except KeyError as exc:
                raise PersistenceError(f"internal node {i} missing field {exc}") from exc
            if feature[i] < 0:
                raise PersistenceError(f"node {i}: field 'split_feature' must be >= 0")
            if not (0 <= left[i] < n and 0 <= right[i] < n):
                raise PersistenceError(f"node {i}: child index out of range")
    return RegressionTree(feature, threshold, left, right, value)


def load(path) -> TreeEnsemble:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise PersistenceError(f"{path}: malformed model file: {exc}") from exc
    if not isinstance(doc, dict):
        raise PersistenceError(f"{path}: model file must hold a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise PersistenceError(
            f"{path}: field 'format_version' is {version!r}, expected {FORMAT_VERSION}"
        )
    for key in ("base_score", "learning_rate", "n_features", "loss", "trees"):
        if key not in doc:
            raise PersistenceError(f"{path}: missing field {key!r}")
    loss_config = doc["loss"]
    loss_from_config(loss_config)  # validates, including "unknown loss"
    model = TreeEnsemble(
        base_score=float(doc["base_score"]),
        learning_rate=float(doc["learning_rate"]),
        n_features=int(doc["n_features"]),
        loss_config=loss_config,
        trees=[_nodes_to_tree(t["nodes"]) for t in doc["trees"]],
    )
    return model
