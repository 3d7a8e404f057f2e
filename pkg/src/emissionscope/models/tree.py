"""Greedy binary regression tree minimizing child sum-of-squared-errors.

Candidate thresholds are midpoints between consecutive distinct sorted
feature values.  A node splits only if it holds at least ``min_parent_size``
rows, both children would hold at least ``min_leaf_size`` rows, the global
split budget is not exhausted, and the best candidate strictly reduces SSE.
Ties break to the lower feature index, then the lower threshold.  Rows
route left when the feature value is strictly below the threshold.

The split budget is consumed in depth-first, left-child-first node order,
which fixes the tree uniquely for a given dataset and config.  Each feature
is stable-sorted once per fit; partitions filter the sorted row lists, so
no per-node sorting happens.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from ..errors import DimensionMismatch, EmptyDataset, InvalidConfig


@dataclass(frozen=True)
class TreeConfig:
    """Growth controls; ``max_splits=None`` means n_train - 1 at fit time."""

    max_splits: int | None = None
    min_leaf_size: int = 1
    min_parent_size: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.min_leaf_size < 1:
            raise InvalidConfig("min_leaf_size must be >= 1")
        if self.min_parent_size < 2:
            raise InvalidConfig("min_parent_size must be >= 2")
        if self.max_splits is not None and self.max_splits < 0:
            raise InvalidConfig("max_splits must be >= 0")


@dataclass(frozen=True)
class TreeModel:
    """Fitted tree as flat preorder arrays (feature < 0 marks a leaf)."""

    n_features: int
    feature: np.ndarray    # (k,) int64, split feature or -1
    threshold: np.ndarray  # (k,) float64
    left: np.ndarray       # (k,) int64 child index, -1 at leaves
    right: np.ndarray      # (k,) int64
    value: np.ndarray      # (k,) float64 leaf mean (0 at split nodes)
    count: np.ndarray      # (k,) int64 training rows reaching the node
    config: TreeConfig = field(default_factory=TreeConfig)

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def n_splits(self) -> int:
        return int(np.sum(self.feature >= 0))

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"expected {self.n_features} feature columns, got shape {X.shape}"
            )
        leaves = _kernels.tree_route(
            self.feature, self.threshold, self.left, self.right, X
        )
        return self.value[leaves]


class _Builder:
    def __init__(self, X, y, cfg: TreeConfig, max_splits: int, rng, mtry):
        self.X = X
        self.y = y
        self.cfg = cfg
        self.max_splits = max_splits
        self.rng = rng
        self.mtry = mtry
        self.n_features = X.shape[1]
        self.y_scratch = np.empty_like(y)
        self.in_left = np.zeros(y.shape[0], dtype=bool)
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []
        self.count: list[int] = []
        self.splits_used = 0

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        self.count.append(0)
        return len(self.feature) - 1

    def _candidate_features(self) -> np.ndarray:
        if self.mtry is None or self.mtry >= self.n_features:
            return np.arange(self.n_features, dtype=np.int64)
        chosen = self.rng.choice(self.n_features, size=self.mtry, replace=False)
        return np.sort(chosen).astype(np.int64)

    def _root_order(self) -> np.ndarray:
        n = self.X.shape[0]
        S = np.empty((max(self.n_features, 1), n), dtype=np.int64)
        if self.n_features == 0:
            S[0] = np.arange(n)
        for f in range(self.n_features):
            S[f] = np.argsort(self.X[:, f], kind="stable")
        return S

    def build(self) -> None:
        root = self._new_node()
        # Depth-first, left-first; recursion would overflow on deep trees.
        stack = [(root, self._root_order())]
        while stack:
            node, S = stack.pop()
            rows = S[0]
            y_node = self.y[rows]
            mean = float(np.add.reduce(y_node)) / rows.shape[0]
            self.count[node] = rows.shape[0]
            self.value[node] = mean

            split = self._try_split(S, rows, y_node, mean)
            if split is None:
                continue
            feat, pos, thr = split
            self.feature[node] = feat
            self.threshold[node] = thr
            self.value[node] = 0.0
            left = self._new_node()
            right = self._new_node()
            self.left[node] = left
            self.right[node] = right
            self.splits_used += 1

            left_rows = S[feat, : pos + 1]
            self.in_left[left_rows] = True
            go_left = self.in_left[S]
            S_left = S[go_left].reshape(S.shape[0], pos + 1)
            S_right = S[~go_left].reshape(S.shape[0], rows.shape[0] - pos - 1)
            self.in_left[left_rows] = False
            # Push right first so the left subtree is grown first.
            stack.append((right, S_right))
            stack.append((left, S_left))

    def _try_split(self, S, rows, y_node, mean):
        n = rows.shape[0]
        cfg = self.cfg
        if self.n_features == 0:
            return None
        if n < cfg.min_parent_size or n < 2 * cfg.min_leaf_size:
            return None
        if self.splits_used >= self.max_splits:
            return None
        if np.all(y_node == y_node[0]):
            return None

        y_c = y_node - mean
        lin = float(np.add.reduce(y_c))
        sq = float(np.add.reduce(y_c * y_c))
        parent_sse = max(0.0, sq - lin * lin / n)
        if parent_sse <= 0.0:
            return None

        self.y_scratch[rows] = y_c
        feat_ids = self._candidate_features()
        tie_eps = 1e-10 * parent_sse
        feat, pos, thr, score = _kernels.best_split(
            self.X, self.y_scratch, S, feat_ids, cfg.min_leaf_size, tie_eps
        )
        if feat < 0 or not score < parent_sse:
            return None
        return int(feat), int(pos), float(thr)


def _grow(X, y, cfg: TreeConfig, rng, mtry) -> TreeModel:
    n = X.shape[0]
    if n == 0:
        raise EmptyDataset("cannot fit a tree on zero rows")
    max_splits = cfg.max_splits if cfg.max_splits is not None else max(0, n - 1)
    b = _Builder(X, y, cfg, max_splits, rng, mtry)
    b.build()
    return TreeModel(
        n_features=X.shape[1],
        feature=np.asarray(b.feature, dtype=np.int64),
        threshold=np.asarray(b.threshold, dtype=np.float64),
        left=np.asarray(b.left, dtype=np.int64),
        right=np.asarray(b.right, dtype=np.int64),
        value=np.asarray(b.value, dtype=np.float64),
        count=np.asarray(b.count, dtype=np.int64),
        config=cfg,
    )


def fit_tree(X: np.ndarray, y: np.ndarray, cfg: TreeConfig | None = None) -> TreeModel:
    """Fit one regression tree on the full feature set."""
    cfg = cfg or TreeConfig()
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or y.shape[0] != X.shape[0]:
        raise DimensionMismatch(f"X {X.shape} does not match y {y.shape}")
    return _grow(X, y, cfg, rng=None, mtry=None)


def predict_tree(model: TreeModel, X: np.ndarray) -> np.ndarray:
    return model.predict(X)
