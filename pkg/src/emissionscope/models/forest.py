"""Bagged ensemble of regression trees with a per-tree child RNG.

Tree ``i`` draws its bootstrap resample (and, when ``mtry`` limits the
per-split feature pool, its feature subsets) from an RNG seeded by
``(master seed, i)``, so the fitted forest is identical regardless of how
many worker threads fit it.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, EmptyDataset, InvalidConfig
from .tree import TreeConfig, TreeModel, _grow


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    tree: TreeConfig = field(default_factory=TreeConfig)
    bootstrap: bool = True
    mtry: int | None = None  # None -> all features (pure bagging)
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise InvalidConfig("n_trees must be >= 1")
        if self.mtry is not None and self.mtry < 1:
            raise InvalidConfig("mtry must be >= 1")


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[TreeModel, ...]
    config: ForestConfig

    @property
    def n_features(self) -> int:
        return self.trees[0].n_features

    def predict(self, X: np.ndarray) -> np.ndarray:
        # Running mean in fixed tree order: exact when members agree, and a
        # k-tree prefix reproduces the k-tree forest bit-for-bit.
        X = np.ascontiguousarray(X, dtype=np.float64)
        acc = np.zeros(X.shape[0], dtype=np.float64)
        for k, tree in enumerate(self.trees, start=1):
            acc += (tree.predict(X) - acc) / k
        return acc


def resolve_threads(requested: int | None = None) -> int:
    """Worker count: explicit request, else EMISSIONSCOPE_THREADS, else CPUs."""
    if requested is not None:
        return max(1, requested)
    env = os.environ.get("EMISSIONSCOPE_THREADS", "")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _fit_member(X, y, cfg: ForestConfig, index: int) -> TreeModel:
    rng = np.random.default_rng([cfg.seed, index])
    if cfg.bootstrap:
        n = X.shape[0]
        rows = rng.integers(0, n, size=n)
        Xi = np.ascontiguousarray(X[rows])
        yi = y[rows]
    else:
        Xi, yi = X, y
    mtry = cfg.mtry
    if mtry is not None and mtry >= X.shape[1]:
        mtry = None
    return _grow(Xi, yi, cfg.tree, rng=rng, mtry=mtry)


def fit_forest(
    X: np.ndarray,
    y: np.ndarray,
    cfg: ForestConfig | None = None,
    n_threads: int | None = None,
) -> ForestModel:
    """Fit the ensemble; results do not depend on the worker count."""
    cfg = cfg or ForestConfig()
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.shape[0] == 0:
        raise EmptyDataset("cannot fit a forest on zero rows")
    if y.shape[0] != X.shape[0]:
        raise DimensionMismatch(f"X {X.shape} does not match y {y.shape}")
    if cfg.mtry is not None and cfg.mtry > X.shape[1]:
        raise InvalidConfig(
            f"mtry={cfg.mtry} exceeds the {X.shape[1]} available features"
        )

    workers = min(resolve_threads(n_threads), cfg.n_trees)
    if workers <= 1:
        trees = [_fit_member(X, y, cfg, i) for i in range(cfg.n_trees)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trees = list(
                pool.map(lambda i: _fit_member(X, y, cfg, i), range(cfg.n_trees))
            )
    return ForestModel(trees=tuple(trees), config=cfg)


def predict_forest(model: ForestModel, X: np.ndarray) -> np.ndarray:
    return model.predict(X)
