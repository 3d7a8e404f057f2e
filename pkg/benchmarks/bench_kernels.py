"""Benchmark the numba kernels against the pure-numpy fallback.

Runs the split-search kernel, a single tree fit, and a small forest fit
under both backends and prints a timing table.  Usage:

    python benchmarks/bench_kernels.py [--rows 3500] [--cols 14] [--trees 20]
"""

import argparse
import time

import numpy as np

from emissionscope import _kernels
from emissionscope._kernels import numba_backend, numpy_backend
from emissionscope.models import ForestConfig, TreeConfig, fit_forest, fit_tree


def make_problem(rows, cols, seed=0):
    rng = np.random.default_rng(seed)
    X = np.ascontiguousarray(rng.normal(size=(rows, cols)))
    y = np.where(X[:, 0] > 0, 5.0, -5.0) + rng.normal(size=rows)
    S = np.empty((cols, rows), dtype=np.int64)
    for f in range(cols):
        S[f] = np.argsort(X[:, f], kind="stable")
    return X, y - y.mean(), S


def time_call(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_split(rows, cols):
    X, y_c, S = make_problem(rows, cols)
    feat_ids = np.arange(cols, dtype=np.int64)
    args = (X, y_c, S, feat_ids, 1, 1e-12)
    numba_backend.best_split(*args)  # JIT warmup
    results = {
        "numba": time_call(lambda: numba_backend.best_split(*args)),
        "numpy": time_call(lambda: numpy_backend.best_split(*args)),
    }
    sanity = numba_backend.best_split(*args) == numpy_backend.best_split(*args)
    return results, sanity


def bench_fit(rows, cols, trees):
    rng = np.random.default_rng(1)
    X = rng.normal(size=(rows, cols))
    y = np.where(X[:, 0] > 0, 5.0, -5.0) + rng.normal(size=rows)
    tree_cfg = TreeConfig(min_leaf_size=2, min_parent_size=10)
    forest_cfg = ForestConfig(n_trees=trees, tree=tree_cfg, seed=3)

    timings = {}
    originals = (_kernels.best_split, _kernels.tree_route)
    try:
        for name, backend in (("numba", numba_backend), ("numpy", numpy_backend)):
            _kernels.best_split = backend.best_split
            _kernels.tree_route = backend.tree_route
            fit_tree(X[:50], y[:50], TreeConfig(min_parent_size=5))  # warmup
            timings[name] = {
                "tree": time_call(lambda: fit_tree(X, y, tree_cfg), repeats=3),
                "forest": time_call(lambda: fit_forest(X, y, forest_cfg), repeats=1),
            }
    finally:
        _kernels.best_split, _kernels.tree_route = originals
    return timings


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=3500)
    parser.add_argument("--cols", type=int, default=14)
    parser.add_argument("--trees", type=int, default=20)
    args = parser.parse_args()

    print(f"problem: {args.rows} rows x {args.cols} features, {args.trees}-tree forest")
    split, sanity = bench_split(args.rows, args.cols)
    print(f"split kernels agree bitwise: {sanity}")
    print(f"{'workload':<14}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    print(f"{'best_split':<14}{split['numba'] * 1e3:>10.2f}ms"
          f"{split['numpy'] * 1e3:>10.2f}ms"
          f"{split['numpy'] / split['numba']:>9.1f}x")
    fits = bench_fit(args.rows, args.cols, args.trees)
    for work in ("tree", "forest"):
        nb = fits["numba"][work]
        npv = fits["numpy"][work]
        print(f"{'fit_' + work:<14}{nb * 1e3:>10.1f}ms{npv * 1e3:>10.1f}ms"
              f"{npv / nb:>9.1f}x")


if __name__ == "__main__":
    main()
