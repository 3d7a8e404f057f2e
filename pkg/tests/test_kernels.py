"""Backend parity: the numba kernels and the numpy fallback must produce
bit-identical splits, trees, and routed predictions."""

import os
import subprocess
import sys

import numpy as np
import pytest

from emissionscope import _kernels
from emissionscope._kernels import numba_backend, numpy_backend
from emissionscope.models import ForestConfig, TreeConfig, fit_forest, fit_tree, model_to_json


def random_split_problem(rng, n, d, duplicates=False):
    X = rng.normal(size=(n, d))
    if duplicates:
        X[:, 0] = np.round(X[:, 0])  # force tied feature values
    y = rng.normal(size=n)
    S = np.empty((d, n), dtype=np.int64)
    for f in range(d):
        S[f] = np.argsort(X[:, f], kind="stable")
    y_c = y - y.mean()
    return np.ascontiguousarray(X), y_c, S


class TestBestSplitParity:
    @pytest.mark.parametrize("duplicates", [False, True])
    def test_identical_choices(self, duplicates):
        rng = np.random.default_rng(900)
        for _ in range(100):
            n = int(rng.integers(2, 60))
            d = int(rng.integers(1, 6))
            X, y_c, S = random_split_problem(rng, n, d, duplicates)
            feat_ids = np.arange(d, dtype=np.int64)
            min_leaf = int(rng.integers(1, 4))
            a = numba_backend.best_split(X, y_c, S, feat_ids, min_leaf, 1e-12)
            b = numpy_backend.best_split(X, y_c, S, feat_ids, min_leaf, 1e-12)
            assert a[0] == b[0]
            assert a[1] == b[1]
            assert a[2] == b[2]  # threshold bitwise equal
            assert a[3] == b[3]  # score bitwise equal

    def test_feature_subset_respected(self):
        rng = np.random.default_rng(901)
        X, y_c, S = random_split_problem(rng, 30, 4)
        subset = np.array([1, 3], dtype=np.int64)
        a = numba_backend.best_split(X, y_c, S, subset, 1, 0.0)
        b = numpy_backend.best_split(X, y_c, S, subset, 1, 0.0)
        assert a == b
        assert a[0] in (-1, 1, 3)


class TestRouteParity:
    def test_identical_leaves(self):
        rng = np.random.default_rng(902)
        X = rng.normal(size=(200, 3))
        y = np.sin(X[:, 0]) + rng.normal(size=200) * 0.1
        model = fit_tree(X, y, TreeConfig(min_leaf_size=2, min_parent_size=5))
        probes = rng.normal(size=(500, 3))
        a = numba_backend.tree_route(
            model.feature, model.threshold, model.left, model.right, probes
        )
        b = numpy_backend.tree_route(
            model.feature, model.threshold, model.left, model.right, probes
        )
        np.testing.assert_array_equal(a, b)


class TestFittedModelParity:
    def test_trees_and_forests_identical_across_backends(self, monkeypatch):
        rng = np.random.default_rng(903)
        X = rng.normal(size=(120, 5))
        y = np.where(X[:, 1] > 0, 3.0, -1.0) + 0.3 * rng.normal(size=120)

        results = {}
        for name, backend in (("numba", numba_backend), ("numpy", numpy_backend)):
            monkeypatch.setattr(_kernels, "best_split", backend.best_split)
            monkeypatch.setattr(_kernels, "tree_route", backend.tree_route)
            tree = fit_tree(X, y, TreeConfig(min_leaf_size=2, min_parent_size=6))
            forest = fit_forest(
                X, y, ForestConfig(n_trees=6, seed=42, tree=TreeConfig(min_parent_size=6))
            )
            results[name] = (model_to_json(tree), model_to_json(forest))
        assert results["numba"][0] == results["numpy"][0]
        assert results["numba"][1] == results["numpy"][1]


class TestBackendSelection:
    def test_default_is_numba(self):
        assert _kernels.backend_name() in ("numba", "numpy")

    def test_env_flag_forces_numpy(self):
        env = dict(os.environ, EMISSIONSCOPE_NO_NUMBA="1")
        out = subprocess.run(
            [sys.executable, "-c",
             "from emissionscope import _kernels; print(_kernels.backend_name())"],
            capture_output=True, text=True, env=env, check=True,
        )
        assert out.stdout.strip() == "numpy"

    def test_flag_zero_keeps_default(self):
        env = dict(os.environ, EMISSIONSCOPE_NO_NUMBA="0")
        out = subprocess.run(
            [sys.executable, "-c",
             "from emissionscope import _kernels; print(_kernels.backend_name())"],
            capture_output=True, text=True, env=env, check=True,
        )
        assert out.stdout.strip() == "numba"
