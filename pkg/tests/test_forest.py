import numpy as np
import pytest

from emissionscope.errors import EmptyDataset, InvalidConfig
from emissionscope.models import (
    ForestConfig,
    TreeConfig,
    fit_forest,
    fit_tree,
    model_to_json,
    predict_forest,
)


def small_problem(seed=80, n=60, d=4):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = np.where(X[:, 0] > 0, 5.0, -5.0) + 0.2 * rng.normal(size=n)
    return X, y


class TestIdentities:
    def test_bootstrap_off_mtry_all_equals_single_tree(self):
        X, y = small_problem()
        tree_cfg = TreeConfig(min_leaf_size=2, min_parent_size=6)
        forest = fit_forest(X, y, ForestConfig(n_trees=7, tree=tree_cfg, bootstrap=False))
        single = fit_tree(X, y, tree_cfg)
        np.testing.assert_array_equal(forest.predict(X), single.predict(X))
        for tree in forest.trees:
            np.testing.assert_array_equal(tree.feature, single.feature)
            np.testing.assert_array_equal(tree.threshold, single.threshold)
            np.testing.assert_array_equal(tree.value, single.value)

    def test_prediction_is_mean_of_member_trees(self):
        X, y = small_problem(81)
        forest = fit_forest(X, y, ForestConfig(n_trees=10, seed=5,
                                               tree=TreeConfig(min_parent_size=5)))
        per_tree = np.stack([t.predict(X) for t in forest.trees])
        np.testing.assert_allclose(forest.predict(X), per_tree.mean(axis=0), atol=1e-12)

    def test_single_tree_forest_identity(self):
        X, y = small_problem(82)
        forest = fit_forest(X, y, ForestConfig(n_trees=1, seed=2,
                                               tree=TreeConfig(min_parent_size=5)))
        np.testing.assert_array_equal(
            forest.predict(X), forest.trees[0].predict(X)
        )

    def test_two_trees_average(self):
        X, y = small_problem(83)
        forest = fit_forest(X, y, ForestConfig(n_trees=2, seed=9,
                                               tree=TreeConfig(min_parent_size=5)))
        a = forest.trees[0].predict(X)
        b = forest.trees[1].predict(X)
        np.testing.assert_allclose(forest.predict(X), (a + b) / 2.0, atol=1e-12)


class TestDeterminism:
    def test_same_seed_identical_serialized_forest(self):
        X, y = small_problem(84)
        cfg = ForestConfig(n_trees=8, seed=123, tree=TreeConfig(min_parent_size=5))
        f1 = fit_forest(X, y, cfg)
        f2 = fit_forest(X, y, cfg)
        assert model_to_json(f1) == model_to_json(f2)

    def test_thread_count_does_not_change_bytes(self):
        X, y = small_problem(85)
        cfg = ForestConfig(n_trees=8, seed=77, tree=TreeConfig(min_parent_size=5))
        serial = model_to_json(fit_forest(X, y, cfg, n_threads=1))
        threaded = model_to_json(fit_forest(X, y, cfg, n_threads=4))
        assert serial == threaded

    def test_env_var_thread_cap_respected(self, monkeypatch):
        from emissionscope.models import resolve_threads

        monkeypatch.setenv("EMISSIONSCOPE_THREADS", "3")
        assert resolve_threads() == 3
        monkeypatch.setenv("EMISSIONSCOPE_THREADS", "bogus")
        assert resolve_threads() >= 1
        monkeypatch.delenv("EMISSIONSCOPE_THREADS")
        assert resolve_threads(2) == 2

    def test_different_seeds_differ(self):
        X, y = small_problem(86)
        f1 = fit_forest(X, y, ForestConfig(n_trees=5, seed=1,
                                           tree=TreeConfig(min_parent_size=5)))
        f2 = fit_forest(X, y, ForestConfig(n_trees=5, seed=2,
                                           tree=TreeConfig(min_parent_size=5)))
        assert model_to_json(f1) != model_to_json(f2)

    def test_mtry_deterministic(self):
        X, y = small_problem(87)
        cfg = ForestConfig(n_trees=6, seed=4, mtry=2,
                           tree=TreeConfig(min_parent_size=5))
        assert model_to_json(fit_forest(X, y, cfg)) == model_to_json(fit_forest(X, y, cfg))

    def test_mtry_too_large_rejected(self):
        X, y = small_problem(88)
        with pytest.raises(InvalidConfig):
            fit_forest(X, y, ForestConfig(n_trees=2, mtry=40))


class TestBehaviour:
    def test_headline_tree_counts_accepted(self):
        for n_trees in (150, 85, 90):
            ForestConfig(n_trees=n_trees)

    def test_duplicate_tree_moves_mean_toward_it(self):
        X, y = small_problem(89)
        forest = fit_forest(X, y, ForestConfig(n_trees=3, seed=6,
                                               tree=TreeConfig(min_parent_size=5)))
        probe = X[:5]
        base = forest.predict(probe)
        target = forest.trees[0].predict(probe)
        from emissionscope.models.forest import ForestModel

        bigger = ForestModel(trees=forest.trees + (forest.trees[0],), config=forest.config)
        moved = bigger.predict(probe)
        for b, m, t in zip(base, moved, target):
            assert abs(m - t) <= abs(b - t) + 1e-12

    def test_empty_dataset(self):
        with pytest.raises(EmptyDataset):
            fit_forest(np.empty((0, 2)), np.empty(0))

    def test_row_permutation_equivariance(self):
        X, y = small_problem(90)
        forest = fit_forest(X, y, ForestConfig(n_trees=4, seed=3,
                                               tree=TreeConfig(min_parent_size=5)))
        rng = np.random.default_rng(0)
        p = rng.permutation(X.shape[0])
        np.testing.assert_array_equal(
            predict_forest(forest, X)[p], predict_forest(forest, X[p])
        )
