import numpy as np
import pytest

from emissionscope.errors import DimensionMismatch, InvalidConfig
from emissionscope.models import MlpConfig, fit_mlp, mlp_gradient, mlp_loss
from emissionscope.models.mlp import _init_params


def finite_diff_grads(model, X, y, eps=1e-5):
    """Central-difference oracle over every weight and bias."""
    grads_w, grads_b = [], []
    for W in model.weights:
        g = np.zeros_like(W)
        for idx in np.ndindex(W.shape):
            old = W[idx]
            W[idx] = old + eps
            up = mlp_loss(model, X, y)
            W[idx] = old - eps
            down = mlp_loss(model, X, y)
            W[idx] = old
            g[idx] = (up - down) / (2 * eps)
        grads_w.append(g)
    for b in model.biases:
        g = np.zeros_like(b)
        for idx in np.ndindex(b.shape):
            old = b[idx]
            b[idx] = old + eps
            up = mlp_loss(model, X, y)
            b[idx] = old - eps
            down = mlp_loss(model, X, y)
            b[idx] = old
            g[idx] = (up - down) / (2 * eps)
        grads_b.append(g)
    return grads_w, grads_b


def assert_grads_close(analytic, numeric, rel=1e-4):
    for a, f in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(f)), 1e-6)
        assert np.max(np.abs(a - f) / denom) < rel


class TestConfig:
    def test_rejects_bad_values(self):
        with pytest.raises(InvalidConfig):
            MlpConfig(hidden_layers=(0,))
        with pytest.raises(InvalidConfig):
            MlpConfig(learning_rate=0.0)
        with pytest.raises(InvalidConfig):
            MlpConfig(epochs=-1)


class TestFitMlp:
    def test_zero_epochs_equals_seeded_init(self):
        rng = np.random.default_rng(60)
        X = rng.normal(size=(10, 3))
        y = rng.normal(size=10)
        cfg = MlpConfig(hidden_layers=(4,), epochs=0, seed=9)
        model = fit_mlp(X, y, cfg)
        weights, biases = _init_params(3, cfg)
        for got, want in zip(model.weights, weights):
            np.testing.assert_array_equal(got, want)
        for got, want in zip(model.biases, biases):
            np.testing.assert_array_equal(got, want)

    def test_three_hidden_layer_architecture_shapes(self):
        rng = np.random.default_rng(61)
        X = rng.normal(size=(5, 14))
        y = rng.normal(size=5)
        model = fit_mlp(X, y, MlpConfig(hidden_layers=(100, 90, 80), epochs=0))
        shapes = [w.shape for w in model.weights]
        assert shapes == [(14, 100), (100, 90), (90, 80), (80, 1)]
        assert model.weights[-1].shape[1] == 1

    def test_training_reduces_mse_on_linear_toy(self):
        # oracle: run the training loop itself and compare first/last loss
        rng = np.random.default_rng(62)
        X = rng.uniform(-1, 1, size=(20, 2))
        y = 3.0 * X[:, 0]
        cfg = MlpConfig(hidden_layers=(8,), epochs=2000, learning_rate=0.01, seed=3)
        initial = fit_mlp(X, y, MlpConfig(hidden_layers=(8,), epochs=0, seed=3))
        trained = fit_mlp(X, y, cfg)
        assert mlp_loss(trained, X, y) < mlp_loss(initial, X, y)

    def test_lr_zero_equivalent_via_epochs_zero(self):
        # learning_rate must be > 0; epochs=0 is the no-op training control
        rng = np.random.default_rng(63)
        X = rng.normal(size=(6, 2))
        y = rng.normal(size=6)
        a = fit_mlp(X, y, MlpConfig(hidden_layers=(3,), epochs=0, seed=1))
        b = fit_mlp(X, y, MlpConfig(hidden_layers=(3,), epochs=0, seed=1))
        for wa, wb in zip(a.weights, b.weights):
            np.testing.assert_array_equal(wa, wb)

    def test_normalization_maps_constant_columns_to_zero(self):
        X = np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
        model = fit_mlp(X, np.array([1.0, 2.0, 3.0]), MlpConfig(hidden_layers=(2,), epochs=0))
        normed = model.normalize(X)
        np.testing.assert_array_equal(normed[:, 1], [0.0, 0.0, 0.0])
        np.testing.assert_allclose(normed[:, 0], [0.0, 0.5, 1.0])


class TestGradient:
    def test_zero_net_zero_target_gives_zero_output_gradients(self):
        rng = np.random.default_rng(64)
        X = rng.normal(size=(1, 2))
        model = fit_mlp(X, np.zeros(1), MlpConfig(hidden_layers=(3,), epochs=0, seed=0))
        for w in model.weights:
            w[:] = 0.0
        grads_w, grads_b = mlp_gradient(model, X, np.zeros(1))
        np.testing.assert_array_equal(grads_w[-1], np.zeros_like(grads_w[-1]))
        np.testing.assert_array_equal(grads_b[-1], np.zeros_like(grads_b[-1]))

    def test_matches_finite_differences_small_net(self):
        rng = np.random.default_rng(65)
        X = rng.normal(size=(4, 2))
        y = rng.normal(size=4)
        model = fit_mlp(X, y, MlpConfig(hidden_layers=(3,), epochs=0, seed=5))
        analytic_w, analytic_b = mlp_gradient(model, X, y)
        numeric_w, numeric_b = finite_diff_grads(model, X, y)
        assert_grads_close(analytic_w, numeric_w)
        assert_grads_close(analytic_b, numeric_b)

    def test_duplicated_batch_same_gradient(self):
        rng = np.random.default_rng(66)
        X = rng.normal(size=(4, 3))
        y = rng.normal(size=4)
        model = fit_mlp(X, y, MlpConfig(hidden_layers=(4, 2), epochs=0, seed=2))
        gw1, gb1 = mlp_gradient(model, X, y)
        gw2, gb2 = mlp_gradient(model, np.vstack([X, X]), np.concatenate([y, y]))
        for a, b in zip(gw1, gw2):
            np.testing.assert_allclose(a, b, rtol=1e-12)
        for a, b in zip(gb1, gb2):
            np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_dimension_mismatch(self):
        rng = np.random.default_rng(67)
        X = rng.normal(size=(3, 2))
        model = fit_mlp(X, np.zeros(3), MlpConfig(hidden_layers=(2,), epochs=0))
        with pytest.raises(DimensionMismatch):
            mlp_gradient(model, rng.normal(size=(3, 5)), np.zeros(3))


class TestPredict:
    def test_zero_weights_constant_bias(self):
        rng = np.random.default_rng(68)
        X = rng.normal(size=(5, 2))
        model = fit_mlp(X, np.zeros(5), MlpConfig(hidden_layers=(3,), epochs=0))
        for w in model.weights:
            w[:] = 0.0
        model.biases[-1][:] = 2.5
        np.testing.assert_allclose(model.predict(X), np.full(5, 2.5))

    def test_repeated_calls_identical(self):
        rng = np.random.default_rng(69)
        X = rng.normal(size=(8, 3))
        y = rng.normal(size=8)
        model = fit_mlp(X, y, MlpConfig(hidden_layers=(4,), epochs=50, seed=1))
        np.testing.assert_array_equal(model.predict(X), model.predict(X))

    def test_hand_rolled_forward_oracle(self):
        rng = np.random.default_rng(70)
        X = rng.normal(size=(6, 2))
        y = rng.normal(size=6)
        model = fit_mlp(X, y, MlpConfig(hidden_layers=(3,), epochs=0, seed=7))
        A0 = model.normalize(X)
        # independent forward pass, written out longhand
        z1 = A0 @ model.weights[0] + model.biases[0]
        a1 = 1.0 / (1.0 + np.exp(-z1))
        out = (a1 @ model.weights[1] + model.biases[1])[:, 0]
        np.testing.assert_allclose(model.predict(X), out, atol=1e-12)

    def test_row_permutation_equivariance(self):
        rng = np.random.default_rng(71)
        X = rng.normal(size=(10, 3))
        y = rng.normal(size=10)
        model = fit_mlp(X, y, MlpConfig(hidden_layers=(4,), epochs=20, seed=4))
        p = rng.permutation(10)
        np.testing.assert_allclose(model.predict(X)[p], model.predict(X[p]), atol=1e-12)
