"""Multilayer perceptron trained by full-batch gradient descent.

Hidden layers use sigmoid activations; the single output node is linear.
Inputs are min-max normalized to [0, 1] with training statistics (constant
columns map to 0).  Loss is mean squared error; weights start uniform in
+/- sqrt(6 / (fan_in + fan_out)) from the seed, biases at zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import (
    DimensionMismatch,
    EmptyDataset,
    InvalidConfig,
    NonFiniteLoss,
)


@dataclass(frozen=True)
class MlpConfig:
    hidden_layers: tuple[int, ...] = (100, 90, 80)
    learning_rate: float = 0.01
    epochs: int = 1000
    seed: int = 0
    normalize_inputs: bool = True

    def __post_init__(self):
        object.__setattr__(self, "hidden_layers", tuple(self.hidden_layers))
        if any(h < 1 for h in self.hidden_layers):
            raise InvalidConfig("hidden layer sizes must be >= 1")
        if self.learning_rate <= 0:
            raise InvalidConfig("learning_rate must be > 0")
        if self.epochs < 0:
            raise InvalidConfig("epochs must be >= 0")


@dataclass
class MlpModel:
    weights: list[np.ndarray]  # weights[l] has shape (fan_in, fan_out)
    biases: list[np.ndarray]   # biases[l] has shape (fan_out,)
    x_min: np.ndarray
    x_max: np.ndarray
    config: MlpConfig

    @property
    def n_features(self) -> int:
        return self.weights[0].shape[0]

    def normalize(self, X: np.ndarray) -> np.ndarray:
        if not self.config.normalize_inputs:
            return X
        span = self.x_max - self.x_min
        out = np.zeros_like(X)
        nz = span > 0
        out[:, nz] = (X[:, nz] - self.x_min[nz]) / span[nz]
        return out

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"expected {self.n_features} feature columns, got shape {X.shape}"
            )
        _, _, preds = _forward(self.weights, self.biases, self.normalize(X))
        return preds


def _sigmoid(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


def _forward(weights, biases, A0):
    """Returns pre-activations, activations, and the (n,) output vector."""
    zs = []
    activations = [A0]
    a = A0
    last = len(weights) - 1
    for l, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W + b
        zs.append(z)
        a = z if l == last else _sigmoid(z)
        activations.append(a)
    return zs, activations, activations[-1][:, 0]


def _backward(weights, activations, preds, y):
    """Analytic gradient of batch MSE for every weight and bias."""
    n = y.shape[0]
    grads_w = [None] * len(weights)
    grads_b = [None] * len(weights)
    delta = (2.0 / n) * (preds - y)[:, None]  # d(mse)/d(z_out), output linear
    for l in range(len(weights) - 1, -1, -1):
        a_prev = activations[l]
        grads_w[l] = a_prev.T @ delta
        grads_b[l] = delta.sum(axis=0)
        if l > 0:
            da = delta @ weights[l].T
            a = activations[l]
            delta = da * a * (1.0 - a)  # sigmoid' in terms of the activation
    return grads_w, grads_b


def _init_params(n_features: int, cfg: MlpConfig):
    rng = np.random.default_rng(cfg.seed)
    sizes = [n_features, *cfg.hidden_layers, 1]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def fit_mlp(X: np.ndarray, y: np.ndarray, cfg: MlpConfig | None = None) -> MlpModel:
    cfg = cfg or MlpConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyDataset("cannot fit an MLP on zero rows")
    if y.shape[0] != X.shape[0]:
        raise DimensionMismatch(f"X {X.shape} does not match y {y.shape}")

    if cfg.normalize_inputs:
        x_min = X.min(axis=0)
        x_max = X.max(axis=0)
    else:
        x_min = np.zeros(X.shape[1])
        x_max = np.ones(X.shape[1])
    weights, biases = _init_params(X.shape[1], cfg)
    model = MlpModel(weights=weights, biases=biases, x_min=x_min, x_max=x_max, config=cfg)
    A0 = model.normalize(X)

    lr = cfg.learning_rate
    for epoch in range(cfg.epochs):
        zs, activations, preds = _forward(weights, biases, A0)
        with np.errstate(over="ignore", invalid="ignore"):
            loss = float(np.mean((preds - y) ** 2))
        if not np.isfinite(loss):
            raise NonFiniteLoss(f"training loss became non-finite at epoch {epoch}", epoch)
        grads_w, grads_b = _backward(weights, activations, preds, y)
        for l in range(len(weights)):
            weights[l] -= lr * grads_w[l]
            biases[l] -= lr * grads_b[l]
    if cfg.epochs > 0:
        _, _, preds = _forward(weights, biases, A0)
        with np.errstate(over="ignore", invalid="ignore"):
            final_loss = float(np.mean((preds - y) ** 2))
        if not np.isfinite(final_loss):
            raise NonFiniteLoss(
                f"training loss became non-finite at epoch {cfg.epochs}", cfg.epochs
            )
    return model


def mlp_gradient(model: MlpModel, X: np.ndarray, y: np.ndarray):
    """Gradient of batch MSE at the model's current parameters.

    Returns (weight gradients, bias gradients) with the layer shapes of the
    model.  The batch is normalized exactly as during training.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0 or y.shape[0] != X.shape[0]:
        raise DimensionMismatch(f"bad batch shapes X {X.shape}, y {y.shape}")
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"expected {model.n_features} feature columns, got shape {X.shape}"
        )
    _, activations, preds = _forward(model.weights, model.biases, model.normalize(X))
    return _backward(model.weights, activations, preds, y)


def predict_mlp(model: MlpModel, X: np.ndarray) -> np.ndarray:
    return model.predict(X)


def mlp_loss(model: MlpModel, X: np.ndarray, y: np.ndarray) -> float:
    """Batch MSE at the current parameters (used by gradient checks)."""
    preds = model.predict(X)
    return float(np.mean((preds - np.asarray(y, dtype=np.float64)) ** 2))
