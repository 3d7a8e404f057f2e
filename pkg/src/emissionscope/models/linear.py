"""Ordinary least squares regression.

Solved via numpy's SVD-backed ``lstsq``, which returns the minimum-norm
solution on rank-deficient designs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateDesign, DimensionMismatch


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray  # (d,)
    intercept: float

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"expected {self.n_features} feature columns, got shape {X.shape}"
            )
        return X @ self.weights + self.intercept


def fit_linear(X: np.ndarray, y: np.ndarray) -> LinearModel:
    """Least-squares fit of y = intercept + weights . x."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise DegenerateDesign(f"design matrix has shape {X.shape}")
    if y.shape[0] != X.shape[0]:
        raise DimensionMismatch(f"X {X.shape} does not match y {y.shape}")
    A = np.hstack([np.ones((X.shape[0], 1)), X])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return LinearModel(weights=coef[1:].copy(), intercept=float(coef[0]))


def predict_linear(model: LinearModel, X: np.ndarray) -> np.ndarray:
    return model.predict(X)
