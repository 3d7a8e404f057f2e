"""Four regressor families behind one fit/predict contract."""

from .forest import ForestConfig, ForestModel, fit_forest, predict_forest, resolve_threads
from .linear import LinearModel, fit_linear, predict_linear
from .mlp import MlpConfig, MlpModel, fit_mlp, mlp_gradient, mlp_loss, predict_mlp
from .serialize import model_from_json, model_to_json
from .tree import TreeConfig, TreeModel, fit_tree, predict_tree

__all__ = [
    "ForestConfig",
    "ForestModel",
    "LinearModel",
    "MlpConfig",
    "MlpModel",
    "TreeConfig",
    "TreeModel",
    "fit_forest",
    "fit_linear",
    "fit_mlp",
    "fit_tree",
    "mlp_gradient",
    "mlp_loss",
    "model_from_json",
    "model_to_json",
    "predict_forest",
    "predict_linear",
    "predict_mlp",
    "predict_tree",
    "resolve_threads",
]
