"""Versioned JSON serialization for all four model kinds.

Floats are written with ``repr`` precision (json default), so a reloaded
model predicts bit-identically to the original.
"""

from __future__ import annotations

import json

import numpy as np

from ..errors import InvalidConfig
from .forest import ForestConfig, ForestModel
from .linear import LinearModel
from .mlp import MlpConfig, MlpModel
from .tree import TreeConfig, TreeModel

FORMAT = "emissionscope-model"
VERSION = 1


def _tree_payload(model: TreeModel) -> dict:
    nodes = []
    for i in range(model.n_nodes):
        f = int(model.feature[i])
        if f >= 0:
            nodes.append(
                {
                    "feature": f,
                    "threshold": float(model.threshold[i]),
                    "left": int(model.left[i]),
                    "right": int(model.right[i]),
                    "count": int(model.count[i]),
                }
            )
        else:
            nodes.append({"value": float(model.value[i]), "count": int(model.count[i])})
    return {
        "n_features": model.n_features,
        "nodes": nodes,
        "config": {
            "max_splits": model.config.max_splits,
            "min_leaf_size": model.config.min_leaf_size,
            "min_parent_size": model.config.min_parent_size,
            "seed": model.config.seed,
        },
    }


def _tree_from_payload(payload: dict) -> TreeModel:
    nodes = payload["nodes"]
    k = len(nodes)
    feature = np.full(k, -1, dtype=np.int64)
    threshold = np.zeros(k, dtype=np.float64)
    left = np.full(k, -1, dtype=np.int64)
    right = np.full(k, -1, dtype=np.int64)
    value = np.zeros(k, dtype=np.float64)
    count = np.zeros(k, dtype=np.int64)
    for i, node in enumerate(nodes):
        count[i] = node["count"]
        if "feature" in node:
            feature[i] = node["feature"]
            threshold[i] = node["threshold"]
            left[i] = node["left"]
            right[i] = node["right"]
        else:
            value[i] = node["value"]
    cfg = payload.get("config", {})
    return TreeModel(
        n_features=payload["n_features"],
        feature=feature,
        threshold=threshold,
        left=left,
        right=right,
        value=value,
        count=count,
        config=TreeConfig(
            max_splits=cfg.get("max_splits"),
            min_leaf_size=cfg.get("min_leaf_size", 1),
            min_parent_size=cfg.get("min_parent_size", 10),
            seed=cfg.get("seed", 0),
        ),
    )


def model_to_json(model) -> bytes:
    doc: dict = {"format": FORMAT, "version": VERSION}
    if isinstance(model, LinearModel):
        doc["kind"] = "linear"
        doc["params"] = {
            "weights": [float(w) for w in model.weights],
            "intercept": model.intercept,
        }
    elif isinstance(model, MlpModel):
        doc["kind"] = "mlp"
        doc["config"] = {
            "hidden_layers": list(model.config.hidden_layers),
            "learning_rate": model.config.learning_rate,
            "epochs": model.config.epochs,
            "seed": model.config.seed,
            "normalize_inputs": model.config.normalize_inputs,
        }
        doc["params"] = {
            "weights": [w.tolist() for w in model.weights],
            "biases": [b.tolist() for b in model.biases],
            "x_min": model.x_min.tolist(),
            "x_max": model.x_max.tolist(),
        }
    elif isinstance(model, TreeModel):
        doc["kind"] = "tree"
        doc["params"] = _tree_payload(model)
    elif isinstance(model, ForestModel):
        doc["kind"] = "forest"
        doc["config"] = {
            "n_trees": model.config.n_trees,
            "bootstrap": model.config.bootstrap,
            "mtry": model.config.mtry,
            "seed": model.config.seed,
            "tree": {
                "max_splits": model.config.tree.max_splits,
                "min_leaf_size": model.config.tree.min_leaf_size,
                "min_parent_size": model.config.tree.min_parent_size,
                "seed": model.config.tree.seed,
            },
        }
        doc["params"] = {"trees": [_tree_payload(t) for t in model.trees]}
    else:
        raise InvalidConfig(f"cannot serialize object of type {type(model).__name__}")
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def model_from_json(data: bytes | str):
    doc = json.loads(data)
    if doc.get("format") != FORMAT:
        raise InvalidConfig("not an emissionscope model document")
    if doc.get("version") != VERSION:
        raise InvalidConfig(f"unsupported model document version {doc.get('version')!r}")
    kind = doc.get("kind")
    params = doc.get("params", {})
    if kind == "linear":
        return LinearModel(
            weights=np.asarray(params["weights"], dtype=np.float64),
            intercept=float(params["intercept"]),
        )
    if kind == "mlp":
        cfg = doc["config"]
        return MlpModel(
            weights=[np.asarray(w, dtype=np.float64) for w in params["weights"]],
            biases=[np.asarray(b, dtype=np.float64) for b in params["biases"]],
            x_min=np.asarray(params["x_min"], dtype=np.float64),
            x_max=np.asarray(params["x_max"], dtype=np.float64),
            config=MlpConfig(
                hidden_layers=tuple(cfg["hidden_layers"]),
                learning_rate=cfg["learning_rate"],
                epochs=cfg["epochs"],
                seed=cfg["seed"],
                normalize_inputs=cfg["normalize_inputs"],
            ),
        )
    if kind == "tree":
        return _tree_from_payload(params)
    if kind == "forest":
        cfg = doc["config"]
        tree_cfg = TreeConfig(
            max_splits=cfg["tree"]["max_splits"],
            min_leaf_size=cfg["tree"]["min_leaf_size"],
            min_parent_size=cfg["tree"]["min_parent_size"],
            seed=cfg["tree"]["seed"],
        )
        return ForestModel(
            trees=tuple(_tree_from_payload(p) for p in params["trees"]),
            config=ForestConfig(
                n_trees=cfg["n_trees"],
                tree=tree_cfg,
                bootstrap=cfg["bootstrap"],
                mtry=cfg["mtry"],
                seed=cfg["seed"],
            ),
        )
    raise InvalidConfig(f"unknown model kind {kind!r}")
