"""Versioned JSON ensemble files with preorder tree encoding."""
import json
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from src.config.settings import EnsembleConfig
from src.ensembles.types import EnsembleKind, EnsembleModel, TreeNode
from src.errors import DataError

ENSEMBLE_FORMAT = "kace-ensemble"
ENSEMBLE_VERSION = 1


def encode_tree(tree: TreeNode) -> dict[str, list]:
    """Preorder arrays; ``feature == -1`` marks a leaf."""
    features, thresholds, values = [], [], []
    stack = [tree]
    while stack:
        node = stack.pop()
        features.append(node.feature_index if not node.is_leaf else -1)
        thresholds.append(node.threshold if not node.is_leaf else 0.0)
        values.append(node.value)
        if not node.is_leaf:
            stack.append(node.right)
            stack.append(node.left)
    return {"feature": features, "threshold": thresholds, "value": values}


def decode_tree(data: dict[str, list]) -> TreeNode:
    """Inverse of ``encode_tree``.

    Raises:
        DataError: On truncated, trailing or inconsistent arrays
    """
    try:
        features, thresholds, values = data["feature"], data["threshold"], data["value"]
    except (KeyError, TypeError) as e:
        raise DataError(f"corrupt tree encoding: {e}") from e
    if not features or not len(features) == len(thresholds) == len(values):
        raise DataError("tree arrays are empty or of unequal length")

    nodes = [TreeNode(value=float(v)) for v in values]
    for node, feature, threshold in zip(nodes, features, thresholds):
        if int(feature) >= 0:
            node.feature_index = int(feature)
            node.threshold = float(threshold)

    open_nodes = [nodes[0]] if nodes[0].feature_index >= 0 else []
    for node in nodes[1:]:
        if not open_nodes:
            raise DataError("trailing entries in tree encoding")
        parent = open_nodes[-1]
        if parent.left is None:
            parent.left = node
        else:
            parent.right = node
            open_nodes.pop()
        if node.feature_index >= 0:
            open_nodes.append(node)
    if open_nodes:
        raise DataError("truncated tree encoding")
    return nodes[0]


def ensemble_to_dict(model: EnsembleModel) -> dict[str, Any]:
    return {
        "format": ENSEMBLE_FORMAT,
        "version": ENSEMBLE_VERSION,
        "kind": model.kind.value,
        "config": model.config.model_dump(mode="json"),
        "n_features": model.n_features,
        "base_score": model.base_score,
        "tree_weights": list(model.tree_weights),
        "oob_error": model.oob_error,
        "oob_samples": model.oob_samples,
        "trees": [encode_tree(tree) for tree in model.trees],
    }


def ensemble_from_dict(data: dict[str, Any]) -> EnsembleModel:
    """Rebuild a fitted ensemble.

    Raises:
        DataError: On an unknown format or version, or inconsistent content
    """
    if data.get("format") != ENSEMBLE_FORMAT:
        raise DataError(f"not a {ENSEMBLE_FORMAT} file (format={data.get('format')!r})")
    if data.get("version") != ENSEMBLE_VERSION:
        raise DataError(f"unsupported {ENSEMBLE_FORMAT} version {data.get('version')!r}")
    try:
        kind = EnsembleKind(data["kind"])
        model = EnsembleModel(
            kind=kind,
            config=EnsembleConfig(**{**data["config"], "kind": kind}),
            n_features=int(data["n_features"]),
            trees=[decode_tree(t) for t in data["trees"]],
            tree_weights=[float(w) for w in data["tree_weights"]],
            base_score=float(data["base_score"]),
            oob_error=data.get("oob_error"),
            oob_samples=data.get("oob_samples"),
        )
    except (KeyError, TypeError, ValueError, ValidationError) as e:
        raise DataError(f"corrupt ensemble file: {e}") from e
    if len(model.tree_weights) != len(model.trees):
        raise DataError("tree weight count does not match tree count")
    return model


def dumps_ensemble(model: EnsembleModel) -> str:
    return json.dumps(ensemble_to_dict(model)) + "\n"


def load_ensemble(path: Path) -> EnsembleModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise DataError(f"cannot read ensemble {path}: {e}") from e
    return ensemble_from_dict(data)
