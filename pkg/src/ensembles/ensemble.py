"""Fit/predict entry points for all ensemble kinds."""
from typing import Sequence, Union

import numpy as np
from scipy.special import expit

from src.config.logging import get_logger
from src.config.settings import EnsembleConfig
from src.ensembles.boosting import fit_adaboost, fit_gradient_boosting, fit_second_order
from src.ensembles.forest import fit_extra_trees, fit_random_forest
from src.ensembles.tree import predict_tree
from src.ensembles.types import EnsembleKind, EnsembleModel
from src.errors import DataError, NotFittedError

logger = get_logger(__name__)

Features = Union[np.ndarray, Sequence]

_FITTERS = {
    EnsembleKind.RF: fit_random_forest,
    EnsembleKind.ERT: fit_extra_trees,
    EnsembleKind.AB: fit_adaboost,
    EnsembleKind.GB: fit_gradient_boosting,
    EnsembleKind.XGB: fit_second_order,
}


def as_matrix(features: Features) -> np.ndarray:
    """Feature matrix from an array or a sequence of feature vectors."""
    if isinstance(features, np.ndarray):
        X = features
    else:
        X = np.stack([getattr(f, "values", f) for f in features]) if len(features) else np.zeros((0, 0))
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return X


def fit_ensemble(features: Features, labels: Sequence[int], config: EnsembleConfig) -> EnsembleModel:
    """Fit the ensemble named by ``config.kind``.

    Args:
        features: (n, d) matrix or n feature vectors
        labels: n labels in {0, 1}
        config: Ensemble configuration

    Returns:
        Fitted model

    Raises:
        DataError: On empty or non-finite features, mismatched lengths,
            labels outside {0, 1} or a single class
    """
    X = as_matrix(features)
    y = np.asarray(labels, dtype=float)
    if X.size == 0:
        raise DataError("no training features")
    if len(X) != len(y):
        raise DataError(f"{len(X)} feature rows but {len(y)} labels")
    if not np.all(np.isin(y, (0.0, 1.0))):
        raise DataError("labels must be 0 or 1")
    if len(np.unique(y)) < 2:
        raise DataError("both classes must be present to fit an ensemble")
    if not np.all(np.isfinite(X)):
        raise DataError("features contain non-finite values")

    model = _FITTERS[config.kind](X, y, config)
    logger.debug(
        "ensemble_fit_complete",
        kind=config.kind.value,
        samples=len(X),
        trees=model.n_trees,
        oob_error=model.oob_error,
    )
    return model


def decision_margin(model: EnsembleModel, X: np.ndarray) -> np.ndarray:
    """Booster margin before the sigmoid (AB uses twice the vote margin)."""
    if model.kind is EnsembleKind.AB:
        votes = np.zeros(len(X))
        for tree, alpha in zip(model.trees, model.tree_weights):
            votes += alpha * (2.0 * (predict_tree(tree, X) >= 0.5) - 1.0)
        return 2.0 * votes
    margin = np.full(len(X), model.base_score)
    for tree in model.trees:
        margin += predict_tree(tree, X)
    return margin


def predict_proba(model: EnsembleModel, features: Features) -> np.ndarray:
    """Class-1 probabilities in [0, 1].

    Raises:
        NotFittedError: If a forest has no trees
        DataError: If the feature width differs from the fit
    """
    if model is None or (not model.kind.is_booster and not model.trees):
        raise NotFittedError("ensemble has not been fitted")
    X = as_matrix(features)
    if len(X) == 0:
        return np.zeros(0)
    if X.shape[1] != model.n_features:
        raise DataError(f"expected {model.n_features} features, got {X.shape[1]}")
    if model.kind.is_booster:
        return expit(decision_margin(model, X))
    return np.mean([predict_tree(tree, X) for tree in model.trees], axis=0)


def oob_error(model: EnsembleModel) -> float:
    """Out-of-bag misclassification rate of a random forest.

    Raises:
        ValueError: For any kind other than RF
        NotFittedError: If no sample was ever out of bag
    """
    if model.kind is not EnsembleKind.RF:
        raise ValueError(f"out-of-bag error is defined for RF only, not {model.kind.value}")
    if model.oob_error is None:
        raise NotFittedError("no out-of-bag estimate recorded")
    return model.oob_error
