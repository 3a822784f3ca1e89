"""AdaBoost, gradient boosting and second-order boosting."""
import math

import numpy as np
from scipy.special import expit

from src.config.logging import get_logger
from src.config.settings import EnsembleConfig
from src.ensembles.tree import (
    GiniCriterion,
    NewtonResidualCriterion,
    SecondOrderCriterion,
    TreeBuilder,
    predict_tree,
)
from src.ensembles.types import EnsembleKind, EnsembleModel

logger = get_logger(__name__)

# weighted error used for the vote weight of a perfect weak learner
PERFECT_ERROR_FLOOR = 1e-10


def log_odds(y: np.ndarray) -> float:
    rate = float(np.mean(y))
    return math.log(rate / (1.0 - rate))


def adaboost_vote_weight(err: float) -> float:
    """alpha = 1/2 ln((1 - err) / err)."""
    err = max(err, PERFECT_ERROR_FLOOR)
    return 0.5 * math.log((1.0 - err) / err)


def fit_adaboost(X: np.ndarray, y: np.ndarray, config: EnsembleConfig) -> EnsembleModel:
    """Discrete AdaBoost on depth-limited weighted Gini trees.

    Stops after a perfect weak learner (kept, with a floored error) or one no
    better than chance (discarded).
    """
    n = len(X)
    model = EnsembleModel(EnsembleKind.AB, config, X.shape[1])
    weights = np.full(n, 1.0 / n)
    signed_y = 2.0 * y - 1.0

    for t in range(config.n_trees):
        tree = TreeBuilder(
            GiniCriterion(y, weights=weights),
            max_depth=config.max_depth,
            min_samples_split=config.min_samples_split,
        ).build(X)
        predicted = (predict_tree(tree, X) >= 0.5).astype(float)
        err = float(weights[predicted != y].sum() / weights.sum())
        if err >= 0.5:
            logger.info("adaboost_stopped", round=t, reason="weak_learner_not_better_than_chance", error=err)
            break
        alpha = adaboost_vote_weight(err)
        model.trees.append(tree)
        model.tree_weights.append(alpha)
        if err <= 0.0:
            logger.info("adaboost_stopped", round=t, reason="perfect_fit")
            break
        weights = weights * np.exp(-alpha * signed_y * (2.0 * predicted - 1.0))
        weights /= weights.sum()
    return model


def fit_gradient_boosting(X: np.ndarray, y: np.ndarray, config: EnsembleConfig) -> EnsembleModel:
    """Logistic-loss boosting: residual trees with shrunk Newton leaves."""
    model = EnsembleModel(EnsembleKind.GB, config, X.shape[1], base_score=log_odds(y))
    margin = np.full(len(X), model.base_score)
    for _ in range(config.n_trees):
        p = expit(margin)
        tree = TreeBuilder(
            NewtonResidualCriterion(y - p, p * (1.0 - p), shrinkage=config.learning_rate),
            max_depth=config.max_depth,
            min_samples_split=config.min_samples_split,
        ).build(X)
        model.trees.append(tree)
        model.tree_weights.append(1.0)
        margin += predict_tree(tree, X)
    return model


def fit_second_order(X: np.ndarray, y: np.ndarray, config: EnsembleConfig) -> EnsembleModel:
    """Gradient/hessian boosting with L2-regularised leaves and a gain floor."""
    model = EnsembleModel(EnsembleKind.XGB, config, X.shape[1], base_score=log_odds(y))
    margin = np.full(len(X), model.base_score)
    for _ in range(config.n_trees):
        p = expit(margin)
        tree = TreeBuilder(
            SecondOrderCriterion(
                p - y,
                p * (1.0 - p),
                reg_lambda=config.reg_lambda,
                gamma=config.gamma,
                shrinkage=config.learning_rate,
            ),
            max_depth=config.max_depth,
            min_samples_split=config.min_samples_split,
        ).build(X)
        model.trees.append(tree)
        model.tree_weights.append(1.0)
        margin += predict_tree(tree, X)
    return model
