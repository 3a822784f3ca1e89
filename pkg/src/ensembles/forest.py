"""Random Forest and Extremely Randomized Trees."""
import math
from typing import Optional

import numpy as np

from src.config.logging import get_logger
from src.config.settings import EnsembleConfig
from src.ensembles.tree import GiniCriterion, TreeBuilder, predict_tree
from src.ensembles.types import EnsembleKind, EnsembleModel
from src.pipeline.rng import substream

logger = get_logger(__name__)


def default_max_features(n_features: int) -> int:
    """round(sqrt(d)), at least 1."""
    return max(1, int(math.floor(math.sqrt(n_features) + 0.5)))


def fit_random_forest(X: np.ndarray, y: np.ndarray, config: EnsembleConfig) -> EnsembleModel:
    """Bootstrap-aggregated Gini trees with per-node feature subsets.

    Tree ``t`` draws its bootstrap, feature subsets and nothing else from the
    substream ``(seed, "bootstrap", t)``. The out-of-bag error is computed
    from the trees that did not see each sample.
    """
    n, d = X.shape
    max_features = config.max_features or default_max_features(d)
    model = EnsembleModel(EnsembleKind.RF, config, d)
    inbag = np.zeros((config.n_trees, n), dtype=np.int64)

    for t in range(config.n_trees):
        rng = substream(config.seed, "bootstrap", t)
        counts = np.bincount(rng.integers(0, n, size=n), minlength=n)
        inbag[t] = counts
        builder = TreeBuilder(
            GiniCriterion(y, weights=counts),
            max_depth=config.max_depth,
            min_samples_split=config.min_samples_split,
            max_features=max_features,
            mode="best",
            rng=rng,
        )
        model.trees.append(builder.build(X, np.flatnonzero(counts)))
        model.tree_weights.append(1.0)

    model.inbag = inbag
    model.oob_error, model.oob_samples = _out_of_bag(model, X, y)
    if model.oob_error is None:
        logger.warning("oob_unavailable", n_trees=config.n_trees, samples=n)
    return model


def _out_of_bag(model: EnsembleModel, X: np.ndarray, y: np.ndarray) -> tuple[Optional[float], int]:
    n = len(X)
    positive_votes = np.zeros(n)
    votes = np.zeros(n)
    for tree, counts in zip(model.trees, model.inbag):
        out = np.flatnonzero(counts == 0)
        if len(out) == 0:
            continue
        positive_votes[out] += predict_tree(tree, X[out]) >= 0.5
        votes[out] += 1
    covered = votes > 0
    if not covered.any():
        return None, 0
    predicted = positive_votes[covered] / votes[covered] >= 0.5
    return float(np.mean(predicted != y[covered].astype(bool))), int(covered.sum())


def fit_extra_trees(X: np.ndarray, y: np.ndarray, config: EnsembleConfig) -> EnsembleModel:
    """Full-sample Gini trees with one uniform random threshold per candidate feature."""
    d = X.shape[1]
    max_features = config.max_features or default_max_features(d)
    model = EnsembleModel(EnsembleKind.ERT, config, d)
    for t in range(config.n_trees):
        builder = TreeBuilder(
            GiniCriterion(y),
            max_depth=config.max_depth,
            min_samples_split=config.min_samples_split,
            max_features=max_features,
            mode="random",
            rng=substream(config.seed, "extra_trees", t),
        )
        model.trees.append(builder.build(X))
        model.tree_weights.append(1.0)
    return model
