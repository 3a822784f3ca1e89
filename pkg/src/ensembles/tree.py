"""CART tree builder shared by every ensemble.

Each criterion reduces a node to a few additive per-sample statistics; split
gain is ``score(left) + score(right) - score(parent) - penalty`` and the leaf
value is read from the same sums. Candidate thresholds are midpoints between
consecutive distinct values (``best`` mode) or one uniform draw per feature
(``random`` mode). Features are scanned in ascending index order and a
candidate replaces the incumbent only on strictly larger gain, so ties go to
the lowest feature index and then the lowest threshold.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from src.ensembles.types import TreeNode

SplitMode = Literal["best", "random"]
MIN_GAIN = 1e-12


class SplitCriterion(ABC):
    """Additive node statistics with a score and a leaf rule."""

    penalty: float = 0.0

    def __init__(self, stats: np.ndarray):
        self.stats = np.asarray(stats, dtype=float)

    @abstractmethod
    def score(self, sums: np.ndarray) -> np.ndarray:
        """Node score of stacked sums (..., k); larger is better."""

    @abstractmethod
    def leaf_value(self, sums: np.ndarray) -> float:
        """Leaf value of one node's sums (k,)."""

    def is_pure(self, sums: np.ndarray) -> bool:
        return False


class GiniCriterion(SplitCriterion):
    """Weighted Gini impurity; leaves hold the class-1 weight fraction."""

    def __init__(self, y: np.ndarray, weights: Optional[np.ndarray] = None):
        w = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=float)
        super().__init__(np.column_stack([w, w * np.asarray(y, dtype=float)]))

    def score(self, sums: np.ndarray) -> np.ndarray:
        # minus the weight-scaled impurity: (P^2 + N^2) / W - W
        W, P = sums[..., 0], sums[..., 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(W > 0, (P * P + (W - P) ** 2) / np.where(W > 0, W, 1.0) - W, 0.0)

    def leaf_value(self, sums: np.ndarray) -> float:
        return float(sums[1] / sums[0]) if sums[0] > 0 else 0.0

    def is_pure(self, sums: np.ndarray) -> bool:
        return sums[1] <= 0.0 or sums[1] >= sums[0]


class NewtonResidualCriterion(SplitCriterion):
    """Squared-error splits on residuals with one-step Newton leaves.

    Leaves hold ``shrinkage * sum(r) / sum(p (1 - p))``.
    """

    def __init__(self, residuals: np.ndarray, hessians: np.ndarray, shrinkage: float = 1.0):
        super().__init__(np.column_stack([np.ones(len(residuals)), residuals, hessians]))
        self.shrinkage = shrinkage

    def score(self, sums: np.ndarray) -> np.ndarray:
        n, r = sums[..., 0], sums[..., 1]
        return np.where(n > 0, r * r / np.where(n > 0, n, 1.0), 0.0)

    def leaf_value(self, sums: np.ndarray) -> float:
        if sums[2] <= 0.0:
            return 0.0
        return float(self.shrinkage * sums[1] / sums[2])


class SecondOrderCriterion(SplitCriterion):
    """Gradient/hessian similarity scores with L2 leaf penalty."""

    def __init__(self, grad: np.ndarray, hess: np.ndarray, reg_lambda: float = 1.0, gamma: float = 0.0,
                 shrinkage: float = 1.0):
        super().__init__(np.column_stack([grad, hess]))
        self.reg_lambda = reg_lambda
        self.penalty = gamma
        self.shrinkage = shrinkage

    def similarity(self, sums: np.ndarray) -> np.ndarray:
        G, H = sums[..., 0], sums[..., 1]
        return G * G / (H + self.reg_lambda)

    def score(self, sums: np.ndarray) -> np.ndarray:
        return 0.5 * self.similarity(sums)

    def leaf_value(self, sums: np.ndarray) -> float:
        return float(-self.shrinkage * sums[0] / (sums[1] + self.reg_lambda))


@dataclass
class TreeBuilder:
    """Grows one tree for a criterion.

    Args:
        criterion: Split statistics over all training rows
        max_depth: Depth limit, None for unlimited
        min_samples_split: Smallest node that may be split
        max_features: Features drawn per node, None for all
        mode: ``best`` for exhaustive midpoints, ``random`` for one uniform threshold per feature
        rng: Randomness for feature subsets and random thresholds
    """

    criterion: SplitCriterion
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    max_features: Optional[int] = None
    mode: SplitMode = "best"
    rng: Optional[np.random.Generator] = None

    def build(self, X: np.ndarray, rows: Optional[np.ndarray] = None) -> TreeNode:
        """Grow a tree over ``rows`` of ``X`` (all rows when None)."""
        rows = np.arange(len(X)) if rows is None else np.asarray(rows)
        root = TreeNode()
        stack = [(root, rows, 0)]
        while stack:
            node, idx, depth = stack.pop()
            sums = self.criterion.stats[idx].sum(axis=0)
            node.value = self.criterion.leaf_value(sums)
            if (
                (self.max_depth is not None and depth >= self.max_depth)
                or len(idx) < self.min_samples_split
                or self.criterion.is_pure(sums)
            ):
                continue
            split = self._best_split(X, idx, sums)
            if split is None:
                continue
            feature, threshold = split
            goes_left = X[idx, feature] <= threshold
            node.feature_index = feature
            node.threshold = threshold
            node.left, node.right = TreeNode(), TreeNode()
            stack.append((node.right, idx[~goes_left], depth + 1))
            stack.append((node.left, idx[goes_left], depth + 1))
        return root

    def _candidate_features(self, n_features: int) -> np.ndarray:
        if self.max_features is None or self.max_features >= n_features:
            return np.arange(n_features)
        return np.sort(self.rng.choice(n_features, size=self.max_features, replace=False))

    def _best_split(self, X: np.ndarray, idx: np.ndarray, total: np.ndarray) -> Optional[tuple[int, float]]:
        parent = self.criterion.score(total)
        best_gain, best = MIN_GAIN, None
        for feature in self._candidate_features(X.shape[1]):
            x = X[idx, feature]
            if self.mode == "random":
                found = self._random_threshold(x, idx, total, parent)
            else:
                found = self._midpoint_threshold(x, idx, total, parent)
            if found is not None and found[0] > best_gain:
                best_gain, best = found[0], (int(feature), found[1])
        return best

    def _midpoint_threshold(
        self, x: np.ndarray, idx: np.ndarray, total: np.ndarray, parent: float
    ) -> Optional[tuple[float, float]]:
        order = np.argsort(x, kind="stable")
        xs = x[order]
        cuts = np.flatnonzero(xs[:-1] < xs[1:])
        if len(cuts) == 0:
            return None
        left = np.cumsum(self.criterion.stats[idx[order]], axis=0)[cuts]
        gains = self.criterion.score(left) + self.criterion.score(total - left) - parent - self.criterion.penalty
        k = int(np.argmax(gains))
        lo, hi = xs[cuts[k]], xs[cuts[k] + 1]
        threshold = lo + (hi - lo) / 2.0
        if not threshold < hi:
            threshold = lo
        return float(gains[k]), float(threshold)

    def _random_threshold(
        self, x: np.ndarray, idx: np.ndarray, total: np.ndarray, parent: float
    ) -> Optional[tuple[float, float]]:
        lo, hi = x.min(), x.max()
        if lo == hi:
            return None
        threshold = float(self.rng.uniform(lo, hi))
        left = self.criterion.stats[idx[x <= threshold]].sum(axis=0)
        gain = self.criterion.score(left) + self.criterion.score(total - left) - parent - self.criterion.penalty
        return float(gain), threshold


def predict_tree(tree: TreeNode, X: np.ndarray) -> np.ndarray:
    """Leaf values for every row of ``X``."""
    X = np.asarray(X, dtype=float)
    out = np.empty(len(X))
    stack = [(tree, np.arange(len(X)))]
    while stack:
        node, idx = stack.pop()
        if len(idx) == 0:
            continue
        if node.is_leaf:
            out[idx] = node.value
            continue
        goes_left = X[idx, node.feature_index] <= node.threshold
        stack.append((node.left, idx[goes_left]))
        stack.append((node.right, idx[~goes_left]))
    return out
