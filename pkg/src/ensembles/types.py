"""Type definitions for tree ensembles."""
from enum import Enum
from typing import TYPE_CHECKING, Optional
from dataclasses import dataclass, field

import numpy as np

if TYPE_CHECKING:
    from src.config.settings import EnsembleConfig


class EnsembleKind(str, Enum):
    """The five tree-ensemble classifiers."""
    RF = "RF"
    ERT = "ERT"
    AB = "AB"
    GB = "GB"
    XGB = "XGB"

    @property
    def is_booster(self) -> bool:
        return self in (EnsembleKind.AB, EnsembleKind.GB, EnsembleKind.XGB)


# Report name of the network's own sigmoid output
DEEP_CLASSIFIER = "LSTM"


@dataclass
class TreeNode:
    """Binary tree node; a leaf when ``left`` and ``right`` are None.

    Samples with ``x[feature_index] <= threshold`` go left. Leaf ``value`` is a
    class-1 frequency (RF, ERT, AB) or an additive score (GB, XGB).
    """
    value: float = 0.0
    feature_index: int = -1
    threshold: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def n_leaves(self) -> int:
        if self.is_leaf:
            return 1
        return self.left.n_leaves() + self.right.n_leaves()


@dataclass
class EnsembleModel:
    """Fitted ensemble.

    ``tree_weights`` holds the AdaBoost vote weights (1.0 for every other
    kind). ``base_score`` is the log-odds starting point of GB and XGB.
    ``inbag`` keeps the RF bootstrap counts (n_trees, n_samples) of the fit;
    it is not persisted.
    """
    kind: EnsembleKind
    config: "EnsembleConfig"
    n_features: int
    trees: list[TreeNode] = field(default_factory=list)
    tree_weights: list[float] = field(default_factory=list)
    base_score: float = 0.0
    oob_error: Optional[float] = None
    oob_samples: Optional[int] = None
    inbag: Optional[np.ndarray] = None

    @property
    def n_trees(self) -> int:
        return len(self.trees)
