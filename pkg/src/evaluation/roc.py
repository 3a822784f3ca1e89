"""ROC curves and AUC."""
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid

from src.errors import DataError


@dataclass(frozen=True)
class RocCurve:
    """Points from (0, 0) to (1, 1); ``thresholds[0]`` is +inf."""

    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray

    def __len__(self) -> int:
        return len(self.fpr)


def roc_curve(scores: Sequence[float], labels: Sequence[int]) -> RocCurve:
    """Sweep every distinct score as a ``score >= t`` threshold, highest first.

    Tied scores form one step, so the trapezoid over a tie counts each
    positive/negative pair in it as one half.

    Raises:
        DataError: If lengths differ or either class is missing
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.size == 0:
        raise DataError("scores and labels must be non-empty and of equal length")
    positives = int(np.sum(labels == 1))
    negatives = int(np.sum(labels == 0))
    if positives == 0 or negatives == 0:
        raise DataError("ROC needs both classes")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order] == 1
    # last index of each run of equal scores
    ends = np.r_[np.flatnonzero(np.diff(sorted_scores) != 0), len(scores) - 1]
    tps = np.cumsum(sorted_labels)[ends]
    fps = (ends + 1) - tps
    return RocCurve(
        fpr=np.r_[0.0, fps / negatives],
        tpr=np.r_[0.0, tps / positives],
        thresholds=np.r_[np.inf, sorted_scores[ends]],
    )


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Trapezoidal area under ``roc_curve``."""
    curve = roc_curve(scores, labels)
    return float(np.clip(trapezoid(curve.tpr, curve.fpr), 0.0, 1.0))
