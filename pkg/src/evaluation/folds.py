"""Seeded k-fold assignment."""
from typing import Optional, Sequence

import numpy as np

from src.errors import DataError
from src.evaluation.types import FoldPlan
from src.pipeline.rng import substream


def make_fold_plan(n: int, k: int, seed: int, labels: Optional[Sequence[int]] = None) -> FoldPlan:
    """Shuffle indices and deal them round-robin into ``k`` folds.

    With ``labels`` the shuffled positives are dealt first and the negatives
    continue the same rotation, which stratifies the folds while keeping
    fold sizes within one of each other.

    Raises:
        ValueError: If k < 2
        DataError: If n < k or labels do not have length n
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if n < k:
        raise DataError(f"cannot split {n} samples into {k} folds")
    rng = substream(seed, "folds", k)
    if labels is None:
        order = rng.permutation(n)
    else:
        labels = np.asarray(labels)
        if len(labels) != n:
            raise DataError(f"{len(labels)} labels for {n} samples")
        positives = np.flatnonzero(labels == 1)
        negatives = np.flatnonzero(labels != 1)
        order = np.r_[rng.permutation(positives), rng.permutation(negatives)]
    assignments = np.empty(n, dtype=np.int64)
    assignments[order] = np.arange(n) % k
    return FoldPlan(k=k, assignments=tuple(int(a) for a in assignments), seed=seed)
