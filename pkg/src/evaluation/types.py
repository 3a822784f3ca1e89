"""Type definitions for evaluation runs."""
from enum import Enum
from typing import Optional
from dataclasses import dataclass, field, replace

import numpy as np


class Protocol(str, Enum):
    """Evaluation protocols."""
    TRAIN = "train"
    INDEPENDENT = "independent"
    CV5 = "cv5"
    CV10 = "cv10"

    @property
    def folds(self) -> Optional[int]:
        return {Protocol.CV5: 5, Protocol.CV10: 10}.get(self)


# Column order of the published comparison tables
METRIC_COLUMNS = ("ca", "sn", "sp", "mcc", "auc", "f1")
METRIC_HEADERS = {"ca": "ACC", "sn": "Sn", "sp": "Sp", "mcc": "MCC", "auc": "AUC", "f1": "F1", "precision": "Precision"}


@dataclass(frozen=True)
class ConfusionCounts:
    """Confusion matrix cells."""
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.tn + self.fp

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.tn + other.tn, self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class ReportContext:
    """What a report was computed for."""
    species: str = ""
    classifier: str = ""
    protocol: str = ""
    fold: Optional[int] = None


@dataclass(frozen=True)
class MetricReport:
    """Metric suite for one evaluation run.

    ``flags`` names the metrics that fell back to the zero default because of
    an empty denominator (or ``auc`` when only one class was present).
    """
    ca: float
    sn: float
    sp: float
    precision: float
    f1: float
    mcc: float
    counts: ConfusionCounts
    auc: Optional[float] = None
    context: ReportContext = field(default_factory=ReportContext)
    flags: tuple[str, ...] = ()

    def with_auc(self, auc: float, flagged: bool = False) -> "MetricReport":
        flags = self.flags + ("auc",) if flagged else self.flags
        return replace(self, auc=auc, flags=flags)


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of sample indices to k disjoint folds."""
    k: int
    assignments: tuple[int, ...]
    seed: int

    @property
    def n(self) -> int:
        return len(self.assignments)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.assignments) == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.assignments) != fold)

    def fold_sizes(self) -> list[int]:
        counts = np.bincount(np.asarray(self.assignments, dtype=np.int64), minlength=self.k)
        return [int(c) for c in counts]
