"""Confusion counts and the metric suite."""
import math
from typing import Optional, Sequence

import numpy as np

from src.errors import DataError
from src.evaluation.roc import roc_auc
from src.evaluation.types import ConfusionCounts, MetricReport, ReportContext

DEFAULT_THRESHOLD = 0.5


def confusion_counts(scores: Sequence[float], labels: Sequence[int], threshold: float = DEFAULT_THRESHOLD) -> ConfusionCounts:
    """Tally the confusion matrix; a score >= threshold predicts positive.

    Raises:
        DataError: On empty input, unequal lengths or non-binary labels
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.size == 0:
        raise DataError("no scores to evaluate")
    if scores.shape != labels.shape:
        raise DataError(f"{scores.size} scores but {labels.size} labels")
    if not np.all(np.isin(labels, (0, 1))):
        raise DataError("labels must be 0 or 1")
    predicted = scores >= threshold
    actual = labels == 1
    return ConfusionCounts(
        tp=int(np.sum(predicted & actual)),
        tn=int(np.sum(~predicted & ~actual)),
        fp=int(np.sum(predicted & ~actual)),
        fn=int(np.sum(~predicted & actual)),
    )


def _ratio(numerator: float, denominator: float, name: str, flags: list[str]) -> float:
    if denominator == 0:
        flags.append(name)
        return 0.0
    return numerator / denominator


def compute_metrics(counts: ConfusionCounts, context: Optional[ReportContext] = None) -> MetricReport:
    """Accuracy, sensitivity, specificity, precision, F1 and MCC.

    A metric whose denominator is zero is reported as 0 and named in
    ``flags``. AUC is left unset.

    Raises:
        DataError: If all counts are zero
    """
    if counts.total == 0:
        raise DataError("confusion counts are all zero")
    tp, tn, fp, fn = counts.tp, counts.tn, counts.fp, counts.fn
    flags: list[str] = []
    ca = _ratio(tp + tn, counts.total, "ca", flags)
    sn = _ratio(tp, tp + fn, "sn", flags)
    sp = _ratio(tn, fp + tn, "sp", flags)
    precision = _ratio(tp, tp + fp, "precision", flags)
    f1 = _ratio(2 * tp, 2 * tp + fp + fn, "f1", flags)
    # integer product keeps the radicand exact before the single sqrt
    radicand = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = _ratio(tp * tn - fp * fn, math.sqrt(radicand), "mcc", flags)
    return MetricReport(
        ca=ca,
        sn=sn,
        sp=sp,
        precision=precision,
        f1=f1,
        mcc=mcc,
        counts=counts,
        context=context or ReportContext(),
        flags=tuple(flags),
    )


def evaluate_scores(
    scores: Sequence[float],
    labels: Sequence[int],
    context: Optional[ReportContext] = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> MetricReport:
    """Full report for one score vector, AUC included.

    With a single class present the AUC is undefined; it is reported as 0.5
    and flagged.
    """
    report = compute_metrics(confusion_counts(scores, labels, threshold), context)
    labels = np.asarray(labels)
    if np.all(labels == 1) or np.all(labels == 0):
        return report.with_auc(0.5, flagged=True)
    return report.with_auc(roc_auc(scores, labels))
