"""k-fold cross-validation over an arbitrary training recipe."""
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence, TypeVar

import numpy as np

from src.config.logging import get_logger
from src.errors import DataError
from src.evaluation.aggregate import average_reports
from src.evaluation.metrics import DEFAULT_THRESHOLD, evaluate_scores
from src.evaluation.types import FoldPlan, MetricReport, ReportContext

logger = get_logger(__name__)

T = TypeVar("T")

DEGENERATE_FOLD = "degenerate_fold"

# (training samples, held-out samples) -> held-out scores per classifier name
Recipe = Callable[[list, list], Mapping[str, np.ndarray]]


@dataclass
class CrossValidationResult:
    """Per-fold and averaged reports plus out-of-fold scores per classifier."""

    plan: FoldPlan
    labels: np.ndarray
    fold_reports: dict[str, list[MetricReport]] = field(default_factory=dict)
    averaged: dict[str, MetricReport] = field(default_factory=dict)
    oof_scores: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def classifiers(self) -> list[str]:
        return list(self.averaged)


def cross_validate(
    samples: Sequence[T],
    labels: Sequence[int],
    recipe: Recipe,
    plan: FoldPlan,
    context: ReportContext = ReportContext(),
    threshold: float = DEFAULT_THRESHOLD,
    classifiers: Sequence[str] = (),
) -> CrossValidationResult:
    """Train on k-1 folds, score the held-out fold, repeat for every fold.

    Folds missing a class still produce a report; the undefined metrics are
    flagged and the run continues. When the training part of a fold holds a
    single class its reports carry the ``degenerate_fold`` flag, and if
    ``classifiers`` is given the recipe is skipped for that fold: every named
    classifier scores the held-out items with the training base rate.

    Args:
        samples: Items handed to the recipe (windows or feature vectors)
        labels: Binary labels aligned with samples
        recipe: Fits everything on the training items and scores the held-out items
        plan: Fold assignment covering every sample
        context: Species/protocol context copied into each report
        threshold: Positive decision threshold
        classifiers: Names the recipe returns, used for single-class training folds

    Returns:
        Fold reports, their unweighted means and the out-of-fold scores

    Raises:
        DataError: If the plan does not cover the samples or the recipe
            returns scores of the wrong length
    """
    labels = np.asarray(labels)
    if plan.n != len(samples) or len(labels) != len(samples):
        raise DataError(f"fold plan covers {plan.n} samples, got {len(samples)} samples and {len(labels)} labels")

    result = CrossValidationResult(plan=plan, labels=labels)
    for fold in range(plan.k):
        test_idx = plan.test_indices(fold)
        train_idx = plan.train_indices(fold)
        train_labels = labels[train_idx]
        single_class = train_labels.min() == train_labels.max()
        if single_class and classifiers:
            logger.warning("degenerate_fold", fold=fold, reason="single-class training fold",
                           label=int(train_labels[0]))
            base_rate = float(train_labels.mean())
            scores_by_classifier = {name: np.full(test_idx.size, base_rate) for name in classifiers}
        else:
            scores_by_classifier = recipe([samples[i] for i in train_idx], [samples[i] for i in test_idx])
        for classifier, scores in scores_by_classifier.items():
            scores = np.asarray(scores, dtype=float)
            if scores.shape != test_idx.shape:
                raise DataError(f"{classifier}: {scores.size} scores for a fold of {test_idx.size}")
            fold_context = replace(context, classifier=classifier, fold=fold)
            report = evaluate_scores(scores, labels[test_idx], fold_context, threshold)
            if single_class:
                report = replace(report, flags=report.flags + (DEGENERATE_FOLD,))
            if report.flags:
                logger.warning("degenerate_fold", fold=fold, classifier=classifier, flags=list(report.flags))
            result.fold_reports.setdefault(classifier, []).append(report)
            result.oof_scores.setdefault(classifier, np.full(len(samples), np.nan))[test_idx] = scores
        logger.info("fold_complete", fold=fold, k=plan.k, test=len(test_idx), train=len(train_idx))

    for classifier, reports in result.fold_reports.items():
        result.averaged[classifier] = average_reports(reports, replace(context, classifier=classifier, fold=None))
    return result
