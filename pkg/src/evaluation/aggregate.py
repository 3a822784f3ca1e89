"""Averaging metric reports across folds, species or classifiers."""
import math
from dataclasses import fields
from typing import Iterable, Sequence

from src.errors import DataError
from src.evaluation.types import MetricReport, ReportContext

AVERAGE_LABEL = "Average"
GROUP_FIELDS = ("species", "classifier", "protocol")
_AVERAGED = ("ca", "sn", "sp", "precision", "f1", "mcc")


def average_reports(reports: Sequence[MetricReport], context: ReportContext) -> MetricReport:
    """Unweighted mean of every metric; counts are summed and flags merged.

    Raises:
        DataError: If no reports are given
    """
    if not reports:
        raise DataError("no reports to average")
    means = {name: math.fsum(getattr(r, name) for r in reports) / len(reports) for name in _AVERAGED}
    aucs = [r.auc for r in reports if r.auc is not None]
    counts = sum((r.counts for r in reports[1:]), reports[0].counts)
    flags = sorted({flag for r in reports for flag in r.flags})
    return MetricReport(
        **means,
        counts=counts,
        auc=math.fsum(aucs) / len(aucs) if aucs else None,
        context=context,
        flags=tuple(flags),
    )


def aggregate_reports(
    reports: Iterable[MetricReport],
    group_by: Sequence[str] = ("classifier", "protocol"),
) -> list[MetricReport]:
    """Average reports within each group of context fields.

    Context fields outside ``group_by`` read ``Average`` in the output (the
    fold is cleared). Groups come out sorted by their key, so the result does
    not depend on input order.

    Raises:
        ValueError: On an unknown grouping field
        DataError: If no reports are given
    """
    unknown = set(group_by) - set(GROUP_FIELDS)
    if unknown:
        raise ValueError(f"cannot group by {sorted(unknown)}; choose from {GROUP_FIELDS}")
    reports = list(reports)
    if not reports:
        raise DataError("no reports to aggregate")

    groups: dict[tuple[str, ...], list[MetricReport]] = {}
    for report in reports:
        key = tuple(getattr(report.context, name) for name in group_by)
        groups.setdefault(key, []).append(report)

    aggregated = []
    for key in sorted(groups):
        values = {f.name: AVERAGE_LABEL for f in fields(ReportContext) if f.name in GROUP_FIELDS}
        values.update(zip(group_by, key))
        aggregated.append(average_reports(groups[key], ReportContext(**values, fold=None)))
    return aggregated
