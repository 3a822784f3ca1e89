"""Tab-separated report tables and CSV point files."""
import json
from typing import Any, Iterable, Optional

import numpy as np

from src.corpus.types import SiteLabel
from src.evaluation.roc import RocCurve
from src.evaluation.types import METRIC_COLUMNS, METRIC_HEADERS, MetricReport
from src.tsne.embed import Embedding2D

REPORT_HEADER = ("Species", "Classifier", *(METRIC_HEADERS[c] for c in METRIC_COLUMNS), "Flags")
FOLD_HEADER = ("Species", "Classifier", "Fold", *(METRIC_HEADERS[c] for c in METRIC_COLUMNS), "TP", "TN", "FP", "FN", "Flags")
DECIMALS = 4


def _number(value: Optional[float]) -> str:
    return "NA" if value is None else f"{value:.{DECIMALS}f}"


def _metrics(report: MetricReport) -> list[str]:
    return [_number(getattr(report, column)) for column in METRIC_COLUMNS]


def format_report_table(reports: Iterable[MetricReport]) -> str:
    """Species, Classifier, ACC, Sn, Sp, MCC, AUC, F1 rows plus a flags column."""
    rows = ["\t".join(REPORT_HEADER)]
    for report in reports:
        context = report.context
        rows.append("\t".join([context.species, context.classifier, *_metrics(report), ",".join(report.flags)]))
    return "\n".join(rows) + "\n"


def format_fold_table(reports: Iterable[MetricReport]) -> str:
    """Per-fold rows with the confusion counts."""
    rows = ["\t".join(FOLD_HEADER)]
    for report in reports:
        context, counts = report.context, report.counts
        rows.append(
            "\t".join(
                [
                    context.species,
                    context.classifier,
                    str(context.fold),
                    *_metrics(report),
                    *(str(v) for v in (counts.tp, counts.tn, counts.fp, counts.fn)),
                    ",".join(report.flags),
                ]
            )
        )
    return "\n".join(rows) + "\n"


def format_roc_csv(curve: RocCurve) -> str:
    """``fpr,tpr,threshold`` rows; the first threshold is ``inf``."""
    rows = ["fpr,tpr,threshold"]
    for fpr, tpr, threshold in zip(curve.fpr, curve.tpr, curve.thresholds):
        rows.append(f"{float(fpr)!r},{float(tpr)!r},{'inf' if np.isinf(threshold) else repr(float(threshold))}")
    return "\n".join(rows) + "\n"


def format_embedding_csv(embedding: Embedding2D, metadata: dict[str, Any]) -> str:
    """Metadata comment line, then ``origin,label,x,y`` rows."""
    header = {**metadata, "kl_divergence": embedding.kl_divergence, "perplexity": embedding.perplexity}
    rows = ["# " + json.dumps(header, sort_keys=True), "origin,label,x,y"]
    origins = embedding.origins or [str(i) for i in range(len(embedding))]
    for origin, label, (x, y) in zip(origins, embedding.labels, embedding.points):
        rows.append(f"{origin},{SiteLabel.from_y(label).value},{float(x)!r},{float(y)!r}")
    return "\n".join(rows) + "\n"
