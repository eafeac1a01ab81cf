"""Confusion matrices and classification metrics.

Every reported scalar is either one division of exact integer counts or a
correctly-rounded sum (math.fsum) followed by one division. That keeps the
values reproducible to the bit across class orderings and lets tests compare
against rational arithmetic without tolerances. Undefined precision/recall
(zero denominator) is reported as 0.0 with the matching *_defined flag
cleared.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from math import fsum

import numpy as np

from .errors import DataError


@dataclass(eq=False)
class ConfusionMatrix:
    """K x K count grid; rows are true classes, columns predicted ones."""

    grid: np.ndarray
    labels: tuple[str, ...]

    @property
    def total(self) -> int:
        return int(self.grid.sum())


@dataclass(frozen=True)
class ClassMetrics:
    label: str
    precision: float
    recall: float
    f1: float
    support: int
    precision_defined: bool
    recall_defined: bool


@dataclass(frozen=True)
class MetricsReport:
    labels: tuple[str, ...]
    per_class: tuple[ClassMetrics, ...]
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    micro_precision: float
    micro_recall: float
    micro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    total: int


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def confusion_matrix(y_true, y_pred, n_classes: int,
                     class_labels=None) -> ConfusionMatrix:
    yt = np.asarray(y_true, dtype=np.int64)
    yp = np.asarray(y_pred, dtype=np.int64)
    if yt.shape != yp.shape or yt.ndim != 1:
        raise DataError(
            f"label vectors must be 1-d and equal length, got {yt.shape} and {yp.shape}")
    if n_classes < 1:
        raise DataError(f"n_classes must be >= 1, got {n_classes}")
    if yt.size:
        lo = min(int(yt.min()), int(yp.min()))
        hi = max(int(yt.max()), int(yp.max()))
        if lo < 0 or hi >= n_classes:
            raise DataError(
                f"labels must lie in 0..{n_classes - 1}, got range [{lo}, {hi}]")
    if class_labels is None:
        class_labels = tuple(str(i) for i in range(n_classes))
    else:
        class_labels = tuple(class_labels)
        if len(class_labels) != n_classes:
            raise DataError(
                f"{len(class_labels)} class labels for {n_classes} classes")
    grid = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(grid, (yt, yp), 1)
    return ConfusionMatrix(grid=grid, labels=class_labels)


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    total = cm.total
    if total == 0:
        raise DataError("cannot compute metrics for an empty confusion matrix")
    k = cm.grid.shape[0]
    row = cm.grid.sum(axis=1)  # support: TP + FN
    col = cm.grid.sum(axis=0)  # predicted volume: TP + FP
    per = []
    for c in range(k):
        tp = int(cm.grid[c, c])
        fp = int(col[c]) - tp
        fn = int(row[c]) - tp
        per.append(ClassMetrics(
            label=cm.labels[c],
            precision=_ratio(tp, tp + fp),
            recall=_ratio(tp, tp + fn),
            f1=_ratio(2 * tp, 2 * tp + fp + fn),
            support=tp + fn,
            precision_defined=(tp + fp) > 0,
            recall_defined=(tp + fn) > 0,
        ))
    correct = int(np.trace(cm.grid))
    fp_sum = total - correct
    fn_sum = total - correct
    return MetricsReport(
        labels=cm.labels,
        per_class=tuple(per),
        accuracy=_ratio(correct, total),
        macro_precision=fsum(c.precision for c in per) / k,
        macro_recall=fsum(c.recall for c in per) / k,
        macro_f1=fsum(c.f1 for c in per) / k,
        micro_precision=_ratio(correct, correct + fp_sum),
        micro_recall=_ratio(correct, correct + fn_sum),
        micro_f1=_ratio(2 * correct, 2 * correct + fp_sum + fn_sum),
        weighted_precision=fsum(c.support * c.precision for c in per) / total,
        weighted_recall=fsum(c.support * c.recall for c in per) / total,
        weighted_f1=fsum(c.support * c.f1 for c in per) / total,
        total=total,
    )


def delta_f1(run_without: MetricsReport, run_with: MetricsReport) -> float:
    """Macro-F1 difference, variant without stop-words minus variant with.
    Negative values mean removal hurt."""
    return run_without.macro_f1 - run_with.macro_f1


# --------------------------------------------------------------- emitters


def metrics_to_json(report: MetricsReport) -> str:
    payload = {
        "accuracy": report.accuracy,
        "macro_precision": report.macro_precision,
        "macro_recall": report.macro_recall,
        "macro_f1": report.macro_f1,
        "micro_precision": report.micro_precision,
        "micro_recall": report.micro_recall,
        "micro_f1": report.micro_f1,
        "weighted_precision": report.weighted_precision,
        "weighted_recall": report.weighted_recall,
        "weighted_f1": report.weighted_f1,
        "total": report.total,
        "per_class": [asdict(c) for c in report.per_class],
    }
    return json.dumps(payload, ensure_ascii=False, indent=2)


def metrics_to_csv(report: MetricsReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["class", "precision", "recall", "f1", "support"])
    for c in report.per_class:
        writer.writerow([c.label, repr(c.precision), repr(c.recall),
                         repr(c.f1), c.support])
    return out.getvalue()


def confusion_to_csv(cm: ConfusionMatrix) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["true\\predicted", *cm.labels])
    for c, label in enumerate(cm.labels):
        writer.writerow([label, *(int(v) for v in cm.grid[c])])
    return out.getvalue()
