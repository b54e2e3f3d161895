"""Confusion matrix and the accuracy/precision/recall/F1 report."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ConfusionMatrix:
    classes: list
    counts: np.ndarray  # rows = true class, columns = predicted class

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def one_vs_rest(self, class_index: int) -> tuple[int, int, int, int]:
        """(TP, FP, FN, TN) treating one class as positive."""
        tp = int(self.counts[class_index, class_index])
        fp = int(self.counts[:, class_index].sum()) - tp
        fn = int(self.counts[class_index, :].sum()) - tp
        tn = self.total - tp - fp - fn
        return tp, fp, fn, tn


@dataclass
class ClassMetrics:
    label: object
    support: int
    precision: float
    recall: float
    f1: float


@dataclass
class MetricsReport:
    accuracy: float
    per_class: list[ClassMetrics]

    def by_label(self, label) -> ClassMetrics:
        for m in self.per_class:
            if m.label == label:
                return m
        raise KeyError(f"no metrics for class {label!r}")


def confusion_matrix(y_true, y_pred, classes: list) -> ConfusionMatrix:
    index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        if t not in index:
            raise ValueError(f"true label {t!r} not in class list {classes}")
        if p not in index:
            raise ValueError(f"predicted label {p!r} not in class list {classes}")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(list(classes), counts)


def compute_metrics(y_true, y_pred, classes: list) -> tuple[MetricsReport, ConfusionMatrix]:
    """One-vs-rest per-class metrics; accuracy is trace over total."""
    if len(y_true) != len(y_pred):
        raise ValueError(f"{len(y_true)} true labels vs {len(y_pred)} predictions")
    cm = confusion_matrix(y_true, y_pred, classes)
    per_class = []
    for i, label in enumerate(classes):
        tp, fp, fn, _ = cm.one_vs_rest(i)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class.append(ClassMetrics(label, tp + fn, precision, recall, f1))
    accuracy = float(np.trace(cm.counts)) / cm.total if cm.total else 0.0
    return MetricsReport(accuracy, per_class), cm


def _label_str(label) -> str:
    return label.value if hasattr(label, "value") else str(label)


def format_metrics_table(report: MetricsReport, title: str = "") -> str:
    """Aligned text table: one row per class plus the overall accuracy."""
    lines = []
    if title:
        lines.append(title)
    header = f"{'class':<10} {'support':>8} {'precision':>10} {'recall':>8} {'f1':>8}"
    lines.append(header)
    lines.append("-" * len(header))
    for m in report.per_class:
        lines.append(
            f"{_label_str(m.label):<10} {m.support:>8d} {m.precision:>10.3f} "
            f"{m.recall:>8.3f} {m.f1:>8.3f}"
        )
    lines.append(f"overall accuracy: {report.accuracy:.4f}")
    return "\n".join(lines)


def metrics_csv(report: MetricsReport) -> str:
    """Report schema: class,support,precision,recall,f1 + overall footer."""
    lines = ["class,support,precision,recall,f1"]
    for m in report.per_class:
        lines.append(
            f"{_label_str(m.label)},{m.support},{m.precision:.6f},{m.recall:.6f},{m.f1:.6f}"
        )
    lines.append(f"overall_accuracy,,{report.accuracy:.6f},,")
    return "\n".join(lines) + "\n"


def format_actual_predicted(cm: ConfusionMatrix) -> str:
    """Actual vs predicted count table (cross-database report shape)."""
    labels = [_label_str(c) for c in cm.classes]
    width = max(9, *(len(s) for s in labels)) + 1
    head = f"{'actual':<{width}}{'count':>7} | " + "".join(f"{s:>{width}}" for s in labels)
    lines = [head, "-" * len(head)]
    for i, s in enumerate(labels):
        row = "".join(f"{int(cm.counts[i, j]):>{width}d}" for j in range(len(labels)))
        lines.append(f"{s:<{width}}{int(cm.counts[i].sum()):>7d} | {row}")
    return "\n".join(lines)


def confusion_csv(cm: ConfusionMatrix) -> str:
    labels = [_label_str(c) for c in cm.classes]
    lines = ["actual\\predicted," + ",".join(labels)]
    for i, s in enumerate(labels):
        lines.append(s + "," + ",".join(str(int(v)) for v in cm.counts[i]))
    return "\n".join(lines) + "\n"
