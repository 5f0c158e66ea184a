"""Confusion matrices and macro-averaged classification metrics."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._jsonio import dumps


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are actual classes, columns predicted classes."""

    counts: np.ndarray
    class_names: tuple[str, ...]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion(actual: Sequence[int], predicted: Sequence[int], k: int,
              class_names: Sequence[str] | None = None) -> ConfusionMatrix:
    actual = np.asarray(actual, dtype=int)
    predicted = np.asarray(predicted, dtype=int)
    if actual.shape != predicted.shape or actual.ndim != 1:
        raise ValueError("actual and predicted must be 1-D with equal length")
    for name, v in (("actual", actual), ("predicted", predicted)):
        if v.size and (v.min() < 0 or v.max() >= k):
            raise ValueError(f"{name} label outside [0, {k})")
    counts = np.zeros((k, k), dtype=int)
    np.add.at(counts, (actual, predicted), 1)
    names = tuple(class_names) if class_names is not None else tuple(str(c) for c in range(k))
    if len(names) != k:
        raise ValueError("need one class name per class")
    return ConfusionMatrix(counts, names)


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros(num.shape, dtype=float)
    np.divide(num, den, out=out, where=den > 0)
    return out


def summarize(cm: ConfusionMatrix) -> dict:
    """Accuracy plus macro precision, recall and F1.

    A class whose precision (or recall) has an empty denominator contributes
    0 to the macro mean but still counts in the number of classes.
    """
    c = cm.counts.astype(float)
    total = c.sum()
    if total <= 0:
        raise ValueError("confusion matrix is empty")
    tp = np.diag(c)
    precision = _safe_ratio(tp, c.sum(axis=0))
    recall = _safe_ratio(tp, c.sum(axis=1))
    f1 = _safe_ratio(2 * precision * recall, precision + recall)
    return {
        "accuracy": float(tp.sum() / total),
        "precision": float(precision.mean()),
        "recall": float(recall.mean()),
        "f1": float(f1.mean()),
    }


def report_dict(cm: ConfusionMatrix, extra: dict | None = None) -> dict:
    out = {"metrics": summarize(cm), "confusion_matrix": cm.counts.tolist(),
           "class_names": list(cm.class_names)}
    if extra:
        out.update(extra)
    return out


def report_json(cm: ConfusionMatrix, extra: dict | None = None) -> str:
    return dumps(report_dict(cm, extra)) + "\n"


def format_table(cm: ConfusionMatrix) -> str:
    """Aligned plain-text confusion matrix followed by the metrics."""
    names = cm.class_names
    width = max(6, max(len(n) for n in names), len(str(cm.counts.max())))
    head = "actual\\pred".ljust(width + 2) + " ".join(n.rjust(width) for n in names)
    lines = [head]
    for name, row in zip(names, cm.counts):
        lines.append(name.ljust(width + 2) + " ".join(str(v).rjust(width) for v in row))
    lines.append("")
    for key, value in summarize(cm).items():
        lines.append(f"{key:<10} {value:.4f}")
    return "\n".join(lines) + "\n"
