"""Binary classification metrics and ROC analysis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ModelError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def as_dict(self) -> dict[str, int]:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class ClassificationMetrics:
    """Scores are ``None`` where their denominator is zero."""

    confusion: ConfusionMatrix
    precision: float | None
    recall: float | None
    f1: float | None
    accuracy: float | None

    @property
    def undefined(self) -> tuple[str, ...]:
        return tuple(k for k in ("precision", "recall", "f1", "accuracy") if getattr(self, k) is None)

    def as_dict(self) -> dict:
        return {**self.confusion.as_dict(), "precision": self.precision, "recall": self.recall,
                "f1": self.f1, "accuracy": self.accuracy, "undefined": list(self.undefined)}


def _binary(values, name: str) -> np.ndarray:
    arr = np.asarray(values).reshape(-1)
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError(f"{name} must be 0/1")
    return arr.astype(np.int64)


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def classification_metrics(labels, predictions) -> ClassificationMetrics:
    y = _binary(labels, "labels")
    yhat = _binary(predictions, "predictions")
    if len(y) != len(yhat):
        raise ValueError("labels and predictions differ in length")
    tp = int(np.sum((y == 1) & (yhat == 1)))
    fp = int(np.sum((y == 0) & (yhat == 1)))
    tn = int(np.sum((y == 0) & (yhat == 0)))
    fn = int(np.sum((y == 1) & (yhat == 0)))
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    if precision is None or recall is None:
        f1 = None
    elif precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return ClassificationMetrics(ConfusionMatrix(tp, fp, tn, fn), precision, recall, f1,
                                 _ratio(tp + tn, len(y)))


@dataclass(frozen=True)
class RocCurve:
    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


def roc_auc(labels, scores) -> RocCurve:
    """ROC over every distinct score, highest first, starting at (0, 0).

    Tied scores move the curve diagonally, so the trapezoid area equals
    P(s+ > s-) + P(s+ = s-)/2.
    """
    y = _binary(labels, "labels")
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    if len(y) != len(s):
        raise ValueError("labels and scores differ in length")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ModelError("ROC needs both classes")
    order = np.argsort(-s, kind="mergesort")
    s_sorted, y_sorted = s[order], y[order]
    # last index of each run of equal scores
    cut = np.flatnonzero(np.diff(s_sorted) != 0)
    ends = np.concatenate([cut, [len(s) - 1]])
    tp = np.cumsum(y_sorted)[ends]
    fp = (ends + 1) - tp
    tpr = np.concatenate([[0.0], tp / n_pos])
    fpr = np.concatenate([[0.0], fp / n_neg])
    thresholds = np.concatenate([[np.inf], s_sorted[ends]])
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(thresholds, fpr, tpr, auc)
