"""Class-balanced evaluation metrics.

All metrics average per-class quantities with equal class weight, so a
majority class cannot mask minority failure. Classes with no ground-truth
instances inside the evaluation mask are excluded from the means (their
per_class_acc slot is NaN).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class MetricsReport:
    """Evaluation summary for one trained model.

    per_class_acc is a length-m vector of class recalls; bacc is its mean
    over classes present in the mask, disparity its population standard
    deviation.
    """

    bacc: float
    macro_f1: float
    disparity: float
    per_class_acc: np.ndarray
    runtime_ms: float = 0.0
    virtual_edge_ratio: float = 0.0


def per_class_accuracy(
    preds: np.ndarray, labels: np.ndarray, mask: np.ndarray, m: int
) -> np.ndarray:
    """Recall of each class over `mask`; NaN where the class is absent."""
    mask = np.asarray(mask, dtype=np.int64)
    if mask.size == 0:
        raise ValueError("evaluation mask is empty")
    yt = labels[mask]
    yp = preds[mask]
    acc = np.full(m, np.nan)
    for j in range(m):
        members = yt == j
        if members.any():
            acc[j] = float((yp[members] == j).mean())
    return acc


def balanced_accuracy(
    preds: np.ndarray, labels: np.ndarray, mask: np.ndarray, m: int
) -> float:
    """Mean per-class recall over classes present in the mask."""
    return float(np.nanmean(per_class_accuracy(preds, labels, mask, m)))


def macro_f1(preds: np.ndarray, labels: np.ndarray, mask: np.ndarray, m: int) -> float:
    """Mean one-vs-rest F1 over classes present in the mask.

    A present class with zero predicted and zero true positives gets F1=0
    rather than an indeterminate value.
    """
    mask = np.asarray(mask, dtype=np.int64)
    if mask.size == 0:
        raise ValueError("evaluation mask is empty")
    yt = labels[mask]
    yp = preds[mask]
    scores = []
    for j in range(m):
        if not (yt == j).any():
            continue
        tp = float(((yp == j) & (yt == j)).sum())
        fp = float(((yp == j) & (yt != j)).sum())
        fn = float(((yp != j) & (yt == j)).sum())
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom > 0 else 0.0)
    return float(np.mean(scores))


def disparity(preds: np.ndarray, labels: np.ndarray, mask: np.ndarray, m: int) -> float:
    """Population standard deviation of per-class recalls.

    Satisfies mean(acc^2) = disparity^2 + bacc^2 over the present classes.
    """
    acc = per_class_accuracy(preds, labels, mask, m)
    present = acc[~np.isnan(acc)]
    return float(np.sqrt(np.mean((present - present.mean()) ** 2)))


def evaluate(
    preds: np.ndarray,
    labels: np.ndarray,
    mask: np.ndarray,
    m: int,
    runtime_ms: float = 0.0,
    virtual_edge_ratio: float = 0.0,
) -> MetricsReport:
    """Bundle all balanced metrics for one prediction vector."""
    acc = per_class_accuracy(preds, labels, mask, m)
    present = acc[~np.isnan(acc)]
    return MetricsReport(
        bacc=float(present.mean()),
        macro_f1=macro_f1(preds, labels, mask, m),
        disparity=float(np.sqrt(np.mean((present - present.mean()) ** 2))),
        per_class_acc=acc,
        runtime_ms=runtime_ms,
        virtual_edge_ratio=virtual_edge_ratio,
    )
