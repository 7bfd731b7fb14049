from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata


@dataclass
class EvalMetrics:
    accuracy: float
    f1: float
    auc: float
    folds: list["EvalMetrics"] = field(default_factory=list)

    def row(self) -> tuple[float, float, float]:
        return (self.accuracy, self.f1, self.auc)


def roc_auc(labels, scores) -> float:
    """Mann-Whitney estimate of the ROC area; tied scores share their rank."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=float)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC is undefined with a single class")
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def compute_metrics(labels, predicted, scores) -> EvalMetrics:
    labels = np.asarray(labels).astype(int)
    predicted = np.asarray(predicted).astype(int)
    if labels.shape != predicted.shape or labels.shape != np.shape(scores):
        raise ValueError("labels, predictions and scores must have equal lengths")
    tp = int(np.sum((labels == 1) & (predicted == 1)))
    fp = int(np.sum((labels == 0) & (predicted == 1)))
    fn = int(np.sum((labels == 1) & (predicted == 0)))
    acc = float(np.mean(labels == predicted))
    f1 = 2 * tp / (2 * tp + fp + fn) if tp + fp + fn else 1.0
    return EvalMetrics(acc, float(f1), roc_auc(labels, scores))
