"""Stratified k-fold evaluation of the feature + ridge pipeline."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import FeatureTransform, apply_transform, fit_transform
from .metrics import EvalMetrics, compute_metrics
from .ridge import DEFAULT_ALPHAS, RidgeModel, fit_ridge


@dataclass
class TrainedModel:
    transform: FeatureTransform
    ridge: RidgeModel

    def scores(self, X) -> np.ndarray:
        return self.ridge.decision_function(apply_transform(self.transform, X))

    def predict(self, X) -> np.ndarray:
        return (self.scores(X) > 0).astype(int)

    def to_dict(self) -> dict:
        return {"transform": self.transform.to_dict(), "ridge": self.ridge.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        return cls(FeatureTransform.from_dict(d["transform"]), RidgeModel.from_dict(d["ridge"]))


def train(X, y, seed: int = 0, alphas=DEFAULT_ALPHAS, mode: str = "minirocket") -> TrainedModel:
    transform, feats = fit_transform(X, seed=seed, mode=mode)
    return TrainedModel(transform, fit_ridge(feats, y, alphas))


def evaluate(model: TrainedModel, X, y) -> EvalMetrics:
    s = model.scores(X)
    return compute_metrics(y, (s > 0).astype(int), s)


def stratified_folds(y, k: int, seed: int = 0) -> list[np.ndarray]:
    """Disjoint test-index sets covering every example once.

    Each class is shuffled and the concatenation is dealt round-robin, so
    fold sizes differ by at most one and class ratios are preserved.
    """
    y = np.asarray(y)
    if k < 2 or len(y) < k:
        raise ValueError("need 2 <= k <= N")
    rng = np.random.default_rng(seed)
    order = np.concatenate([rng.permutation(np.flatnonzero(y == c)) for c in np.unique(y)])
    return [np.sort(order[i::k]) for i in range(k)]


def cross_validate(
    X, y, k: int = 5, alphas=DEFAULT_ALPHAS, seed: int = 0, mode: str = "minirocket", return_models: bool = False
):
    """Mean and per-fold metrics; the transform and ridge see training folds only."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(int)
    folds = stratified_folds(y, k, seed)
    per_fold, models = [], []
    for i, test in enumerate(folds):
        train_idx = np.setdiff1d(np.arange(len(y)), test)
        if len(np.unique(y[test])) < 2 or len(np.unique(y[train_idx])) < 2:
            raise ValueError(f"fold {i} holds a single class")
        model = train(X[train_idx], y[train_idx], seed=seed + i, alphas=alphas, mode=mode)
        per_fold.append(evaluate(model, X[test], y[test]))
        models.append(model)
    mean = EvalMetrics(*np.mean([m.row() for m in per_fold], axis=0).tolist(), folds=per_fold)
    if return_models:
        return mean, models, folds
    return mean
