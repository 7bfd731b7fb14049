from .features import FeatureTransform, apply_transform, fit_transform
from .metrics import EvalMetrics, compute_metrics, roc_auc
from .ridge import DEFAULT_ALPHAS, RidgeModel, fit_ridge
from .validation import TrainedModel, cross_validate, evaluate, stratified_folds, train

__all__ = [
    "DEFAULT_ALPHAS",
    "EvalMetrics",
    "FeatureTransform",
    "RidgeModel",
    "TrainedModel",
    "apply_transform",
    "compute_metrics",
    "cross_validate",
    "evaluate",
    "fit_ridge",
    "fit_transform",
    "roc_auc",
    "stratified_folds",
    "train",
]
