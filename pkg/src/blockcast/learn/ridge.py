"""Ridge regression classifier with leave-one-out alpha selection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_ALPHAS = tuple(10.0 ** np.arange(-3, 4))


@dataclass
class RidgeModel:
    weights: np.ndarray
    intercept: float
    alpha: float
    mean: np.ndarray
    scale: np.ndarray

    def decision_function(self, X) -> np.ndarray:
        Xs = (np.asarray(X, dtype=float) - self.mean) / self.scale
        return Xs @ self.weights + self.intercept

    def predict(self, X) -> np.ndarray:
        """Labels in {0, 1}; positive scores mean blockage."""
        return (self.decision_function(X) > 0).astype(int)

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "intercept": self.intercept,
            "alpha": self.alpha,
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RidgeModel":
        return cls(
            np.asarray(d["weights"], float),
            float(d["intercept"]),
            float(d["alpha"]),
            np.asarray(d["mean"], float),
            np.asarray(d["scale"], float),
        )


def standardize(X):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    if not np.any(scale > 0):
        raise ValueError("all features are constant")
    scale = np.where(scale > 0, scale, 1.0)
    return (X - mean) / scale, mean, scale


def fit_ridge(X, y, alphas=DEFAULT_ALPHAS) -> RidgeModel:
    """Fit min ||Xw + b - y||^2 + alpha ||w||^2 on standardized features.

    ``y`` may be given in {0, 1} or {-1, +1}. Alpha is chosen from ``alphas``
    by the closed-form leave-one-out error of the ridge hat matrix, which
    is computed from one eigendecomposition of the smaller Gram matrix.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be N x F with one label per row")
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least two examples")
    if set(np.unique(y)) <= {0.0, 1.0}:
        y = 2 * y - 1
    if len(np.unique(y)) < 2:
        raise ValueError("both classes must be present")
    alphas = np.asarray(alphas, dtype=float)
    if np.any(alphas <= 0):
        raise ValueError("alphas must be positive")

    Xs, mean, scale = standardize(X)
    y_mean = y.mean()
    yc = y - y_mean

    if n <= Xs.shape[1]:
        # dual: K = Xs Xs^T = U diag(s) U^T
        s, U = np.linalg.eigh(Xs @ Xs.T)
        s = np.clip(s, 0, None)
        Uy = U.T @ yc
        U2 = U**2
    else:
        s, V = np.linalg.eigh(Xs.T @ Xs)
        s = np.clip(s, 0, None)
        U = Xs @ V  # columns scaled by sqrt(s)
        Uy = V.T @ (Xs.T @ yc)
        U2 = U**2

    best = None
    for a in alphas:
        if n <= Xs.shape[1]:
            fitted = U @ (s / (s + a) * Uy)
            hat = U2 @ (s / (s + a))
        else:
            fitted = U @ (Uy / (s + a))
            hat = U2 @ (1.0 / (s + a))
        # the unpenalized intercept adds 1/n to every leverage
        loo = (yc - fitted) / (1.0 - hat - 1.0 / n)
        err = float(np.mean(loo**2))
        if best is None or err < best[0]:
            best = (err, a)
    alpha = best[1]
    w = solve_ridge(Xs, yc, alpha, (s, U, Uy, n <= Xs.shape[1], V if n > Xs.shape[1] else None))
    return RidgeModel(w, float(y_mean), float(alpha), mean, scale)


def solve_ridge(Xs, yc, alpha, decomposition=None):
    """Weights for centered, standardized data at a single alpha."""
    if decomposition is None:
        F = Xs.shape[1]
        if Xs.shape[0] <= F:
            c = np.linalg.solve(Xs @ Xs.T + alpha * np.eye(Xs.shape[0]), yc)
            return Xs.T @ c
        return np.linalg.solve(Xs.T @ Xs + alpha * np.eye(F), Xs.T @ yc)
    s, U, Uy, dual, V = decomposition
    if dual:
        return Xs.T @ (U @ (Uy / (s + alpha)))
    return V @ (Uy / (s + alpha))
