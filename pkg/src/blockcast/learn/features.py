"""Rocket-family convolutional features with PPV pooling.

``minirocket`` is the deterministic 84-kernel construction (length 9,
weights in {-1, 2}, exponentially spaced dilations, quantile biases).
``rocket12`` draws 10,000 random kernels of length 12 instead; its biases
are also quantiles of training convolutions so both modes share the
fit/apply split.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import os

import numpy as np
import numba
from numba import njit, prange

# an old system TBB makes numba warn at first parallel call; try it last
if "NUMBA_THREADING_LAYER" not in os.environ and "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

_INDICES = np.array(list(combinations(range(9), 3)), dtype=np.int32)
NUM_KERNELS = len(_INDICES)  # 84
KERNEL_LENGTH = 9
ROCKET12_LENGTH = 12


@dataclass
class FeatureTransform:
    mode: str
    input_length: int
    dilations: np.ndarray
    num_features_per_dilation: np.ndarray
    biases: np.ndarray
    # rocket12 only
    weights: np.ndarray = field(default_factory=lambda: np.zeros((0, ROCKET12_LENGTH)))
    paddings: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int32))

    @property
    def num_features(self) -> int:
        return int(len(self.biases))

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "input_length": self.input_length,
            "dilations": self.dilations.tolist(),
            "num_features_per_dilation": self.num_features_per_dilation.tolist(),
            "biases": self.biases.tolist(),
            "weights": self.weights.tolist(),
            "paddings": self.paddings.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureTransform":
        return cls(
            mode=d["mode"],
            input_length=int(d["input_length"]),
            dilations=np.asarray(d["dilations"], dtype=np.int32),
            num_features_per_dilation=np.asarray(d["num_features_per_dilation"], dtype=np.int32),
            biases=np.asarray(d["biases"], dtype=np.float64),
            weights=np.asarray(d["weights"], dtype=np.float64).reshape(-1, ROCKET12_LENGTH),
            paddings=np.asarray(d["paddings"], dtype=np.int32),
        )


def znormalize(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    mu = X.mean(axis=1, keepdims=True)
    sd = X.std(axis=1, keepdims=True)
    return np.where(sd > 0, (X - mu) / np.where(sd > 0, sd, 1.0), 0.0)


def fit_dilations(input_length: int, num_features: int = 10_000, max_dilations_per_kernel: int = 32):
    per_kernel = num_features // NUM_KERNELS
    true_max = min(per_kernel, max_dilations_per_kernel)
    multiplier = per_kernel / true_max
    max_exponent = np.log2((input_length - 1) / (KERNEL_LENGTH - 1))
    dilations, counts = np.unique(
        np.logspace(0, max_exponent, true_max, base=2).astype(np.int32), return_counts=True
    )
    per_dilation = (counts * multiplier).astype(np.int32)
    remainder = per_kernel - per_dilation.sum()
    i = 0
    while remainder > 0:
        per_dilation[i] += 1
        remainder -= 1
        i = (i + 1) % len(per_dilation)
    return dilations.astype(np.int32), per_dilation


def quantiles(n: int) -> np.ndarray:
    # low-discrepancy sequence over (0, 1)
    return (np.arange(1, n + 1) * ((np.sqrt(5) + 1) / 2)) % 1


@njit(cache=True)
def _conv_parts(x, dilation):
    """C_alpha and the 9 shifted C_gamma rows for one series and dilation."""
    n = x.shape[0]
    padding = ((KERNEL_LENGTH - 1) * dilation) // 2
    A = -x
    G = 3.0 * x
    c_alpha = A.copy()
    c_gamma = np.zeros((KERNEL_LENGTH, n))
    c_gamma[KERNEL_LENGTH // 2] = G
    start = dilation
    end = n - padding
    for g in range(KERNEL_LENGTH // 2):
        if end > 0:
            c_alpha[n - end :] += A[:end]
            c_gamma[g, n - end :] = G[:end]
        end += dilation
    for g in range(KERNEL_LENGTH // 2 + 1, KERNEL_LENGTH):
        if start < n:
            c_alpha[: n - start] += A[start:]
            c_gamma[g, : n - start] = G[start:]
        start += dilation
    return c_alpha, c_gamma


@njit(cache=True)
def _fit_biases(X, picks, dilations, per_dilation, qs, indices):
    num_features = indices.shape[0] * per_dilation.sum()
    biases = np.zeros(num_features)
    f0 = 0
    k_total = 0
    for di in range(dilations.shape[0]):
        nf = per_dilation[di]
        for k in range(indices.shape[0]):
            c_alpha, c_gamma = _conv_parts(X[picks[k_total]], dilations[di])
            C = c_alpha + c_gamma[indices[k, 0]] + c_gamma[indices[k, 1]] + c_gamma[indices[k, 2]]
            biases[f0 : f0 + nf] = np.quantile(C, qs[f0 : f0 + nf])
            f0 += nf
            k_total += 1
    return biases


@njit(cache=True, parallel=True)
def _transform(X, dilations, per_dilation, biases, indices):
    n_ex, n = X.shape
    num_features = indices.shape[0] * per_dilation.sum()
    out = np.zeros((n_ex, num_features))
    for e in prange(n_ex):
        f0 = 0
        for di in range(dilations.shape[0]):
            dilation = dilations[di]
            padding = ((KERNEL_LENGTH - 1) * dilation) // 2
            nf = per_dilation[di]
            c_alpha, c_gamma = _conv_parts(X[e], dilation)
            for k in range(indices.shape[0]):
                C = c_alpha + c_gamma[indices[k, 0]] + c_gamma[indices[k, 1]] + c_gamma[indices[k, 2]]
                # alternate full (zero-padded) and valid outputs
                if (di % 2 + k) % 2 == 1:
                    C = C[padding : n - padding]
                m = C.shape[0]
                for j in range(nf):
                    b = biases[f0 + j]
                    cnt = 0
                    for i in range(m):
                        if C[i] > b:
                            cnt += 1
                    out[e, f0 + j] = cnt / m
                f0 += nf
    return out


@njit(cache=True)
def _conv12(x, w, dilation, padding):
    n = x.shape[0]
    klen = w.shape[0]
    out_len = n + 2 * padding - (klen - 1) * dilation
    out = np.zeros(out_len)
    for i in range(out_len):
        s = 0.0
        idx = i - padding
        for j in range(klen):
            if 0 <= idx < n:
                s += w[j] * x[idx]
            idx += dilation
        out[i] = s
    return out


@njit(cache=True, parallel=True)
def _transform12(X, weights, dilations, paddings, biases):
    n_ex = X.shape[0]
    nk = weights.shape[0]
    out = np.zeros((n_ex, nk))
    for e in prange(n_ex):
        for k in range(nk):
            C = _conv12(X[e], weights[k], dilations[k], paddings[k])
            out[e, k] = np.mean(C > biases[k])
    return out


def _check(X, min_len):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("expected a non-empty 2-D array of windows")
    if X.shape[1] < min_len:
        raise ValueError(f"windows of {X.shape[1]} samples are shorter than the minimal kernel span {min_len}")
    return X


def fit_transform(X, seed: int = 0, mode: str = "minirocket", num_features: int = 10_000):
    """Fit biases on ``X`` and return ``(transform, features)``.

    Windows are z-normalized first, so features ignore the absolute level.
    """
    rng = np.random.default_rng(seed)
    if mode == "minirocket":
        X = _check(X, KERNEL_LENGTH)
        Z = znormalize(X)
        dilations, per_dilation = fit_dilations(Z.shape[1], num_features)
        n_feat = NUM_KERNELS * int(per_dilation.sum())
        picks = rng.integers(0, Z.shape[0], NUM_KERNELS * len(dilations))
        biases = _fit_biases(Z, picks, dilations, per_dilation, quantiles(n_feat), _INDICES)
        t = FeatureTransform(mode, Z.shape[1], dilations, per_dilation, biases)
    elif mode == "rocket12":
        X = _check(X, ROCKET12_LENGTH)
        Z = znormalize(X)
        n = Z.shape[1]
        w = rng.normal(size=(num_features, ROCKET12_LENGTH))
        w -= w.mean(axis=1, keepdims=True)
        max_exp = np.log2((n - 1) / (ROCKET12_LENGTH - 1))
        dil = np.floor(2.0 ** rng.uniform(0, max_exp, num_features)).astype(np.int32)
        pad = np.where(rng.integers(0, 2, num_features) == 1, ((ROCKET12_LENGTH - 1) * dil) // 2, 0).astype(np.int32)
        picks = rng.integers(0, Z.shape[0], num_features)
        qs = rng.uniform(0, 1, num_features)
        biases = np.array(
            [np.quantile(_conv12(Z[picks[k]], w[k], dil[k], pad[k]), qs[k]) for k in range(num_features)]
        )
        t = FeatureTransform(mode, n, dil, np.ones(num_features, dtype=np.int32), biases, w, pad)
    else:
        raise ValueError(f"unknown feature mode {mode!r}")
    return t, apply_transform(t, X)


def apply_transform(t: FeatureTransform, X) -> np.ndarray:
    """Features of ``X`` under a fitted transform (biases are never refit)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != t.input_length:
        raise ValueError(f"expected windows of length {t.input_length}, got shape {X.shape}")
    Z = znormalize(X)
    if t.mode == "minirocket":
        return _transform(Z, t.dilations, t.num_features_per_dilation, t.biases, _INDICES)
    return _transform12(Z, t.weights, t.dilations, t.paddings, t.biases)
