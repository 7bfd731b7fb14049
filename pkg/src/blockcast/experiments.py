"""Experiment configuration and the parameter sweeps behind the CLI."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, replace

import numpy as np

from .dataset import Dataset, WindowConfig, build_dataset
from .learn import DEFAULT_ALPHAS, cross_validate, evaluate, stratified_folds, train
from .learn.metrics import EvalMetrics
from .propagation import ArrayConfig, PropagationConfig
from .scenario import GeneratorConfig

SWEEP_PARAMS = ("n", "fs", "t1", "P", "arrays", "fk", "speeds", "antenna-mode")


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 10_000
    fs_hz: float = 4000.0
    w_ms: float = 400.0
    t1_ms: float = 100.0
    p_ms: float = 50.0
    fk_hz: float = 30e9
    bs_elems: int = 16
    ue_elems: int = 4
    q_min: int = 0
    q_max: int = 10
    speed_range: tuple[float, float] = (0.0, 30.0)
    reflector_speed_range: tuple[float, float] = (0.0, 30.0)
    motion_rule: str = "standard"
    duration_ms: float = 1000.0
    master_seed: int = 0
    mode: str = "mimo"
    features: str = "minirocket"
    k: int = 5

    def __post_init__(self):
        for name in ("n", "fs_hz", "w_ms", "t1_ms", "p_ms", "fk_hz", "bs_elems", "ue_elems", "duration_ms", "k"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.mode not in ("mimo", "omni"):
            raise ValueError("mode must be mimo or omni")
        if self.features not in ("minirocket", "rocket12"):
            raise ValueError("features must be minirocket or rocket12")

    def generator(self, **overrides) -> GeneratorConfig:
        return GeneratorConfig(
            q_min=self.q_min,
            q_max=self.q_max,
            speed_range=tuple(self.speed_range),
            reflector_speed_range=tuple(self.reflector_speed_range),
            motion_rule=self.motion_rule,
            duration_ms=self.duration_ms,
            master_seed=self.master_seed,
            **overrides,
        )

    def window(self) -> WindowConfig:
        return WindowConfig(self.w_ms, self.t1_ms, self.p_ms, self.fs_hz)

    def arrays(self) -> ArrayConfig:
        if self.mode == "omni":
            return ArrayConfig.omni(self.fk_hz)
        return ArrayConfig(self.bs_elems, self.ue_elems, self.fk_hz)

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(asdict(self), sort_keys=True).encode()).hexdigest()[:16]


def make_dataset(cfg: ExperimentConfig, prop: PropagationConfig = PropagationConfig()) -> Dataset:
    return build_dataset(cfg.n, cfg.generator(), cfg.window(), cfg.arrays(), prop)


def run_cv(ds: Dataset, cfg: ExperimentConfig, alphas=DEFAULT_ALPHAS) -> EvalMetrics:
    return cross_validate(ds.X, ds.y, k=cfg.k, alphas=alphas, seed=cfg.master_seed, mode=cfg.features)


def _parse_range(text: str) -> tuple[float, float]:
    lo, hi = text.split("-")
    return float(lo), float(hi)


def apply_sweep_value(cfg: ExperimentConfig, param: str, value: str) -> ExperimentConfig:
    """Return ``cfg`` with one sweep parameter set from its CLI spelling."""
    if param == "n":
        return replace(cfg, n=int(value))
    if param == "fs":
        return replace(cfg, fs_hz=float(value))
    if param == "t1":
        return replace(cfg, t1_ms=float(value))
    if param == "P":
        return replace(cfg, p_ms=float(value))
    if param == "fk":
        return replace(cfg, fk_hz=float(value))
    if param == "arrays":
        L, M = value.lower().split("x")
        return replace(cfg, bs_elems=int(L), ue_elems=int(M), mode="mimo")
    if param == "antenna-mode":
        return replace(cfg, mode=value)
    if param == "speeds":
        ue, refl = value.split("/")
        return replace(cfg, speed_range=_parse_range(ue), reflector_speed_range=_parse_range(refl))
    raise ValueError(f"unknown sweep parameter {param!r}")


def sweep(param: str, values: list[str], base: ExperimentConfig, test_n: int = 2000, progress=None) -> list[dict]:
    """One row of mean CV metrics per value, in the given order."""
    if param not in SWEEP_PARAMS:
        raise ValueError(f"unknown sweep parameter {param!r}")
    if not values:
        raise ValueError("empty value list")
    if param == "speeds":
        return speed_cells(values, base, test_n, progress)
    rows = []
    for v in values:
        cfg = apply_sweep_value(base, param, v)
        m = run_cv(make_dataset(cfg), cfg)
        rows.append({"param": param, "value": v, "accuracy": m.accuracy, "f1": m.f1, "auc": m.auc, "config_hash": cfg.digest()})
        if progress:
            progress(rows[-1])
    return rows


def speed_cells(cells: list[str], base: ExperimentConfig, test_n: int = 2000, progress=None) -> list[dict]:
    """Joint training over all speeds, evaluation on per-cell test sets.

    The training set uses two moving reflectors for every Q in [2, q_max]
    plus a rotating one for Q >= 9. Each fold gets fresh balanced test
    sets of ``test_n`` scenarios for every (UE/blocker, reflector) speed
    cell; metrics are averaged over folds.
    """
    train_cfg = replace(base, q_min=max(2, base.q_min), motion_rule="mobility")
    ds = make_dataset(train_cfg)
    X, y = ds.X, ds.y
    folds = stratified_folds(y, base.k, base.master_seed)
    results = {c: [] for c in cells}
    for f, test in enumerate(folds):
        train_idx = np.setdiff1d(np.arange(len(y)), test)
        model = train(X[train_idx], y[train_idx], seed=base.master_seed + f, mode=base.features)
        for ci, cell in enumerate(cells):
            cell_cfg = apply_sweep_value(train_cfg, "speeds", cell)
            seed = int(np.random.SeedSequence([base.master_seed, 7, f, ci]).generate_state(1)[0])
            cell_cfg = replace(cell_cfg, n=test_n, master_seed=seed)
            tds = make_dataset(cell_cfg)
            results[cell].append(evaluate(model, tds.X, tds.y))
    rows = []
    for cell in cells:
        acc, f1, auc = np.mean([m.row() for m in results[cell]], axis=0)
        cell_cfg = apply_sweep_value(train_cfg, "speeds", cell)
        rows.append({"param": "speeds", "value": cell, "accuracy": float(acc), "f1": float(f1), "auc": float(auc), "config_hash": cell_cfg.digest()})
        if progress:
            progress(rows[-1])
    return rows
