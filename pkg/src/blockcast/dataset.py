"""Labeled early-warning examples built from simulated traces."""
from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .propagation import ArrayConfig, PropagationConfig, RssTrace, synth_trace
from .scenario import GeneratorConfig, InfeasibleConfigError, gen_scenario, scenario_rng

DEFAULT_DWELL_MS = 20.0
FORMAT_VERSION = 1
_WINDOW_STREAM = 1


class WindowRejected(ValueError):
    """The trace cannot host the requested window layout."""


class DatasetFormatError(ValueError):
    pass


@dataclass(frozen=True)
class WindowConfig:
    w_ms: float = 400.0
    t1_ms: float = 100.0
    p_ms: float = 50.0
    fs_hz: float = 1000.0

    def __post_init__(self):
        if min(self.w_ms, self.t1_ms, self.p_ms, self.fs_hz) <= 0:
            raise ValueError("window lengths and sampling rate must be positive")
        n = self.w_ms * self.fs_hz / 1000.0
        if abs(n - round(n)) > 1e-9:
            raise ValueError("W * fs must be a whole number of samples")

    @property
    def n_samples(self) -> int:
        return int(round(self.w_ms * self.fs_hz / 1000.0))


@dataclass(frozen=True)
class Placement:
    window: tuple[float, float]
    tau_r_ms: float
    T_ms: float


@dataclass
class LabeledExample:
    scenario_id: int
    label: int
    tau_ms: float | None
    tau_r_ms: float
    T_ms: float
    fs_hz: float
    samples: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, LabeledExample):
            return NotImplemented
        return (
            (self.scenario_id, self.label, self.tau_ms, self.tau_r_ms, self.T_ms, self.fs_hz)
            == (other.scenario_id, other.label, other.tau_ms, other.tau_r_ms, other.T_ms, other.fs_hz)
            and np.array_equal(self.samples, other.samples)
        )


@dataclass
class Dataset:
    examples: list[LabeledExample] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    master_seed: int = 0

    def __len__(self):
        return len(self.examples)

    @property
    def X(self) -> np.ndarray:
        if not self.examples:
            return np.zeros((0, 0))
        return np.stack([e.samples for e in self.examples])

    @property
    def y(self) -> np.ndarray:
        return np.array([e.label for e in self.examples], dtype=int)

    def counts(self) -> tuple[int, int]:
        y = self.y
        return int(np.sum(y == 0)), int(np.sum(y == 1))


# --- tau detection ------------------------------------------------------------


def detect_tau(trace: RssTrace, dwell_ms: float = DEFAULT_DWELL_MS) -> float | None:
    """Earliest time the RSS stays below half its initial value for ``dwell_ms``.

    A run that reaches the end of the trace before the dwell elapses still
    counts.
    """
    x = np.asarray(trace.samples, dtype=float)
    if x.size == 0:
        raise ValueError("empty trace")
    ref = x[0]
    if ref <= 0:
        raise ValueError("initial RSS is zero")
    below = x < 0.5 * ref
    need = int(round(dwell_ms * trace.fs_hz / 1000.0)) + 1
    # start indices and lengths of runs of True
    padded = np.concatenate([[False], below, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    starts, ends = edges[::2], edges[1::2]
    ok = ((ends - starts) >= need) | (ends == x.size)
    if not ok.any():
        return None
    i = int(starts[np.argmax(ok)])
    return float(trace.t0_ms + i * 1000.0 / trace.fs_hz)


# --- windows ----------------------------------------------------------------


def place_windows(label: int, tau_or_len: float, rng: np.random.Generator, cfg: WindowConfig) -> Placement:
    """Prediction window, anchor tau_r and observation end T = tau_r - t1.

    For label 1 ``tau_or_len`` is the drop time (the window is centered on
    it); for label 0 it is the trace length and the window is drawn
    uniformly after the first W + t1 ms.
    """
    W, t1, P = cfg.w_ms, cfg.t1_ms, cfg.p_ms
    if label == 1:
        tau = tau_or_len
        if tau < W + t1 + P / 2:
            raise WindowRejected(f"tau={tau} ms too early for W + t1 + P/2")
        a = tau - P / 2
    elif label == 0:
        length = tau_or_len
        if length < W + t1 + P:
            raise WindowRejected("trace too short for the window layout")
        a = float(rng.uniform(W + t1, length - P))
    else:
        raise ValueError(f"label must be 0 or 1, got {label}")
    b = a + P
    tau_r = float(rng.uniform(a, b))
    return Placement((a, b), tau_r, tau_r - t1)


def observation_samples(trace: RssTrace, T_ms: float, cfg: WindowConfig) -> np.ndarray:
    """The W * fs samples ending at the last sample time <= T."""
    n = cfg.n_samples
    end = int(np.floor((T_ms - trace.t0_ms) * trace.fs_hz / 1000.0 + 1e-9))
    start = end - n + 1
    if start < 0 or end >= len(trace.samples):
        raise WindowRejected("observation window outside the trace")
    return np.asarray(trace.samples[start : end + 1], dtype=float)


# --- assembly ---------------------------------------------------------------


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("BLOCKCAST_THREADS", "1")))
    except ValueError:
        return 1


def _simulate(args):
    index, gen_cfg, win_cfg, arrays, prop_cfg, dwell_ms = args
    sc = gen_scenario(index, gen_cfg)
    tr = synth_trace(sc, arrays, win_cfg.fs_hz, prop_cfg)
    tau = detect_tau(tr, dwell_ms)
    label = int(tau is not None)
    rng = scenario_rng(gen_cfg.master_seed, index, _WINDOW_STREAM)
    try:
        pl = place_windows(label, tau if label else tr.duration_ms, rng, win_cfg)
        x = observation_samples(tr, pl.T_ms, win_cfg)
    except WindowRejected:
        return label, None
    return label, LabeledExample(sc.id, label, tau, pl.tau_r_ms, pl.T_ms, win_cfg.fs_hz, x)


def build_dataset(
    n: int,
    gen_cfg: GeneratorConfig = GeneratorConfig(),
    win_cfg: WindowConfig = WindowConfig(),
    arrays: ArrayConfig = ArrayConfig(),
    prop_cfg: PropagationConfig = PropagationConfig(),
    dwell_ms: float = DEFAULT_DWELL_MS,
    start_index: int = 0,
) -> Dataset:
    """Simulate scenarios in index order until both label pools hold n/2 examples.

    Rejected scenarios are skipped, never relabeled. The result depends only
    on the configs and the master seed, not on BLOCKCAST_THREADS.
    """
    if n <= 0 or n % 2:
        raise ValueError("n must be a positive even number")
    half = n // 2
    pools: dict[int, list[LabeledExample]] = {0: [], 1: []}
    attempts = 0
    index = start_index
    workers = _threads()
    batch = max(64, 16 * workers)
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        while len(pools[0]) < half or len(pools[1]) < half:
            jobs = [(i, gen_cfg, win_cfg, arrays, prop_cfg, dwell_ms) for i in range(index, index + batch)]
            results = pool.map(_simulate, jobs, chunksize=8) if pool else map(_simulate, jobs)
            for label, ex in results:
                attempts += 1
                index += 1
                if ex is not None and len(pools[label]) < half:
                    pools[label].append(ex)
                if len(pools[0]) >= half and len(pools[1]) >= half:
                    break
                if attempts >= 10 * n:
                    for lab in (0, 1):
                        if len(pools[lab]) < half and len(pools[lab]) / attempts < 0.01:
                            raise InfeasibleConfigError(
                                f"label-{lab} acceptance {len(pools[lab])}/{attempts} below 1%"
                            )
    finally:
        if pool:
            pool.shutdown()
    examples = sorted(pools[0] + pools[1], key=lambda e: e.scenario_id)
    config = {
        "generator": asdict(gen_cfg),
        "window": asdict(win_cfg),
        "arrays": asdict(arrays),
        "propagation": {k: (repr(v) if isinstance(v, complex) else v) for k, v in asdict(prop_cfg).items()},
        "dwell_ms": dwell_ms,
        "attempts": attempts,
    }
    # normalize through JSON so a loaded dataset compares equal
    return Dataset(examples, json.loads(json.dumps(config)), gen_cfg.master_seed)


# --- persistence --------------------------------------------------------------


def _example_dict(e: LabeledExample) -> dict:
    return {
        "scenario_id": e.scenario_id,
        "label": e.label,
        "tau_ms": e.tau_ms,
        "tau_r_ms": e.tau_r_ms,
        "T_ms": e.T_ms,
        "fs_hz": e.fs_hz,
        "samples": [float(v) for v in e.samples],
    }


def dumps_dataset(ds: Dataset) -> str:
    header = {"format": "blockcast-dataset", "version": FORMAT_VERSION, "master_seed": ds.master_seed, "config": ds.config}
    lines = [json.dumps(header, sort_keys=True)]
    lines += [json.dumps(_example_dict(e)) for e in ds.examples]
    return "\n".join(lines) + "\n"


def save_dataset(ds: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_dataset(ds))


def loads_dataset(text: str) -> Dataset:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DatasetFormatError("line 1: missing header")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"line 1: malformed header ({exc.msg})") from exc
    if not isinstance(header, dict) or header.get("format") != "blockcast-dataset":
        raise DatasetFormatError("line 1: not a blockcast dataset header")
    examples = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            d = json.loads(line)
            examples.append(
                LabeledExample(
                    scenario_id=int(d["scenario_id"]),
                    label=int(d["label"]),
                    tau_ms=None if d["tau_ms"] is None else float(d["tau_ms"]),
                    tau_r_ms=float(d["tau_r_ms"]),
                    T_ms=float(d["T_ms"]),
                    fs_hz=float(d["fs_hz"]),
                    samples=np.asarray(d["samples"], dtype=float),
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DatasetFormatError(f"line {lineno}: malformed example ({exc})") from exc
    return Dataset(examples, header.get("config", {}), int(header.get("master_seed", 0)))


def load_dataset(path) -> Dataset:
    with open(path, encoding="utf-8") as f:
        return loads_dataset(f.read())


def dataset_digest(ds: Dataset) -> str:
    return hashlib.sha256(dumps_dataset(ds).encode("utf-8")).hexdigest()
