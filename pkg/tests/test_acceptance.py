"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the result lines are
written straight to the terminal. The ML criteria (6-10) simulate several
N=2000 datasets and take a few minutes each on one core.
"""
import csv
import io
import time

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad
from scipy.signal import find_peaks

from blockcast.cli import main as cli
from blockcast.dataset import WindowConfig, build_dataset, detect_tau, place_windows
from blockcast.experiments import ExperimentConfig, make_dataset, run_cv
from blockcast.learn import cross_validate, fit_ridge, stratified_folds
from blockcast.learn.ridge import standardize
from blockcast.propagation import (
    ArrayConfig,
    MpcComponent,
    beamformer,
    channel_response,
    combine_channel,
    fresnel_edge_factor,
    mpc_gain,
    steering_vector,
    synth_trace,
)
from blockcast.scenario import GeneratorConfig, crossing_scenario, gen_scenario

from conftest import make_scenario

SEED = 0
ML = dict(n=2000, fs_hz=1000.0, w_ms=400.0, t1_ms=100.0, p_ms=50.0, master_seed=SEED)


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail, elapsed):
        with capsys.disabled():
            print(f"\ncriterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}  ({elapsed:.1f} s)")
        assert ok, detail

    return _report


def _peaks_before_tau(fk_hz):
    tr = synth_trace(crossing_scenario(), ArrayConfig(16, 4, fk_hz), 20_000.0)
    tau = detect_tau(tr)
    t, x = tr.times_ms, tr.samples
    pk, _ = find_peaks(x[t < tau])
    return tau, t[pk], x[pk]


def test_criterion_01_knife_edge_boundary(report):
    t0 = time.perf_counter()
    arrays = ArrayConfig(16, 4)
    h = channel_response(crossing_scenario(680.0), arrays, np.array([680.0]))[0]
    free = np.sqrt(64) * arrays.wavelength / (4 * np.pi * 40.0)
    ratio = abs(h) / free
    dt = time.perf_counter() - t0
    report(1, abs(ratio / 0.5 - 1) <= 0.02 and dt < 1, f"RSS/free-space at crossing = {ratio:.5f} (target 0.5 +/- 2%)", dt)


def test_criterion_02_pre_blockage_pattern(report):
    t0 = time.perf_counter()
    _, tp, xp = _peaks_before_tau(30e9)
    amps, gaps = xp[-3:], np.diff(tp[-3:])
    ok = len(tp) >= 3 and np.all(np.diff(amps) > 0) and gaps[1] > gaps[0]
    dt = time.perf_counter() - t0
    detail = f"last maxima amplitudes {np.round(amps, 10).tolist()}, spacings {np.round(gaps, 2).tolist()} ms"
    report(2, bool(ok) and dt < 1, detail, dt)


def test_criterion_03_sqrt_f_compression(report):
    t0 = time.perf_counter()
    tau30, tp30, _ = _peaks_before_tau(30e9)
    tau120, tp120, _ = _peaks_before_tau(120e9)
    ratio = (tau30 - tp30[-3]) / (tau120 - tp120[-3])
    dt = time.perf_counter() - t0
    report(3, abs(ratio / 2 - 1) <= 0.10 and dt < 5, f"tau-to-3rd-maximum ratio 30/120 GHz = {ratio:.4f} (target 2.0 +/- 10%)", dt)


def test_criterion_04_array_algebra(report):
    t0 = time.perf_counter()
    worst = 0.0
    rng = np.random.default_rng(4)
    for L, M in ((1, 1), (16, 4), (64, 16)):
        arrays = ArrayConfig(L, M)
        lam = arrays.wavelength
        for _ in range(50):
            tt, tr = rng.uniform(0, np.pi, 2)
            h0 = mpc_gain(rng.uniform(1, 200), lam)
            h = combine_channel([MpcComponent(0, h0, tt, tr)], arrays, beamformer(tt, L, arrays.dt, lam), beamformer(tr, M, arrays.dr, lam))
            worst = max(worst, abs(abs(h) / (np.sqrt(L * M) * abs(h0)) - 1))
        # the same identity through the trace synthesizer (no edge in the way)
        sc = make_scenario(ue=(30.0, 20.0), ue_dir=(0.6, 0.8), ue_speed=10.0)
        t = np.linspace(0, 1000, 101)
        h = channel_response(sc, arrays, t)
        d = np.linalg.norm(sc.ue.position(t) - np.asarray(sc.bs), axis=1)
        worst = max(worst, np.max(np.abs(np.abs(h) / (np.sqrt(L * M) * lam / (4 * np.pi * d)) - 1)))
    dt = time.perf_counter() - t0
    report(4, worst <= 1e-12 and dt < 1, f"max relative deviation from sqrt(LM)|h0| = {worst:.2e}", dt)


def _quad_F(nu):
    c = quad(lambda t: np.cos(np.pi * t * t / 2), 0, nu, limit=400, epsabs=1e-12, epsrel=1e-12)[0]
    s = quad(lambda t: np.sin(np.pi * t * t / 2), 0, nu, limit=400, epsabs=1e-12, epsrel=1e-12)[0]
    return 0.5 * (1 + 1j) * ((0.5 - c) - 1j * (0.5 - s))


def test_criterion_05_oracle_equivalence(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    comb = 0.0
    for _ in range(100):
        L, M = int(rng.integers(1, 65)), int(rng.integers(1, 17))
        arrays = ArrayConfig(L, M, float(rng.uniform(20e9, 150e9)))
        lam = arrays.wavelength
        mpcs = [MpcComponent(q, mpc_gain(rng.uniform(5, 150), lam, reflection=rng.uniform(-1, 1)), *rng.uniform(0, np.pi, 2)) for q in range(int(rng.integers(1, 11)))]
        H = sum(m.gain * np.outer(steering_vector(m.theta_r, M, arrays.dr, lam), steering_vector(m.theta_t, L, arrays.dt, lam).conj()) for m in mpcs)
        v_t = beamformer(rng.uniform(0, np.pi), L, arrays.dt, lam)
        v_r = beamformer(rng.uniform(0, np.pi), M, arrays.dr, lam)
        ref = v_r.conj() @ H @ v_t
        comb = max(comb, abs(combine_channel(mpcs, arrays, v_t, v_r) - ref) / max(abs(ref), 1e-300))

    X = rng.normal(size=(300, 40))
    y = (X[:, :4].sum(axis=1) + rng.normal(size=300) > 0).astype(int)
    m = fit_ridge(X, y)
    Xs, mean, scale = standardize(X)
    A = np.column_stack([Xs, np.ones(len(X))])
    P = m.alpha * np.eye(A.shape[1])
    P[-1, -1] = 0
    coef = np.linalg.solve(A.T @ A + P, A.T @ (2.0 * y - 1))
    Xq = rng.normal(size=(50, 40))
    ridge = np.max(np.abs(m.decision_function(Xq) - (((Xq - mean) / scale) @ coef[:-1] + coef[-1])))

    nus = np.linspace(-8, 8, 321)
    fres = np.max(np.abs(fresnel_edge_factor(nus) - np.array([_quad_F(v) for v in nus])))
    dt = time.perf_counter() - t0
    ok = comb <= 1e-12 and ridge <= 1e-8 and fres <= 1e-9 and dt < 30
    report(5, ok, f"combine {comb:.1e} (<=1e-12), ridge {ridge:.1e} (<=1e-8), fresnel {fres:.1e} (<=1e-9)", dt)


# --- ML criteria ----------------------------------------------------------------


def _cv_accuracy(**overrides):
    cfg = ExperimentConfig(**{**ML, **overrides})
    return run_cv(make_dataset(cfg), cfg).accuracy


def _run_cli(tmp, tag):
    args = ["--n", "2000", "--fs", "1000", "--qmax", "0", "--seed", str(SEED)]
    data, metrics = tmp / f"{tag}.ndjson", tmp / f"{tag}.csv"
    assert cli(["gen", *args, "--out", str(data)]) == 0
    assert cli(["cv", *args, "--data", str(data), "--out", str(metrics)]) == 0
    return data.read_bytes(), metrics.read_bytes()


@pytest.fixture(scope="module")
def q0_cli(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("accept")
    t0 = time.perf_counter()
    first = _run_cli(tmp, "a")
    return first, time.perf_counter() - t0, tmp


@pytest.fixture(scope="module")
def q10_mimo():
    t0 = time.perf_counter()
    return _cv_accuracy(q_max=10), time.perf_counter() - t0


def _mean_accuracy(metrics_csv: bytes) -> float:
    rows = list(csv.DictReader(io.StringIO(metrics_csv.decode())))
    return float(next(r for r in rows if r["param"] == "mean")["accuracy"])


@pytest.mark.slow
def test_criterion_06_desk_scale_no_reflectors(report, q0_cli):
    (_, metrics), dt, _ = q0_cli
    acc = _mean_accuracy(metrics)
    report(6, acc >= 0.88 and dt <= 1800, f"Q=0 16x4 5-fold accuracy = {100 * acc:.2f}% (target >= 88%)", dt)


@pytest.mark.slow
def test_criterion_07_prediction_range_trend(report, q0_cli):
    (_, metrics), _, _ = q0_cli
    t0 = time.perf_counter()
    near = _mean_accuracy(metrics)
    far = _cv_accuracy(q_max=0, t1_ms=350.0)
    dt = time.perf_counter() - t0
    gap = 100 * (near - far)
    report(7, gap >= 4 and dt <= 3600, f"accuracy t1=100 {100 * near:.2f}% - t1=350 {100 * far:.2f}% = {gap:.2f} points (target >= 4)", dt)


@pytest.mark.slow
def test_criterion_08_mimo_benefit(report, q10_mimo):
    mimo, dt_m = q10_mimo
    t0 = time.perf_counter()
    omni = _cv_accuracy(q_max=10, mode="omni")
    dt = time.perf_counter() - t0 + dt_m
    gap = 100 * (mimo - omni)
    report(8, gap >= 2 and dt <= 5400, f"Q<=10 accuracy 16x4 {100 * mimo:.2f}% - omni {100 * omni:.2f}% = {gap:.2f} points (target >= 2)", dt)


@pytest.mark.slow
def test_criterion_09_array_size_benefit(report, q10_mimo):
    small, dt_s = q10_mimo
    t0 = time.perf_counter()
    large = _cv_accuracy(q_max=10, bs_elems=64, ue_elems=16)
    dt = time.perf_counter() - t0 + dt_s
    gap = 100 * (large - small)
    report(9, gap >= 1.5 and dt <= 5400, f"Q<=10 accuracy 64x16 {100 * large:.2f}% - 16x4 {100 * small:.2f}% = {gap:.2f} points (target >= 1.5)", dt)


@pytest.mark.slow
def test_criterion_10_determinism(report, q0_cli):
    first, dt_first, tmp = q0_cli
    t0 = time.perf_counter()
    second = _run_cli(tmp, "b")
    dt = time.perf_counter() - t0 + dt_first
    ok = first[0] == second[0] and first[1] == second[1]
    report(10, ok, f"dataset files identical: {first[0] == second[0]}, metric CSVs identical: {first[1] == second[1]}", dt)


def test_criterion_11_protocol_invariants(report):
    t0 = time.perf_counter()
    failures = []
    win = WindowConfig(400.0, 100.0, 50.0, 1000.0)
    gen = GeneratorConfig(master_seed=11)
    ds = build_dataset(200, gen, win, ArrayConfig())

    if ds.counts() != (100, 100):
        failures.append(f"balance {ds.counts()}")
    for e in ds.examples:
        if abs(e.T_ms - (e.tau_r_ms - win.t1_ms)) > 1e-9 or len(e.samples) != 400:
            failures.append(f"T or length, scenario {e.scenario_id}")
        if e.label == 1 and not (abs(e.tau_r_ms - e.tau_ms) <= win.p_ms / 2 and e.T_ms < e.tau_ms):
            failures.append(f"label-1 window, scenario {e.scenario_id}")
        if e.label == 0 and not (win.w_ms <= e.T_ms <= 1000 - win.t1_ms):
            failures.append(f"label-0 window, scenario {e.scenario_id}")
    rng = np.random.default_rng(0)
    for _ in range(1000):
        pl = place_windows(0, 1000.0, rng, win)
        if not 500 <= pl.window[0] <= 950:
            failures.append("label-0 placement bounds")
            break
    if place_windows(1, 680.0, rng, win).window != (655.0, 705.0):
        failures.append("label-1 centering")

    folds = stratified_folds(ds.y, 5, 0)
    idx = np.concatenate(folds)
    if sorted(idx) != list(range(len(ds))) or max(map(len, folds)) - min(map(len, folds)) > 1:
        failures.append("fold partition")

    # a training fold's model must not change when its test rows change
    X, y = ds.X[:, ::4], ds.y
    _, models, fl = cross_validate(X[:80], y[:80], k=4, return_models=True)
    Xp = X[:80].copy()
    Xp[fl[0]] = 0.0
    _, models_p, _ = cross_validate(Xp, y[:80], k=4, return_models=True)
    if not np.array_equal(models[0].scores(X[80:90]), models_p[0].scores(X[80:90])):
        failures.append("leakage")

    speeds = []
    for i in range(5000):
        s = gen_scenario(i, GeneratorConfig(master_seed=3))
        speeds += [s.ue.speed, s.blocker.speed]
    p = stats.kstest(speeds, stats.uniform(0, 30).cdf).pvalue
    if p < 0.01:
        failures.append(f"speed KS p={p:.3g}")
    dt = time.perf_counter() - t0
    report(11, not failures and dt < 300, f"violations: {failures or 'none'}; speed KS p = {p:.3f}", dt)
