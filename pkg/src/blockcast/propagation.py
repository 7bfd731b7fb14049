"""Narrowband MIMO channel with knife-edge and finite-strip diffraction.

The direct path and every single-bounce reflector path get a free-space
amplitude and phase, a Fresnel factor for the blocker edge, and (for
reflections) a strip factor for the finite reflector aperture. The array
response follows the usual ULA steering model with beams kept on the
geometric line of sight.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.special import fresnel

from .geometry import angle_from_endfire, los_clearance, reflection_geometry
from .scenario import Scenario

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ArrayConfig:
    """ULA sizes and carrier. Spacings default to half a wavelength."""

    bs_elems: int = 16
    ue_elems: int = 4
    fk_hz: float = 30e9
    bs_spacing: float | None = None
    ue_spacing: float | None = None

    def __post_init__(self):
        if self.bs_elems < 1 or self.ue_elems < 1:
            raise ValueError("arrays need at least one element")
        if self.fk_hz <= 0:
            raise ValueError("carrier frequency must be positive")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.fk_hz

    @property
    def dt(self) -> float:
        return self.bs_spacing if self.bs_spacing is not None else self.wavelength / 2

    @property
    def dr(self) -> float:
        return self.ue_spacing if self.ue_spacing is not None else self.wavelength / 2

    @classmethod
    def omni(cls, fk_hz: float = 30e9) -> "ArrayConfig":
        return cls(1, 1, fk_hz)


@dataclass(frozen=True)
class PropagationConfig:
    reflection_coefficient: complex = -0.8
    # project strip edge offsets onto the ray normal
    oblique_edges: bool = True
    blocker_on_reflections: bool = True
    freeze_beams_in_nlos: bool = True

    def __post_init__(self):
        if abs(self.reflection_coefficient) > 1:
            raise ValueError("|reflection coefficient| must not exceed 1")


@dataclass
class MpcComponent:
    index: int
    gain: complex
    theta_t: float
    theta_r: float


@dataclass
class RssTrace:
    fs_hz: float
    samples: np.ndarray
    t0_ms: float = 0.0
    complex_samples: np.ndarray | None = None

    @property
    def times_ms(self) -> np.ndarray:
        return self.t0_ms + np.arange(len(self.samples)) * (1000.0 / self.fs_hz)

    @property
    def duration_ms(self) -> float:
        return len(self.samples) * 1000.0 / self.fs_hz

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_ms", "rss"])
        for t, v in zip(self.times_ms, self.samples):
            w.writerow([repr(float(t)), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "RssTrace":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["t_ms", "rss"]:
            raise ValueError("expected header t_ms,rss")
        t = np.array([float(r[0]) for r in rows[1:]])
        v = np.array([float(r[1]) for r in rows[1:]])
        if len(t) < 2:
            raise ValueError("need at least two samples to infer the rate")
        return cls(fs_hz=1000.0 / (t[1] - t[0]), samples=v, t0_ms=float(t[0]))


# --- diffraction ----------------------------------------------------------


def fresnel_edge_factor(nu):
    """Knife-edge field factor F(nu) = (1+j)/2 * int_nu^inf exp(-j pi t^2 / 2) dt.

    |F| is 1/2 on the shadow boundary, tends to 1 deep in the lit region
    (nu -> -inf) and to 0 deep in the shadow.
    """
    s, c = fresnel(nu)
    return 0.5 * (1 + 1j) * ((0.5 - c) - 1j * (0.5 - s))


def strip_factor(nu_a, nu_b):
    """Aperture factor of a finite strip spanning Fresnel parameters [nu_a, nu_b]."""
    return fresnel_edge_factor(nu_a) - fresnel_edge_factor(nu_b)


def fresnel_parameter(h, d1, d2, wavelength):
    return h * np.sqrt(2.0 * (d1 + d2) / (wavelength * d1 * d2))


def edge_factor_from_clearance(clr, wavelength, d1=None, d2=None):
    """Blocker factor for a path; 1 where the edge is not between the endpoints."""
    d1 = clr.d1 if d1 is None else d1
    d2 = clr.d2 if d2 is None else d2
    with np.errstate(invalid="ignore", divide="ignore"):
        nu = fresnel_parameter(clr.h, d1, d2, wavelength)
    return np.where(clr.active, fresnel_edge_factor(np.where(clr.active, nu, 0.0)), 1.0 + 0j)


# --- arrays ----------------------------------------------------------------


def steering_vector(theta, n: int, spacing: float, wavelength: float) -> np.ndarray:
    """ULA response exp(j 2 pi i spacing cos(theta) / wavelength), i = 0..n-1."""
    theta = np.asarray(theta, dtype=float)
    i = np.arange(n)
    phase = 2 * np.pi * spacing * np.cos(theta)[..., None] * i / wavelength
    return np.exp(1j * phase)


def beamformer(theta0, n: int, spacing: float, wavelength: float) -> np.ndarray:
    return steering_vector(theta0, n, spacing, wavelength) / np.sqrt(n)


def array_gain(theta, theta0, n: int, spacing: float, wavelength: float) -> np.ndarray:
    """Closed form of beamformer(theta0)^H steering_vector(theta)."""
    psi = 2 * np.pi * spacing / wavelength * (np.cos(theta) - np.cos(theta0))
    half = 0.5 * psi
    s = np.sin(half)
    small = np.abs(s) < 1e-9
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(small, n * np.cos(n * half) / np.where(small, np.cos(half), 1.0), np.sin(n * half) / s)
    return np.exp(1j * (n - 1) * half) * ratio / np.sqrt(n)


# --- channel -----------------------------------------------------------------


def mpc_gain(path_length, wavelength: float, diffraction=1.0, reflection=1.0):
    """Complex gain between first elements for one path.

    ``reflection`` carries Gamma times the strip factor for a reflected
    path; ``diffraction`` the blocker edge factor.
    """
    d = np.asarray(path_length, dtype=float)
    if np.any(d <= 0):
        raise ValueError("path length must be positive")
    return wavelength / (4 * np.pi * d) * np.exp(-2j * np.pi * d / wavelength) * reflection * diffraction


def combine_channel(mpcs, arrays: ArrayConfig, v_t, v_r) -> complex:
    """h' = V_r^H (sum_q h_q a_r(theta_rq) a_t(theta_tq)^H) V_t, without the L x M matrix."""
    v_t = np.asarray(v_t)
    v_r = np.asarray(v_r)
    if v_t.shape[-1] != arrays.bs_elems or v_r.shape[-1] != arrays.ue_elems:
        raise ValueError("beamformer length does not match the array")
    total = 0j
    lam = arrays.wavelength
    for m in mpcs:
        a_t = steering_vector(m.theta_t, arrays.bs_elems, arrays.dt, lam)
        a_r = steering_vector(m.theta_r, arrays.ue_elems, arrays.dr, lam)
        total += m.gain * np.vdot(v_r, a_r) * np.vdot(a_t, v_t)
    return complex(total)


def _forward_fill(values, ok):
    """Replace entries where ``ok`` is False by the last ok entry before them."""
    idx = np.where(ok, np.arange(len(ok)), -1)
    np.maximum.accumulate(idx, out=idx)
    idx[idx < 0] = np.argmax(ok) if ok.any() else 0
    return values[idx]


def channel_response(
    scenario: Scenario,
    arrays: ArrayConfig,
    times_ms,
    cfg: PropagationConfig = PropagationConfig(),
    *,
    return_paths: bool = False,
):
    """Complex h'(t) of the combined channel at the given times."""
    t = np.asarray(times_ms, dtype=float)
    lam = arrays.wavelength
    bs = np.asarray(scenario.bs, dtype=float)
    ue = scenario.ue.position(t)
    tip = scenario.blocker.position(t)
    approach = np.asarray(scenario.blocker_approach, dtype=float)
    ue_axis = np.asarray(scenario.ue.direction, dtype=float)
    bs_axis = np.array([1.0, 0.0])

    los = ue - bs
    d0 = np.hypot(los[:, 0], los[:, 1])
    if np.any(d0 <= 0):
        raise ValueError("UE coincides with the BS")

    clr = los_clearance(bs, ue, tip, approach)
    h0 = mpc_gain(d0, lam, diffraction=edge_factor_from_clearance(clr, lam))
    theta_t0 = angle_from_endfire(bs_axis, los)
    theta_r0 = angle_from_endfire(ue_axis, -los)

    # beams track the geometric LoS, frozen while the edge blocks it
    clear = ~(clr.active & (clr.h > 0))
    if cfg.freeze_beams_in_nlos and not clear.all():
        theta_t0 = _forward_fill(theta_t0, clear)
        theta_r0 = _forward_fill(theta_r0, clear)

    L, M = arrays.bs_elems, arrays.ue_elems
    g_t = array_gain(angle_from_endfire(bs_axis, los), theta_t0, L, arrays.dt, lam)
    g_r = array_gain(angle_from_endfire(ue_axis, -los), theta_r0, M, arrays.dr, lam)
    # array_gain gives V^H a; the transmit side needs a^H V
    total = h0 * g_r * np.conj(g_t)
    paths = [h0]

    gamma = complex(cfg.reflection_coefficient)
    for mr in scenario.reflectors:
        centers, angles = mr.pose(t, scenario.duration_ms)
        g = reflection_geometry(bs, ue, centers, mr.reflector.length, angles)
        if not g.valid.any():
            paths.append(np.zeros_like(h0))
            continue
        v = g.valid
        l1 = np.where(v, g.leg1, 1.0)
        l2 = np.where(v, g.leg2, 1.0)
        proj = np.where(v, g.cos_incidence, 0.0) if cfg.oblique_edges else 1.0
        k = np.sqrt(2.0 * (l1 + l2) / (lam * l1 * l2))
        strip = strip_factor(np.where(v, g.s_a, 0.0) * proj * k, np.where(v, g.s_b, 0.0) * proj * k)
        diff = 1.0
        if cfg.blocker_on_reflections:
            spec = np.where(v[:, None], g.specular_point, 0.5 * (bs + ue))
            c1 = los_clearance(bs, spec, tip, approach)
            c2 = los_clearance(spec, ue, tip, approach)
            diff = edge_factor_from_clearance(c1, lam, c1.d1, c1.d2 + l2) * edge_factor_from_clearance(
                c2, lam, l1 + c2.d1, c2.d2
            )
        hq = mpc_gain(np.where(v, g.path_length, 1.0), lam, diffraction=diff, reflection=gamma * strip)
        hq = np.where(v, hq, 0.0)
        dep = np.where(v[:, None], g.departure, bs_axis)
        arr = np.where(v[:, None], g.arrival, ue_axis)
        gt = array_gain(angle_from_endfire(bs_axis, dep), theta_t0, L, arrays.dt, lam)
        gr = array_gain(angle_from_endfire(ue_axis, arr), theta_r0, M, arrays.dr, lam)
        total = total + hq * gr * np.conj(gt)
        paths.append(hq)
    if return_paths:
        return total, np.stack(paths, axis=-1)
    return total


def sample_times(duration_ms: float, fs_hz: float, t0_ms: float = 0.0) -> np.ndarray:
    n = int(np.floor(duration_ms * fs_hz / 1000.0 + 1e-9))
    if n < 1:
        raise ValueError("scenario shorter than one sample")
    return t0_ms + np.arange(n) * (1000.0 / fs_hz)


def synth_trace(
    scenario: Scenario,
    arrays: ArrayConfig,
    fs_hz: float,
    cfg: PropagationConfig = PropagationConfig(),
    keep_complex: bool = False,
) -> RssTrace:
    """Sample |h'(t)| at t_i = i / fs over the scenario duration."""
    t = sample_times(scenario.duration_ms, fs_hz)
    h = channel_response(scenario, arrays, t, cfg)
    return RssTrace(fs_hz=fs_hz, samples=np.abs(h), complex_samples=h if keep_complex else None)
