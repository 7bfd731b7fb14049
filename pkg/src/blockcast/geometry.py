"""Planar geometry for the propagation engine.

All functions broadcast over leading axes: a point is any array whose last
axis has length 2, so a whole trajectory of shape ``(T, 2)`` can be pushed
through at once.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# Reflectors shorter than this are treated as absent.
MIN_REFLECTOR_LENGTH = 1e-3


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class StripReflector:
    """Flat reflecting strip; ``angle_deg`` is measured CCW from +x."""

    center: Point2
    length: float
    angle_deg: float

    def __post_init__(self):
        object.__setattr__(self, "center", Point2(float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "angle_deg", float(self.angle_deg) % 360.0)

    @property
    def direction(self) -> np.ndarray:
        a = np.deg2rad(self.angle_deg)
        return np.array([np.cos(a), np.sin(a)])

    @property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.center, dtype=float)
        half = 0.5 * self.length * self.direction
        return c - half, c + half


@dataclass
class ReflectionGeometry:
    """Single-bounce path from the method of images.

    Fields are arrays when computed for many poses at once; ``valid`` marks
    poses where tx and rx are on the same side of the reflector line.
    Edge offsets are measured along the reflector line from the specular
    point to each reflector end, so ``s_a <= 0 <= s_b`` means the specular
    point lies on the strip.
    """

    image_point: np.ndarray
    specular_point: np.ndarray
    path_length: np.ndarray
    s_a: np.ndarray
    s_b: np.ndarray
    departure: np.ndarray
    arrival: np.ndarray
    leg1: np.ndarray
    leg2: np.ndarray
    cos_incidence: np.ndarray
    valid: np.ndarray


@dataclass
class ClearanceGeometry:
    """Knife-edge clearance of a blocker tip relative to a Tx-Rx segment.

    ``h > 0`` once the tip has crossed the segment's line along the approach
    direction. ``active`` is False when the foot of the perpendicular falls
    outside the segment, in which case the edge does not diffract the path.
    """

    h: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    active: np.ndarray


def _dot(a, b):
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1]


def _norm(a):
    return np.hypot(a[..., 0], a[..., 1])


def _unit(a):
    n = _norm(a)
    return a / n[..., None]


def mirror_point(p, line_point, line_dir) -> np.ndarray:
    """Reflect ``p`` across the infinite line through ``line_point`` along ``line_dir``."""
    p = np.asarray(p, dtype=float)
    line_point = np.asarray(line_point, dtype=float)
    line_dir = np.asarray(line_dir, dtype=float)
    n = _norm(line_dir)
    if np.any(n == 0):
        raise ValueError("mirror line has zero-length direction")
    u = line_dir / np.asarray(n)[..., None]
    r = p - line_point
    along = _dot(r, u)[..., None] * u
    return line_point + 2.0 * along - r


def reflection_geometry(tx, rx, center, length, angle_rad) -> ReflectionGeometry:
    """Vectorized image-method construction; see :func:`reflect_path`."""
    tx = np.asarray(tx, dtype=float)
    rx = np.asarray(rx, dtype=float)
    center = np.asarray(center, dtype=float)
    angle_rad = np.asarray(angle_rad, dtype=float)
    length = np.asarray(length, dtype=float)

    u = np.stack([np.cos(angle_rad), np.sin(angle_rad)], axis=-1)
    n = np.stack([-np.sin(angle_rad), np.cos(angle_rad)], axis=-1)
    dt = _dot(tx - center, n)
    dr = _dot(rx - center, n)
    valid = (dt * dr > 0) & (length >= MIN_REFLECTOR_LENGTH)

    image = tx - 2.0 * dt[..., None] * n
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = dt / (dt + dr)
    spec = image + frac[..., None] * (rx - image)
    s_spec = _dot(spec - center, u)
    half = 0.5 * length
    leg1 = _norm(spec - tx)
    leg2 = _norm(rx - spec)
    with np.errstate(invalid="ignore", divide="ignore"):
        departure = _unit(spec - tx)
        arrival = _unit(spec - rx)
        cos_inc = np.abs(dt) / leg1
    return ReflectionGeometry(
        image_point=image,
        specular_point=spec,
        path_length=_norm(rx - image),
        s_a=-half - s_spec,
        s_b=half - s_spec,
        departure=departure,
        arrival=arrival,
        leg1=leg1,
        leg2=leg2,
        cos_incidence=cos_inc,
        valid=valid,
    )


def reflect_path(tx, rx, reflector: StripReflector) -> ReflectionGeometry | None:
    """Specular path tx -> reflector line -> rx, or None if no same-side pair.

    The specular point is allowed to fall outside the strip; the signed edge
    offsets carry that information to the strip diffraction factor.
    """
    tx = np.asarray(tx, dtype=float)
    rx = np.asarray(rx, dtype=float)
    c = np.asarray(reflector.center, dtype=float)
    u = reflector.direction
    n = np.array([-u[1], u[0]])
    if abs(_dot(tx - c, n)) < 1e-12 or abs(_dot(rx - c, n)) < 1e-12:
        raise ValueError("endpoint lies on the reflector line")
    g = reflection_geometry(tx, rx, c, reflector.length, np.deg2rad(reflector.angle_deg))
    if not bool(g.valid):
        return None
    return g


def los_clearance(tx, rx, edge_tip, approach_dir) -> ClearanceGeometry:
    """Signed clearance of a knife-edge tip from the segment tx-rx.

    The blocker is a half-line trailing from the tip opposite to
    ``approach_dir``; h is positive once the tip is past the line. On the
    shadow side d1 and d2 are measured to the point where the body crosses
    the path, so a steep path cut by the body is never reported as clear.
    """
    tx = np.asarray(tx, dtype=float)
    rx = np.asarray(rx, dtype=float)
    tip = np.asarray(edge_tip, dtype=float)
    approach = np.asarray(approach_dir, dtype=float)
    e = rx - tx
    dist = _norm(e)
    if np.any(dist <= 0):
        raise ValueError("tx and rx coincide")
    e_hat = e / dist[..., None]
    normal = np.stack([-e_hat[..., 1], e_hat[..., 0]], axis=-1)
    a_n = _dot(normal, approach)
    side = np.where(a_n < 0, -1.0, 1.0)
    r = tip - tx
    h = side * _dot(r, normal)
    # lit side: the edge sits at the tip's foot; shadow side: where the
    # body crosses the path (the two agree at h = 0)
    na = _norm(approach)
    if np.any(na == 0):
        raise ValueError("zero approach direction")
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        s = np.where(h > 0, h * na / np.abs(a_n), 0.0)
    d1 = _dot(r, e_hat) - s * _dot(approach, e_hat) / na
    d2 = dist - d1
    active = (d1 > 0) & (d2 > 0)
    return ClearanceGeometry(h=h, d1=d1, d2=d2, active=active)


def angle_from_endfire(axis, direction) -> np.ndarray:
    """Angle in [0, pi] between an array axis and a propagation direction."""
    axis = np.asarray(axis, dtype=float)
    direction = np.asarray(direction, dtype=float)
    na, nd = _norm(axis), _norm(direction)
    if np.any(na == 0) or np.any(nd == 0):
        raise ValueError("zero-length direction")
    c = _dot(axis, direction) / (na * nd)
    return np.arccos(np.clip(c, -1.0, 1.0))
