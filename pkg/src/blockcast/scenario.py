"""Randomized blockage scenarios and their time evolution."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from .geometry import Point2, StripReflector, los_clearance


class InfeasibleConfigError(RuntimeError):
    """A generator or dataset configuration cannot produce valid samples."""


@dataclass(frozen=True)
class Trajectory:
    """Straight-line constant-speed motion; ``direction`` is a unit vector."""

    origin: Point2
    direction: tuple[float, float]
    speed: float  # m/s
    duration_ms: float

    def position(self, t_ms):
        t = np.asarray(t_ms, dtype=float) * 1e-3
        o = np.asarray(self.origin, dtype=float)
        d = np.asarray(self.direction, dtype=float)
        return o + (self.speed * t)[..., None] * d

    @property
    def end(self) -> np.ndarray:
        return self.position(self.duration_ms)


@dataclass(frozen=True)
class ReflectorMotion:
    kind: Literal["static", "translating", "rotating"] = "static"
    direction: tuple[float, float] = (1.0, 0.0)
    speed: float = 0.0
    angle_start_deg: float = 0.0
    angle_end_deg: float = 0.0


@dataclass(frozen=True)
class MovingReflector:
    reflector: StripReflector
    motion: ReflectorMotion = field(default_factory=ReflectorMotion)

    def pose(self, t_ms, duration_ms: float):
        """Return (centers, angles in radians) at the given times."""
        t = np.asarray(t_ms, dtype=float)
        c = np.broadcast_to(np.asarray(self.reflector.center, dtype=float), t.shape + (2,))
        a = np.full(t.shape, np.deg2rad(self.reflector.angle_deg))
        m = self.motion
        if m.kind == "translating":
            c = c + (m.speed * t * 1e-3)[..., None] * np.asarray(m.direction, dtype=float)
        elif m.kind == "rotating":
            frac = t / duration_ms
            a = np.deg2rad(m.angle_start_deg + (m.angle_end_deg - m.angle_start_deg) * frac)
        return c, a


@dataclass(frozen=True)
class Scenario:
    """Complete world description for one trace.

    The blocker is a knife edge whose opaque half-line trails from the tip
    opposite to ``blocker_approach``; the default (0, 1) keeps the body
    below the region, so the shadow boundary is the line from the BS
    through the tip.
    """

    id: int
    bs: Point2
    ue: Trajectory
    blocker: Trajectory
    reflectors: tuple[MovingReflector, ...] = ()
    duration_ms: float = 1000.0
    rng_seed: int = 0
    blocker_approach: tuple[float, float] = (0.0, 1.0)

    @property
    def q(self) -> int:
        return len(self.reflectors)

    def to_json(self) -> str:
        return json.dumps(scenario_to_dict(self))

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        return scenario_from_dict(json.loads(text))


@dataclass
class Snapshot:
    ue: np.ndarray
    blocker_tip: np.ndarray
    reflectors: list[StripReflector]


@dataclass(frozen=True)
class GeneratorConfig:
    region_min: tuple[float, float] = (0.0, 0.0)
    region_max: tuple[float, float] = (160.0, 60.0)
    bs_line: tuple[tuple[float, float], tuple[float, float]] = ((-40.0, 0.0), (-0.5, 0.0))
    blocker_origin: tuple[float, float] = (0.0, 0.0)
    q_min: int = 0
    q_max: int = 10
    size_range: tuple[float, float] = (0.1, 2.0)
    speed_range: tuple[float, float] = (0.0, 30.0)
    reflector_speed_range: tuple[float, float] = (0.0, 30.0)
    duration_ms: float = 1000.0
    master_seed: int = 0
    # "standard": movers only for Q >= 8; "mobility": two movers always plus a
    # rotator for Q in {9, 10}
    motion_rule: Literal["standard", "mobility"] = "standard"
    # True re-draws each reflector until its specular point lands on the
    # strip during the UE path; by default the array factor alone decides
    significant_only: bool = False
    max_attempts: int = 10_000

    def __post_init__(self):
        lo, hi = self.region_min, self.region_max
        if not (hi[0] > lo[0] and hi[1] > lo[1]):
            raise ValueError("empty region")
        if not 0 <= self.q_min <= self.q_max:
            raise ValueError("invalid reflector count range")
        for name in ("size_range", "speed_range", "reflector_speed_range"):
            a, b = getattr(self, name)
            if b < a or a < 0:
                raise ValueError(f"invalid {name}")
        if self.size_range[0] <= 0 or self.duration_ms <= 0:
            raise ValueError("sizes and duration must be positive")
        if self.motion_rule not in ("standard", "mobility"):
            raise ValueError(f"unknown motion rule {self.motion_rule!r}")


# --- serialization -------------------------------------------------------


def _traj_dict(t: Trajectory) -> dict:
    return {
        "origin_m": list(t.origin),
        "direction": list(t.direction),
        "speed_mps": t.speed,
        "duration_ms": t.duration_ms,
    }


def _traj_from(d: dict) -> Trajectory:
    return Trajectory(
        origin=Point2(*map(float, d["origin_m"])),
        direction=tuple(map(float, d["direction"])),
        speed=float(d["speed_mps"]),
        duration_ms=float(d["duration_ms"]),
    )


def scenario_to_dict(s: Scenario) -> dict:
    refl = []
    for mr in s.reflectors:
        r, m = mr.reflector, mr.motion
        refl.append(
            {
                "center_m": list(r.center),
                "length_m": r.length,
                "angle_deg": r.angle_deg,
                "motion": {
                    "kind": m.kind,
                    "direction": list(m.direction),
                    "speed_mps": m.speed,
                    "angle_start_deg": m.angle_start_deg,
                    "angle_end_deg": m.angle_end_deg,
                },
            }
        )
    return {
        "id": s.id,
        "bs_m": list(s.bs),
        "ue": _traj_dict(s.ue),
        "blocker": _traj_dict(s.blocker),
        "blocker_approach": list(s.blocker_approach),
        "reflectors": refl,
        "duration_ms": s.duration_ms,
        "rng_seed": s.rng_seed,
    }


def scenario_from_dict(d: dict) -> Scenario:
    try:
        refl = []
        for r in d.get("reflectors", []):
            m = r.get("motion", {})
            refl.append(
                MovingReflector(
                    StripReflector(Point2(*map(float, r["center_m"])), float(r["length_m"]), float(r["angle_deg"])),
                    ReflectorMotion(
                        kind=m.get("kind", "static"),
                        direction=tuple(map(float, m.get("direction", (1.0, 0.0)))),
                        speed=float(m.get("speed_mps", 0.0)),
                        angle_start_deg=float(m.get("angle_start_deg", 0.0)),
                        angle_end_deg=float(m.get("angle_end_deg", 0.0)),
                    ),
                )
            )
        s = Scenario(
            id=int(d["id"]),
            bs=Point2(*map(float, d["bs_m"])),
            ue=_traj_from(d["ue"]),
            blocker=_traj_from(d["blocker"]),
            reflectors=tuple(refl),
            duration_ms=float(d["duration_ms"]),
            rng_seed=int(d.get("rng_seed", 0)),
            blocker_approach=tuple(map(float, d.get("blocker_approach", (0.0, 1.0)))),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"invalid scenario description: {exc}") from exc
    for mr in s.reflectors:
        if mr.motion.kind not in ("static", "translating", "rotating"):
            raise ValueError(f"unknown reflector motion {mr.motion.kind!r}")
    if s.duration_ms <= 0:
        raise ValueError("scenario duration must be positive")
    return s


# --- time evolution -------------------------------------------------------


def pose_at(scenario: Scenario, t_ms: float) -> Snapshot:
    if not 0 <= t_ms <= scenario.duration_ms:
        raise ValueError(f"t={t_ms} ms outside [0, {scenario.duration_ms}]")
    refl = []
    for mr in scenario.reflectors:
        c, a = mr.pose(t_ms, scenario.duration_ms)
        refl.append(StripReflector(Point2(*c), mr.reflector.length, np.rad2deg(a)))
    return Snapshot(scenario.ue.position(t_ms), scenario.blocker.position(t_ms), refl)


# --- generation -----------------------------------------------------------


def scenario_rng(master_seed: int, index: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, index, stream]))


def _in_region(p, cfg: GeneratorConfig) -> bool:
    (x0, y0), (x1, y1) = cfg.region_min, cfg.region_max
    return x0 <= p[0] <= x1 and y0 <= p[1] <= y1


def _draw_direction(rng) -> tuple[float, float]:
    a = rng.uniform(0.0, 2 * np.pi)
    return (float(np.cos(a)), float(np.sin(a)))


def _draw_contained(origin, rng, speed_range, cfg: GeneratorConfig) -> Trajectory:
    # speed is drawn once so its marginal stays uniform; only the heading is
    # re-drawn until the path stays inside the region
    speed = float(rng.uniform(*speed_range))
    for _ in range(cfg.max_attempts):
        direction = _draw_direction(rng)
        t = Trajectory(Point2(*origin), direction, speed, cfg.duration_ms)
        if _in_region(t.end, cfg):
            return t
    raise InfeasibleConfigError("could not draw a trajectory inside the region")


def _motion_kinds(q: int, rule: str, rng) -> list[str]:
    if rule == "mobility":
        kinds = ["translating", "translating"]
        if q >= 9:
            kinds.append("rotating")
    elif q == 8:
        kinds = [("translating", "rotating")[rng.integers(2)]]
    elif q == 9:
        kinds = [
            ["translating", "translating"],
            ["rotating", "rotating"],
            ["translating", "rotating"],
        ][rng.integers(3)]
    elif q >= 10:
        kinds = [
            ["translating", "translating", "rotating"],
            ["translating", "rotating", "rotating"],
        ][rng.integers(2)]
    else:
        kinds = []
    kinds = kinds[:q]
    return kinds + ["static"] * (q - len(kinds))


_CHECK_TIMES = 201
_BATCH = 64


def _draw_reflector_batch(kind: str, rng, cfg: GeneratorConfig, n: int) -> dict:
    (x0, y0), (x1, y1) = cfg.region_min, cfg.region_max
    b = {
        "center": np.column_stack([rng.uniform(x0, x1, n), rng.uniform(y0, y1, n)]),
        "length": rng.uniform(*cfg.size_range, n),
        "angle": rng.uniform(0.0, 360.0, n),
        "direction": np.zeros((n, 2)),
        "speed": np.zeros(n),
        "angle_end": np.zeros(n),
    }
    if kind == "translating":
        a = rng.uniform(0.0, 2 * np.pi, n)
        b["direction"] = np.column_stack([np.cos(a), np.sin(a)])
        b["speed"] = rng.uniform(*cfg.reflector_speed_range, n)
    elif kind == "rotating":
        b["angle_end"] = rng.uniform(0.0, 360.0, n)
    return b


def _batch_member(kind: str, b: dict, i: int) -> MovingReflector:
    angle = float(b["angle"][i])
    if kind == "translating":
        motion = ReflectorMotion("translating", tuple(map(float, b["direction"][i])), float(b["speed"][i]))
    elif kind == "rotating":
        motion = ReflectorMotion("rotating", angle_start_deg=angle, angle_end_deg=float(b["angle_end"][i]))
    else:
        motion = ReflectorMotion()
    return MovingReflector(StripReflector(Point2(*map(float, b["center"][i])), float(b["length"][i]), angle), motion)


def _significant_mask(centers, angles, lengths, bs, ue_pos) -> np.ndarray:
    """Specular point on the strip at some check time, per candidate (rows)."""
    ux, uy = np.cos(angles), np.sin(angles)
    bx = bs[0] - centers[..., 0]
    by = bs[1] - centers[..., 1]
    rx = ue_pos[:, 0] - centers[..., 0]
    ry = ue_pos[:, 1] - centers[..., 1]
    dt = uy * bx - ux * by
    dr = uy * rx - ux * ry
    same = dt * dr > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        s_spec = ((ux * bx + uy * by) * dr + (ux * rx + uy * ry) * dt) / (dt + dr)
    margin = np.abs(s_spec) - 0.5 * lengths[:, None]
    on = (same & (margin <= 0)).any(axis=-1)
    # a sign change between consecutive valid checks catches fast sweeps
    both = same[:, 1:] & same[:, :-1]
    flip = np.signbit(margin[:, 1:]) != np.signbit(margin[:, :-1])
    jump = np.signbit(s_spec[:, 1:]) != np.signbit(s_spec[:, :-1])
    return on | (both & (flip | jump)).any(axis=-1)


def _batch_poses(kind, b, t, duration_ms):
    c = b["center"][:, None, :] + (b["speed"][:, None] * t * 1e-3)[..., None] * b["direction"][:, None, :]
    if kind == "rotating":
        a = b["angle"][:, None] + (b["angle_end"] - b["angle"])[:, None] * (t / duration_ms)
    else:
        a = np.broadcast_to(b["angle"][:, None], (len(b["angle"]), len(t)))
    return c, np.deg2rad(a)


def is_significant(mr: MovingReflector, bs, ue: Trajectory, duration_ms: float) -> bool:
    """True if the specular point lands on the strip at some time of the UE path.

    Every direction lies in some lobe of the arrays, so this purely
    geometric test is the omnidirectional notion of significance; the array
    factor then decides how much each reflector matters.
    """
    t = np.linspace(0.0, duration_ms, _CHECK_TIMES)
    c, a = mr.pose(t, duration_ms)
    return bool(_significant_mask(c[None], a[None], np.array([mr.reflector.length]), np.asarray(bs, float), ue.position(t))[0])


def _draw_reflector(kind: str, rng, cfg: GeneratorConfig, bs, ue: Trajectory) -> MovingReflector:
    t = np.linspace(0.0, cfg.duration_ms, _CHECK_TIMES)
    ue_pos = ue.position(t)
    for _ in range(max(1, cfg.max_attempts // _BATCH)):
        b = _draw_reflector_batch(kind, rng, cfg, _BATCH)
        if not cfg.significant_only:
            return _batch_member(kind, b, 0)
        c, a = _batch_poses(kind, b, t, cfg.duration_ms)
        hits = np.flatnonzero(_significant_mask(c, a, b["length"], np.asarray(bs, float), ue_pos))
        if hits.size:
            return _batch_member(kind, b, int(hits[0]))
    raise InfeasibleConfigError("no significant reflector placement found")


def gen_scenario(index: int, cfg: GeneratorConfig) -> Scenario:
    """Draw scenario ``index`` of the stream seeded by ``cfg.master_seed``."""
    rng = scenario_rng(cfg.master_seed, index)
    (bx0, by0), (bx1, by1) = cfg.bs_line
    s = rng.uniform(0.0, 1.0)
    bs = Point2(bx0 + s * (bx1 - bx0), by0 + s * (by1 - by0))

    blocker = _draw_contained(cfg.blocker_origin, rng, cfg.speed_range, cfg)
    approach = (0.0, 1.0)

    (x0, y0), (x1, y1) = cfg.region_min, cfg.region_max
    for _ in range(cfg.max_attempts):
        origin = (float(rng.uniform(x0, x1)), float(rng.uniform(y0, y1)))
        clr = los_clearance(np.asarray(bs), np.asarray(origin), np.asarray(cfg.blocker_origin), approach)
        if not (clr.active and clr.h >= 0):
            break
    else:
        raise InfeasibleConfigError("no UE origin in line of sight")
    ue = _draw_contained(origin, rng, cfg.speed_range, cfg)

    q = int(rng.integers(cfg.q_min, cfg.q_max + 1))
    kinds = _motion_kinds(q, cfg.motion_rule, rng)
    reflectors = [_draw_reflector(kind, rng, cfg, bs, ue) for kind in kinds]

    seed = int(np.random.SeedSequence([cfg.master_seed, index]).generate_state(1)[0])
    return Scenario(
        id=index,
        bs=bs,
        ue=ue,
        blocker=blocker,
        reflectors=tuple(reflectors),
        duration_ms=cfg.duration_ms,
        rng_seed=seed,
        blocker_approach=approach,
    )


def config_to_dict(cfg: GeneratorConfig) -> dict:
    return asdict(cfg)


def crossing_scenario(
    crossing_ms: float = 680.0,
    ue_speed: float = 8.0,
    bs=(-20.0, 0.0),
    ue_x: float = 20.0,
    reflectors=(),
    duration_ms: float = 1000.0,
) -> Scenario:
    """Static edge at the origin, UE moving straight down across the BS-edge line.

    The UE crosses the geometric shadow boundary (the x-axis) at
    ``crossing_ms``; with no reflectors the trace shows the classic
    knife-edge fringes before the drop.
    """
    y0 = ue_speed * crossing_ms * 1e-3
    return Scenario(
        id=-1,
        bs=Point2(*bs),
        ue=Trajectory(Point2(ue_x, y0), (0.0, -1.0), ue_speed, duration_ms),
        blocker=Trajectory(Point2(0.0, 0.0), (0.0, 1.0), 0.0, duration_ms),
        reflectors=tuple(reflectors),
        duration_ms=duration_ms,
    )
