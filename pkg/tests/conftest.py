import numpy as np

from blockcast.geometry import Point2, StripReflector
from blockcast.scenario import MovingReflector, ReflectorMotion, Scenario, Trajectory


def make_scenario(bs=(-20.0, 0.0), ue=(10.0, 10.0), ue_dir=(1.0, 0.0), ue_speed=0.0,
                  tip=(-100.0, -100.0), tip_dir=(0.0, 1.0), tip_speed=0.0,
                  reflectors=(), duration_ms=1000.0):
    n = np.hypot(*ue_dir)
    return Scenario(
        id=0,
        bs=Point2(*bs),
        ue=Trajectory(Point2(*ue), (ue_dir[0] / n, ue_dir[1] / n), ue_speed, duration_ms),
        blocker=Trajectory(Point2(*tip), tip_dir, tip_speed, duration_ms),
        reflectors=tuple(reflectors),
        duration_ms=duration_ms,
    )


def static_strip(center, length, angle_deg):
    return MovingReflector(StripReflector(Point2(*center), length, angle_deg), ReflectorMotion())
