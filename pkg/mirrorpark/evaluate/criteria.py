"""
Parking success criteria.

Parallel slots need positive front, rear and edge clearances. Reverse and angle
slots need every corner gap and the end gap above the bay margin. All slots
need the heading within tolerance, the footprint inside the slot, a collision
free trace and a duration below the time limit.
"""
from dataclasses import dataclass, field, asdict
import numpy as np
from mirrorpark.scenario.geometry import (Pose2D, footprint, footprint_polygon,
                                          collision_free, wrap_angle)
from mirrorpark.dynamics.bicycle import X, Y, THETA
import logging
log = logging.getLogger()

CORNERS = ["fr", "fl", "rl", "rr"]


@dataclass
class CriteriaReport:
    heading_error_deg: float
    margins: dict = field(default_factory=dict)
    duration_s: float = 0.0
    collision_free: bool = True
    inside_slot: bool = True
    heading_ok: bool = True
    margins_ok: bool = True
    duration_ok: bool = True

    @property
    def passed(self):
        return (self.heading_ok and self.margins_ok and self.duration_ok
                and self.collision_free and self.inside_slot)

    def failures(self):
        """ names of failed sub-criteria """
        checks = dict(heading=self.heading_ok, margins=self.margins_ok,
                      duration=self.duration_ok, collision=self.collision_free,
                      inside_slot=self.inside_slot)
        return [k for k, ok in checks.items() if not ok]

    def as_dict(self):
        d = asdict(self)
        d["pass"] = self.passed
        return d


def margins(pose, scenario):
    """ named clearances between the footprint and the slot rectangle """
    slot = scenario.slot
    local = slot.local(footprint(pose, scenario.vehicle))
    s, t = local[:, 0], local[:, 1]
    if scenario.kind == "parallel":
        return dict(M_f=float(slot.width - s.max()), M_r=float(s.min()), M_e=float(t.min()))
    out = {f"M_{c}": float(min(si, slot.width - si)) for c, si in zip(CORNERS, s)}
    out["M_e"] = float(slot.length - t.max())
    return out


def assess(trace, scenario, config=None, duration=None):
    """ return CriteriaReport for an executed trace [steps + 1, 6] or a ParkOutcome """
    from mirrorpark.config import Config
    config = config or Config()
    states = getattr(trace, "executed_trace", trace)
    states = np.atleast_2d(np.asarray(states, dtype=float))
    vehicle = scenario.vehicle
    final = Pose2D(states[-1, X], states[-1, Y], states[-1, THETA])
    duration = (len(states) - 1) * vehicle.dt if duration is None else duration

    error = float(np.degrees(abs(wrap_angle(final.theta - scenario.target_pose.theta))))
    named = margins(final, scenario)
    threshold = config.PARALLEL_MARGIN if scenario.kind == "parallel" else config.BAY_MARGIN
    clear = all(collision_free(Pose2D(x, y, th), scenario.regions, vehicle)
                for x, y, th in states[:, [X, Y, THETA]])
    inside = scenario.slot.shapely().buffer(1e-9).covers(footprint_polygon(final, vehicle))

    return CriteriaReport(heading_error_deg=error, margins=named, duration_s=duration,
                          collision_free=bool(clear), inside_slot=bool(inside),
                          heading_ok=error <= config.HEADING_TOL_DEG,
                          margins_ok=all(m > threshold for m in named.values()),
                          duration_ok=duration < config.TIME_LIMIT)
