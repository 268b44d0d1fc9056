"""
Parking scenario construction for parallel, reverse and angle slots.

World frame: x along the road, y from the road towards the slot side.
The slot opening lies on y = 0 and the road occupies -RW <= y <= 0.
"""
from dataclasses import dataclass, field, replace
from typing import Tuple
import numpy as np
from shapely.geometry import Polygon
from mirrorpark.scenario.vehicle import VehicleParams
from mirrorpark.scenario.geometry import (Pose2D, ConvexRegion, collision_free,
                                          footprint_polygon)
import logging
log = logging.getLogger()

KINDS = ("parallel", "reverse", "angle")


class UnusableCase(ValueError):
    """ scenario cannot be generated e.g. the start footprint hits a region """


@dataclass(frozen=True)
class SlotFrame:
    """ slot rectangle = origin + s * across + t * depth

    s in [0, width] along the opening, t in [0, length] into the slot
    """
    origin: Tuple[float, float]
    across: Tuple[float, float]
    depth: Tuple[float, float]
    width: float
    length: float

    def local(self, points):
        """ world points [n, 2] to slot coordinates (s, t) [n, 2] """
        p = np.atleast_2d(points) - np.asarray(self.origin)
        return np.stack([p @ np.asarray(self.across), p @ np.asarray(self.depth)], axis=1)

    def world(self, s, t):
        return np.asarray(self.origin) + s * np.asarray(self.across) + t * np.asarray(self.depth)

    @property
    def rectangle(self):
        return np.array([self.world(0, 0), self.world(self.width, 0),
                         self.world(self.width, self.length), self.world(0, self.length)])

    def shapely(self):
        return Polygon(self.rectangle)

    def shifted(self, dx, dy):
        return replace(self, origin=(self.origin[0] + dx, self.origin[1] + dy))


@dataclass(frozen=True)
class ParkingScenario:
    kind: str
    RW: float
    SL: float
    SW: float
    slot_angle: float
    initial_pose: Pose2D
    target_pose: Pose2D
    regions: Tuple[ConvexRegion, ...]
    vehicle: VehicleParams
    slot: SlotFrame
    theta0: float = 0.0
    y0: float = 0.0
    y1: float = 0.0
    # far road edge and slot opening as y values before any shift
    road_edge: float = field(default=None)
    opening: float = field(default=0.0)

    @property
    def key(self):
        """ identifies the case in outcome tables """
        return (self.kind, round(self.RW, 4), round(self.SL, 4), round(self.SW, 4),
                round(np.degrees(self.theta0), 4), round(self.y0, 4))

    def record(self):
        """ case fields for case files and outcome rows """
        return dict(kind=self.kind, RW=self.RW, SL=self.SL, SW=self.SW,
                    theta0=round(float(np.degrees(self.theta0)), 10), y0=self.y0, y1=self.y1)

    def shifted(self, dx, dy):
        """ same case with the world frame moved by (dx, dy) """
        return replace(self,
                       initial_pose=self.initial_pose.shifted(dx, dy),
                       target_pose=self.target_pose.shifted(dx, dy),
                       regions=tuple(r.shifted(dx, dy) for r in self.regions),
                       slot=self.slot.shifted(dx, dy),
                       road_edge=self.road_edge + dy,
                       opening=self.opening + dy)

    def entered_slot(self, pose):
        """ rear axle past the opening line """
        return pose.y > self.opening


##### layouts ##################################################################

def _rect(x0, y0, x1, y1):
    return ConvexRegion.from_vertices([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


def _road_strip(RW, x0, x1, depth):
    return _rect(x0, -RW - depth, x1, -RW)


def _parallel(SL, SW, RW, extent, depth):
    slot = SlotFrame(origin=(0.0, 0.0), across=(1.0, 0.0), depth=(0.0, 1.0),
                     width=SL, length=SW)
    regions = (_rect(-extent, 0, 0, SW + depth),
               _rect(SL, 0, SL + extent, SW + depth),
               _rect(0, SW, SL, SW + depth),
               _road_strip(RW, -extent, SL + extent, depth))
    return slot, 0.0, regions


def _reverse(SL, SW, RW, extent, depth):
    slot = SlotFrame(origin=(0.0, 0.0), across=(1.0, 0.0), depth=(0.0, 1.0),
                     width=SW, length=SL)
    regions = (_rect(-extent, 0, 0, SL + depth),
               _rect(SW, 0, SW + extent, SL + depth),
               _rect(0, SL, SW, SL + depth),
               _road_strip(RW, -extent, SW + extent, depth))
    return slot, -np.pi / 2, regions


def _angle(SL, SW, RW, extent, depth):
    """ slot axis at 45 degrees to the road, leaning against the driving direction """
    r = np.sqrt(0.5)
    across = np.array([r, r])
    into = np.array([-r, r])
    slot = SlotFrame(origin=(0.0, 0.0), across=tuple(across), depth=tuple(into),
                     width=SW, length=SL)
    back = (SL + depth) * into
    opening = SW * np.sqrt(2)
    far = SW * across + back
    left = ConvexRegion.from_vertices([(-extent, 0), (0, 0), tuple(back), (-extent, back[1])])
    right = ConvexRegion.from_vertices([(opening, 0), (opening + extent, 0),
                                        (opening + extent, far[1]), tuple(far)])
    behind = ConvexRegion.from_vertices([tuple(SL * into), tuple(SW * across + SL * into),
                                         tuple(far), tuple(back)])
    road = _road_strip(RW, -extent, opening + extent, depth)
    return slot, -np.pi / 4, (left, right, behind, road)


LAYOUTS = dict(parallel=_parallel, reverse=_reverse, angle=_angle)
SLOT_ANGLES = dict(parallel=0.0, reverse=np.pi / 2, angle=np.pi / 4)


def target_pose(slot, heading, vehicle):
    """ rear axle pose that centres the footprint in the slot rectangle """
    centre = slot.world(slot.width / 2, slot.length / 2)
    offset = (vehicle.l2 - vehicle.l1) / 2
    rear = centre - offset * np.array([np.cos(heading), np.sin(heading)])
    return Pose2D(rear[0], rear[1], heading)


def default_y1(RW, y0, vehicle):
    return max(0.0, RW - y0 - vehicle.l3 / 2)


def build_scenario(kind, RW, SL, SW, theta0, y0, y1=None, vehicle=None, config=None):
    """ return ParkingScenario

    theta0: initial heading (rad)
    y0: distance of the start rear axle from the slot side road edge
    y1: distance from the far road edge. derived from y0 when None
    """
    from mirrorpark.config import Config
    config = config or Config()
    vehicle = vehicle or config.vehicle()
    if kind not in KINDS:
        raise ValueError(f"unknown parking kind {kind}")
    if min(RW, SL, SW) <= 0:
        raise ValueError(f"dimensions must be positive: RW={RW} SL={SL} SW={SW}")
    if not 0 <= y0 <= RW + 1e-9:
        raise ValueError(f"y0={y0} outside [0, RW={RW}]")
    derived = default_y1(RW, y0, vehicle)
    if y1 is None:
        y1 = derived
    elif abs(y1 - derived) > 1e-6:
        log.warning(f"y1={y1} differs from {derived:.4f} implied by RW and y0. "
                    f"it is recorded but the layout does not use it")

    slot, heading, regions = LAYOUTS[kind](SL, SW, RW, config.REGION_EXTENT, config.REGION_DEPTH)
    target = target_pose(slot, heading, vehicle)
    start = Pose2D(target.x + config.INITIAL_X_OFFSET[kind], -y0, theta0)

    scenario = ParkingScenario(kind=kind, RW=float(RW), SL=float(SL), SW=float(SW),
                               slot_angle=SLOT_ANGLES[kind], initial_pose=start,
                               target_pose=target, regions=regions, vehicle=vehicle,
                               slot=slot, theta0=float(theta0), y0=float(y0),
                               y1=float(y1), road_edge=-float(RW))

    if not collision_free(start, regions, vehicle):
        raise UnusableCase(f"initial footprint collides: {kind} RW={RW} SL={SL} "
                           f"SW={SW} theta0={np.degrees(theta0):.0f} y0={y0}")
    if not slot.shapely().buffer(1e-9).covers(footprint_polygon(target, vehicle)):
        raise UnusableCase(f"vehicle does not fit the {kind} slot SL={SL} SW={SW}")
    return scenario
