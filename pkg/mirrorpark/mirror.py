"""
Mirror line placement.

The mirror line is perpendicular to the slot axis at distance l_mi from the
target. Planning forward to the target mirrored across it, then executing the
commands after the line crossing negated, parks the vehicle at the real target.
"""
from dataclasses import dataclass
import numpy as np
from mirrorpark.scenario.geometry import Pose2D
import logging
log = logging.getLogger()


class MirrorInfeasible(ValueError):
    """ no mirror line can be placed for this scenario and pose """


def min_turn_radius(vehicle):
    """ rear axle turning radius at full lock """
    if not 0 < vehicle.delta_max < np.pi / 2:
        raise ValueError(f"delta_max must be in (0, pi/2) not {vehicle.delta_max}")
    return vehicle.l / np.tan(vehicle.delta_max)


##### feasible bands ###########################################################

def parallel_band(theta, vehicle, SW):
    """ return (lower, upper) mirror distance for a parallel slot

    lower: lateral travel needed to turn from theta back to the slot axis
    upper: lateral room left between the vehicle and the slot side at theta
    The band is empty when lower > upper.
    """
    if abs(theta) >= np.pi / 2:
        raise ValueError(f"|theta| must be below pi/2 not {theta}")
    lower = min_turn_radius(vehicle) * (1 - np.cos(theta))
    upper = SW / 2 - vehicle.l1 * np.sin(abs(theta)) - vehicle.l3 / 2 * np.cos(theta)
    return lower, upper


def reverse_lower(theta, vehicle):
    return min_turn_radius(vehicle) * (1 - np.cos(np.pi / 2 - theta))


def angle_lower(theta, vehicle):
    return min_turn_radius(vehicle) * (1 - np.cos(np.pi / 4 - theta))


def mirror_distance(kind, theta, vehicle, SW, margin=0.3):
    """ band value of l_mi at heading theta before any pose adjustment

    parallel uses the middle of the band. reverse and angle add margin to the lower bound
    """
    if kind == "parallel":
        lower, upper = parallel_band(theta, vehicle, SW)
        if lower > upper:
            raise MirrorInfeasible(f"empty parallel band at {np.degrees(theta):.1f} deg "
                                   f"({lower:.4f} > {upper:.4f})")
        return (lower + upper) / 2
    if kind == "reverse":
        return reverse_lower(theta, vehicle) + margin
    if kind == "angle":
        return angle_lower(theta, vehicle) + margin
    raise ValueError(f"unknown parking kind {kind}")


##### mirror spec ##############################################################

@dataclass(frozen=True)
class MirrorSpec:
    """ mirror line through line_point with unit line_normal pointing away from the target

    The real target is at signed distance -l_mi; the mirrored target at +l_mi.
    """
    line_point: np.ndarray
    line_normal: np.ndarray
    l_mi: float
    mirrored_target: Pose2D
    desired_state: np.ndarray

    def signed_distance(self, points):
        """ positive beyond the line, negative on the target side """
        points = np.asarray(points, dtype=float)
        return (points - self.line_point) @ self.line_normal

    def reflect(self, point):
        """ reflect a point across the mirror line """
        point = np.asarray(point, dtype=float)
        return point - 2 * self.signed_distance(point) * self.line_normal

    def applies(self, scenario, pose):
        """ plan through the mirror only from outside the slot and before the line """
        if scenario.entered_slot(pose):
            return False
        return self.signed_distance(pose.position) < 0


def _normal(scenario):
    """ parallel: deeper into the slot. reverse and angle: out of the slot """
    depth = np.asarray(scenario.slot.depth, dtype=float)
    return depth if scenario.kind == "parallel" else -depth


def choose_mirror(scenario, pose=None, config=None):
    """ return MirrorSpec for the scenario as seen from pose

    pose: current vehicle pose. defaults to the initial pose
    raises MirrorInfeasible when the band is empty or no line fits on the road
    """
    from mirrorpark.config import Config
    config = config or Config()
    pose = pose or scenario.initial_pose
    vehicle = scenario.vehicle
    target = scenario.target_pose
    n = _normal(scenario)

    l_mi = mirror_distance(scenario.kind, config.MIRROR_NOMINAL_HEADING, vehicle,
                           scenario.SW, config.MIRROR_MARGIN)

    if scenario.kind != "parallel":
        # vehicle must start clear of the line on the target side
        needed = float(n @ (pose.position - target.position)) + config.MIRROR_APPROACH_CLEARANCE
        if needed > l_mi:
            log.warning(f"mirror distance raised from {l_mi:.3f} to {needed:.3f}")
            l_mi = needed
        # line point must stay inside the far road edge
        cap = (target.y - scenario.road_edge - config.MIRROR_ROAD_CLEARANCE) / -n[1]
        if l_mi > cap:
            raise MirrorInfeasible(f"mirror line needs l_mi={l_mi:.3f} beyond road cap {cap:.3f}")

    line_point = target.position + l_mi * n
    mirrored = target.position + 2 * l_mi * n
    mirrored_target = Pose2D(mirrored[0], mirrored[1], target.theta)
    desired = np.array([mirrored[0], 0.0, 0.0, mirrored[1], target.theta, 0.0])
    return MirrorSpec(line_point=line_point, line_normal=n, l_mi=float(l_mi),
                      mirrored_target=mirrored_target, desired_state=desired)
