"""
Plan one segment by successive linearization.

Each pass linearizes about the previous solution, assembles the horizon problem
and resolves collisions lazily. Mirror plans pin the step where the path reaches
the mirror line.
"""
from dataclasses import dataclass, field
from typing import List, Optional
import time
import numpy as np
from mirrorpark.scenario.geometry import Pose2D, footprint_polygon
from mirrorpark.dynamics.bicycle import X, V, Y, THETA
from mirrorpark.dynamics.linear import linearize
from mirrorpark.planner.problem import (assemble, desired_state, Crossing,
                                        FeaturePointRows)
from mirrorpark.solvers.qp import solve_qp
from mirrorpark.solvers.lazy import algorithm_one
import logging
log = logging.getLogger()

MIN_CROSSING_STEP = 3
# steps the crossing moves later when the vehicle cannot stop on the line in time
CROSSING_RETRY = 4


@dataclass
class PlanResult:
    states: np.ndarray
    commands: np.ndarray
    status: str
    theta_set: List[int] = field(default_factory=list)
    crossing_step: Optional[int] = None
    solver_stats: dict = field(default_factory=dict)
    mirror: object = None
    # DisjunctionGroups of the final pass over the stacked [states, commands] vector
    groups: List = field(default_factory=list)

    @property
    def ok(self):
        """ collision free plan. node_limit plans carry the best incumbent found """
        return self.status in ("optimal", "node_limit")


def trapezoid(N, peak):
    """ speed profile rising over the first quarter and falling to 0 over the last """
    ramp = max(1, N // 4)
    i = np.arange(N + 1)
    return peak * np.clip(np.minimum(i / ramp, (N - i) / ramp), 0.0, 1.0)


def reference_states(xi0, speeds, headings, dt):
    """ integrate positions for the given speed and heading profile """
    ref = np.zeros((len(speeds), 6))
    ref[0] = xi0
    ref[:, V] = speeds
    ref[:, THETA] = headings
    for i in range(1, len(speeds)):
        ref[i, X] = ref[i - 1, X] + speeds[i - 1] * np.cos(headings[i - 1]) * dt
        ref[i, Y] = ref[i - 1, Y] + speeds[i - 1] * np.sin(headings[i - 1]) * dt
    ref[0] = xi0
    return ref


def linearizing_angle(kind, heading, desired_heading, config):
    angle = config.LINEARIZING_ANGLE.get(kind)
    if angle is None:
        angle = heading + (desired_heading - heading) / 2
    return float(angle)


def detect_crossing(states, mirror, tol=1e-6):
    """ first step at or beyond the mirror line, else the step closest to it """
    s = mirror.signed_distance(states[:, [X, Y]])
    ahead = np.flatnonzero(s[1:] >= -tol)
    if len(ahead):
        return int(ahead[0]) + 1
    return int(np.argmax(s[1:])) + 1


def transform_commands(plan):
    """ negate the commands from the crossing step on """
    commands = np.array(plan.commands, dtype=float)
    if plan.crossing_step is not None:
        commands[plan.crossing_step:] *= -1
    return commands


def crossing_step(states, mirror, N, tol=1e-6):
    """ detected crossing clipped to the pinnable steps. None if the line is never reached """
    k = detect_crossing(states, mirror, tol)
    if mirror.signed_distance(states[k, [X, Y]]) < -tol:
        return None
    return int(np.clip(k, MIN_CROSSING_STEP, N - 1))


def stopping_steps(v0, vehicle):
    """ steps before the speed may be held on the other side of 0 """
    decel = min(abs(vehicle.a_min), vehicle.a_max)
    return int(np.ceil((abs(v0) / decel + vehicle.tau_a) / vehicle.dt)) + 1


def plan_segment(scenario, state, mirror=None, weights=None, config=None):
    """ return PlanResult from state towards the mirrored target, or the real target

    state: 6-vector or VehicleState
    mirror: MirrorSpec. None plans directly to the real target
    Mirror plans keep one driving direction. Passes stop early once the crossing step,
    the active collision edges and the trajectory settle.
    """
    from mirrorpark.config import Config
    config = config or Config()
    weights = weights or config.weights()
    vehicle = scenario.vehicle
    N, dt = vehicle.N, vehicle.dt
    xi0 = state.array() if hasattr(state, "array") else np.asarray(state, dtype=float)
    target = scenario.target_pose
    started = time.perf_counter()

    if mirror is not None and not mirror.applies(scenario, Pose2D(xi0[X], xi0[Y], xi0[THETA])):
        log.info("vehicle past the mirror line or inside the slot. planning to the target")
        mirror = None
    if mirror is not None:
        goal = mirror.desired_state
    else:
        goal = np.array([target.x, 0.0, 0.0, target.y, target.theta, 0.0])
    desired = desired_state(goal, xi0[THETA])
    angle = linearizing_angle(scenario.kind, xi0[THETA], desired[THETA], config)

    # first reference: trapezoidal speed at the linearizing angle
    peak = config.NOMINAL_SPEED or min(abs(vehicle.v_min), vehicle.v_max) / 2
    direction, direction_from = None, 1
    if mirror is not None:
        sign = -1.0 if scenario.kind == "parallel" else 1.0
        direction = sign
        if sign * xi0[V] < 0:
            direction_from = stopping_steps(xi0[V], vehicle)
    else:
        heading = np.array([np.cos(xi0[THETA]), np.sin(xi0[THETA])])
        sign = 1.0 if (target.position - xi0[[X, Y]]) @ heading >= 0 else -1.0
    ref = reference_states(xi0, sign * trapezoid(N, peak), np.full(N + 1, angle), dt)
    angles = np.full(N + 1, angle)

    # a start closer than the safety margin keeps half its clearance instead
    body = footprint_polygon(Pose2D(xi0[X], xi0[Y], xi0[THETA]), vehicle)
    clearance = min((body.distance(r.shapely()) for r in scenario.regions), default=np.inf)
    margin = min(config.SAFETY_MARGIN, 0.5 * clearance)

    stats = dict(passes=0, miqp_solves=0, nodes=0, qp_iterations=0, binaries=0)

    def build(ref, angles, k):
        models = linearize(ref, angles[:-1], vehicle)
        crossing = None
        if k is not None:
            reflect = target.position if config.REFLECT_ABOUT_CROSSING else None
            crossing = Crossing(step=k, line_point=mirror.line_point,
                                line_normal=mirror.line_normal, reflect_target=reflect)
        return assemble(scenario, xi0, goal, weights, models, crossing, config,
                        direction=direction, direction_from=direction_from)

    def relaxed(problem):
        """ the horizon problem without collision rows """
        sol = solve_qp(problem.base, config.QP_TOL, config.QP_MAX_ITER,
                       config.QP_REGULARIZATION, basis=problem.basis, check=False,
                       origin=problem.origin)
        stats["qp_iterations"] += sol.iterations
        return sol

    def solve(ref, angles, k, warm):
        problem = build(ref, angles, k)
        rows = FeaturePointRows(problem.horizon, vehicle, angles, k, margin)
        lazy = algorithm_one(problem.base, scenario.regions, rows, tol=config.QP_TOL,
                             max_iter=config.LAZY_MAX_ITER, node_limit=config.PLAN_NODE_LIMIT,
                             gap=config.MIQP_GAP, big_m=config.BIG_M,
                             qp_max_iter=config.QP_MAX_ITER,
                             regularization=config.QP_REGULARIZATION,
                             basis=problem.basis, origin=problem.origin, warm=warm)
        stats["passes"] += 1
        stats["miqp_solves"] += lazy.miqp_solves
        stats["nodes"] += lazy.nodes
        stats["qp_iterations"] += lazy.qp_iterations
        stats["binaries"] = lazy.binaries
        return problem, lazy

    def finish(problem, z, status, k, lazy=None):
        stats["wall_ms"] = (time.perf_counter() - started) * 1000
        if z is None:
            return PlanResult(states=np.tile(xi0, (N + 1, 1)), commands=np.zeros((N, 2)),
                              status=status, solver_stats=stats, mirror=mirror)
        return PlanResult(states=problem.horizon.states(z),
                          commands=problem.horizon.commands(z), status=status,
                          theta_set=list(lazy.theta_set), crossing_step=k,
                          solver_stats=stats, mirror=mirror, groups=list(lazy.groups))

    k = None
    if mirror is not None:
        # crossing of the plan without collision rows, moved later until the stop fits
        problem = build(ref, angles, None)
        sol = relaxed(problem)
        if not sol.optimal:
            return finish(problem, None, sol.status, None)
        ref = problem.horizon.states(sol.z)
        if config.RELINEARIZE_HEADING:
            angles = ref[:, THETA].copy()
        k = crossing_step(ref, mirror, N)
        while k is not None:
            problem = build(ref, angles, k)
            if relaxed(problem).optimal:
                break
            log.debug(f"no stop on the mirror line at step {k}")
            k = min(k + CROSSING_RETRY, N - 1) if k < N - 1 else None
        if k is None:
            log.info("mirror line out of reach this segment")

    warm, lazy = {}, None
    for it in range(config.LINEARIZE_ITERATIONS):
        problem, lazy = solve(ref, angles, k, warm)
        if not lazy.usable:
            log.info(f"segment pass {it + 1} failed: {lazy.status}")
            return finish(problem, None, lazy.status, k)
        states = problem.horizon.states(lazy.z)
        moved = np.abs(states[:, [X, Y, THETA]] - ref[:, [X, Y, THETA]]).max()
        settled = it > 0 and lazy.edges == warm and moved < config.LINEARIZE_TOL
        ref, warm = states, lazy.edges
        if config.RELINEARIZE_HEADING:
            angles = ref[:, THETA].copy()
        if k is not None:
            new_k = crossing_step(ref, mirror, N)
            if new_k is not None and abs(new_k - k) > config.CROSSING_SHIFT:
                log.info(f"crossing moved from {k} to {new_k}. solving again")
                k = new_k
                settled = False
                if it == config.LINEARIZE_ITERATIONS - 1:
                    problem, lazy = solve(ref, angles, k, warm)
                    if not lazy.usable:
                        return finish(problem, None, lazy.status, k)
        if settled:
            break

    result = finish(problem, lazy.z, lazy.status, k, lazy)
    log.info(f"segment {result.status}: crossing={k} binaries={stats['binaries']} "
             f"miqp={stats['miqp_solves']} passes={stats['passes']} "
             f"{stats['wall_ms']:.0f}ms")
    return result
