"""
Closed loop parking: plan, execute through the nonlinear model, replan from
where the vehicle actually ended until it is parked or a limit is reached.
"""
from dataclasses import dataclass, field
from typing import List
import json
import numpy as np
from mirrorpark.scenario.geometry import Pose2D, collision_free
from mirrorpark.mirror import choose_mirror, MirrorInfeasible
from mirrorpark.dynamics.bicycle import VehicleState, simulate, X, V, Y, THETA
from mirrorpark.planner.segment import plan_segment, transform_commands
from mirrorpark.evaluate.criteria import assess
import logging
log = logging.getLogger()


@dataclass
class ParkOutcome:
    success: bool
    reason: str
    executed_trace: np.ndarray
    commands: np.ndarray
    switch_count: int = 0
    duration: float = 0.0
    replans: int = 0
    plan_wall_ms: List[float] = field(default_factory=list)
    criteria: object = None
    mirror_used: List[bool] = field(default_factory=list)

    def record(self, scenario, timing=True):
        """ outcome fields for json and tables """
        ms = [round(float(t), 3) if timing else 0.0 for t in self.plan_wall_ms]
        return dict(**scenario.record(), success=bool(self.success), reason=self.reason,
                    switch_count=int(self.switch_count),
                    duration_s=round(float(self.duration), 6),
                    replans=int(self.replans), plan_wall_ms=ms)

    def to_json(self, scenario, timing=True):
        return json.dumps(self.record(scenario, timing), indent=2, sort_keys=True)


def switch_count(speeds, tol=1e-9):
    """ number of driving direction reversals. stops in between do not count """
    signs = np.sign(np.asarray(speeds, dtype=float))
    signs = signs[np.abs(speeds) > tol]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def _safe_prefix(states, scenario):
    """ number of leading states with a collision free footprint """
    for i, xi in enumerate(states):
        if not collision_free(Pose2D(xi[X], xi[Y], xi[THETA]), scenario.regions,
                              scenario.vehicle):
            return i
    return len(states)


def _mirror_for(scenario, pose, config):
    """ MirrorSpec when planning through the mirror applies, else None """
    try:
        spec = choose_mirror(scenario, pose, config)
    except MirrorInfeasible as e:
        if not config.MIRROR_FALLBACK:
            raise
        log.warning(f"{e}. planning to the real target")
        return None
    return spec if spec.applies(scenario, pose) else None


def decide_and_park(scenario, weights=None, config=None):
    """ return ParkOutcome. failures are reported in reason, never raised

    reasons: parked, timeout, replan_limit, plan_failed, mirror_infeasible, no_progress
    """
    from mirrorpark.config import Config
    config = config or Config()
    weights = weights or config.weights()
    vehicle = scenario.vehicle
    dt = vehicle.dt

    trace = [VehicleState.from_pose(scenario.initial_pose).array()]
    executed = []
    plan_ms, mirror_used = [], []
    replans = 0
    reason = None

    while True:
        states = np.array(trace)
        report = assess(states, scenario, config)
        if report.passed:
            reason = "parked"
            break
        elapsed = (len(trace) - 1) * dt
        if elapsed >= config.TIME_LIMIT:
            reason = "timeout"
            break
        if replans >= config.MAX_REPLANS:
            reason = "replan_limit"
            break

        xi = trace[-1]
        pose = Pose2D(xi[X], xi[Y], xi[THETA])
        try:
            mirror = _mirror_for(scenario, pose, config)
        except MirrorInfeasible as e:
            log.info(f"{e}. fallback disabled")
            reason = "mirror_infeasible"
            break

        plan = plan_segment(scenario, xi, mirror, weights, config)
        if not plan.ok and mirror is not None:
            log.warning(f"mirror plan {plan.status}. planning to the real target")
            fallback = plan_segment(scenario, xi, None, weights, config)
            fallback.solver_stats["wall_ms"] += plan.solver_stats["wall_ms"]
            plan, mirror = fallback, None
        replans += 1
        plan_ms.append(plan.solver_stats["wall_ms"])
        mirror_used.append(plan.crossing_step is not None)
        if not plan.ok:
            reason = "plan_failed"
            break

        commands = transform_commands(plan)
        # never run past the time limit
        remaining = int(np.ceil((config.TIME_LIMIT - elapsed) / dt - 1e-9))
        commands = commands[:max(remaining, 0)]
        rollout = simulate(xi, commands, vehicle)[1:]
        safe = _safe_prefix(rollout, scenario)
        if safe < len(rollout):
            log.info(f"execution stopped before a collision at step {safe + 1}")
        if safe == 0:
            reason = "no_progress"
            break
        trace.extend(rollout[:safe])
        executed.extend(commands[:safe])
        log.info(f"replan {replans}: {plan.status} crossing={plan.crossing_step} "
                 f"executed {safe} steps")

    states = np.array(trace)
    report = assess(states, scenario, config)
    outcome = ParkOutcome(success=report.passed, reason=reason, executed_trace=states,
                          commands=np.array(executed).reshape(-1, 2),
                          switch_count=switch_count(states[:, V]),
                          duration=(len(states) - 1) * dt, replans=replans,
                          plan_wall_ms=plan_ms, criteria=report, mirror_used=mirror_used)
    log.info(f"park {scenario.kind} {outcome.reason}: replans={replans} "
             f"switches={outcome.switch_count} duration={outcome.duration:.1f}s")
    return outcome
