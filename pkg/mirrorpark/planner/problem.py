"""
Horizon problem assembly.

Decision vector z = [xi_0 .. xi_N, u_0 .. u_{N-1}] with 6 states and 2 commands
per step. Dynamics are equality rows, actuator limits are bounds and the
collision rows are built lazily from FeaturePointRows.
"""
from dataclasses import dataclass
from typing import Optional
import numpy as np
from scipy.linalg import null_space, qr
from mirrorpark.scenario.geometry import body_offsets, wrap_angle, polygons_overlap
from mirrorpark.dynamics.bicycle import X, V, A, Y, THETA, DELTA
from mirrorpark.solvers.qp import QPProblem
from mirrorpark.solvers.miqp import MIQPProblem, DisjunctionGroup
import logging
log = logging.getLogger()

# a point is inside a region when every edge value is below this
INSIDE_TOL = 1e-4


@dataclass(frozen=True)
class Weights:
    Q: np.ndarray
    R: np.ndarray
    Q_terminal: np.ndarray

    def __post_init__(self):
        for name, shape in [("Q", (6, 6)), ("R", (2, 2)), ("Q_terminal", (6, 6))]:
            M = np.asarray(getattr(self, name), dtype=float)
            if M.shape != shape:
                raise ValueError(f"{name} must be {shape} not {M.shape}")
            if not np.allclose(M, M.T):
                raise ValueError(f"{name} must be symmetric")
            object.__setattr__(self, name, M)
        if np.linalg.eigvalsh(self.Q).min() < -1e-12 or \
                np.linalg.eigvalsh(self.Q_terminal).min() < -1e-12:
            raise ValueError("Q and Q_terminal must be positive semidefinite")
        if np.linalg.eigvalsh(self.R).min() <= 0:
            raise ValueError("R must be positive definite")
        if self.Q_terminal[V, V] <= 0:
            raise ValueError("terminal speed weight must be positive")

    def scaled(self, factor):
        return Weights(self.Q * factor, self.R * factor, self.Q_terminal * factor)


@dataclass(frozen=True)
class Horizon:
    """ index arithmetic for the stacked decision vector """
    N: int

    @property
    def n(self):
        return 6 * (self.N + 1) + 2 * self.N

    def state(self, i, j=0):
        return 6 * i + j

    def command(self, i, j=0):
        return 6 * (self.N + 1) + 2 * i + j

    def states(self, z):
        return np.asarray(z)[:6 * (self.N + 1)].reshape(self.N + 1, 6)

    def commands(self, z):
        return np.asarray(z)[6 * (self.N + 1):].reshape(self.N, 2)


@dataclass(frozen=True)
class Crossing:
    """ step k is pinned to the mirror line with zero speed """
    step: int
    line_point: np.ndarray
    line_normal: np.ndarray
    # real target position. set when the desired end is reflected through the crossing
    reflect_target: Optional[np.ndarray] = None


@dataclass
class PlanningProblem(MIQPProblem):
    horizon: Horizon = None
    desired: np.ndarray = None
    crossing: Crossing = None
    # cost constant dropped from the quadratic form
    constant: float = 0.0
    # orthonormal null space of base.A_eq and a point satisfying base equalities
    basis: np.ndarray = None
    origin: np.ndarray = None

    def cost(self, z):
        return self.base.objective(z) + self.constant


def desired_state(goal, heading):
    """ 6-vector at rest at goal with the goal heading unwrapped next to heading """
    xi = np.array(goal, dtype=float)
    xi[THETA] = heading + wrap_angle(xi[THETA] - heading)
    return xi


def _selector(horizon, i):
    E = np.zeros((6, horizon.n))
    E[:, horizon.state(i):horizon.state(i) + 6] = np.eye(6)
    return E


def assemble(scenario, xi0, goal, weights, models, crossing=None, config=None,
             direction=None, direction_from=1):
    """ return PlanningProblem with no collision groups

    goal: desired 6-vector (mirrored or real target)
    models: one LinearModel per step
    crossing: Crossing for mirror plans
    direction: +1 or -1 keeps the planned speed on that side of 0 from step direction_from
    """
    from mirrorpark.config import Config
    config = config or Config()
    vehicle = scenario.vehicle
    N = len(models)
    horizon = Horizon(N)
    n = horizon.n
    xi0 = np.asarray(xi0, dtype=float)
    if xi0.shape != (6,):
        raise ValueError(f"initial state must have 6 entries not {xi0.shape}")
    desired = desired_state(goal, xi0[THETA])

    # dynamics
    A_eq = np.zeros((6 * (N + 1), n))
    b_eq = np.zeros(6 * (N + 1))
    A_eq[:6, :6] = np.eye(6)
    b_eq[:6] = xi0
    for i, m in enumerate(models):
        r = 6 * (i + 1)
        A_eq[r:r + 6, horizon.state(i + 1):horizon.state(i + 1) + 6] = np.eye(6)
        A_eq[r:r + 6, horizon.state(i):horizon.state(i) + 6] = -m.A
        A_eq[r:r + 6, horizon.command(i):horizon.command(i) + 2] = -m.B
        b_eq[r:r + 6] = m.c

    # bounds. state 0 is fixed by the dynamics rows
    lb = np.full(n, -np.inf)
    ub = np.full(n, np.inf)
    for i in range(1, N + 1):
        for j in (V, A, DELTA):
            lb[horizon.state(i, j)] = vehicle.lower[j]
            ub[horizon.state(i, j)] = vehicle.upper[j]
    for i in range(N):
        lb[horizon.command(i):horizon.command(i) + 2] = vehicle.command_lower
        ub[horizon.command(i):horizon.command(i) + 2] = vehicle.command_upper
    if direction is not None:
        for i in range(max(direction_from, 1), N + 1):
            if direction > 0:
                lb[horizon.state(i, V)] = 0.0
            else:
                ub[horizon.state(i, V)] = 0.0

    pins, pinned = np.zeros((0, n)), np.zeros(0)
    if crossing is not None:
        k = crossing.step
        if not 3 <= k <= N - 1:
            raise ValueError(f"crossing step {k} outside [3, {N - 1}]")
        rows = []
        pin = np.zeros(n)
        pin[horizon.state(k, V)] = 1.0
        rows.append((pin, 0.0))
        if config.PIN_ACCEL_AT_CROSSING:
            pin = np.zeros(n)
            pin[horizon.state(k, A)] = 1.0
            rows.append((pin, 0.0))
        on_line = np.zeros(n)
        on_line[horizon.state(k, X)] = crossing.line_normal[0]
        on_line[horizon.state(k, Y)] = crossing.line_normal[1]
        rows.append((on_line, float(crossing.line_normal @ crossing.line_point)))
        pins = np.array([r for r, _ in rows])
        pinned = np.array([b for _, b in rows])
        A_eq = np.vstack([A_eq, pins])
        b_eq = np.concatenate([b_eq, pinned])

        # negated commands after the switch must stay inside the same limits
        a_low = max(vehicle.a_min, -vehicle.a_max)
        a_high = min(vehicle.a_max, -vehicle.a_min)
        for i in range(k + 1, N + 1):
            lb[horizon.state(i, A)] = a_low
            ub[horizon.state(i, A)] = a_high
        for i in range(k, N):
            lb[horizon.command(i, 0)] = a_low
            ub[horizon.command(i, 0)] = a_high

    # cost: sum (E z - f)' W (E z - f)
    H = np.zeros((n, n))
    g = np.zeros(n)
    constant = 0.0
    terms = [(_selector(horizon, i), desired, weights.Q) for i in range(1, N)]
    E_end, f_end = _selector(horizon, N), desired.copy()
    if crossing is not None and crossing.reflect_target is not None:
        # end reflected through the crossing lands on the real target
        for j, target in zip((X, Y), crossing.reflect_target):
            E_end[j, horizon.state(crossing.step, j)] = -2.0
            f_end[j] = -target
    terms.append((E_end, f_end, weights.Q_terminal))
    for E, f, W in terms:
        EW = E.T @ W
        H += 2 * EW @ E
        g -= 2 * EW @ f
        constant += float(f @ W @ f)
    for i in range(N):
        s = slice(horizon.command(i), horizon.command(i) + 2)
        H[s, s] += 2 * weights.R

    base = QPProblem(H=H, g=g, A_eq=A_eq, b_eq=b_eq, lb=lb, ub=ub)
    basis, origin = dynamics_basis(horizon, xi0, models, pins, pinned)
    return PlanningProblem(base=base, groups=[], big_m=config.BIG_M, horizon=horizon,
                           desired=desired, crossing=crossing, constant=constant,
                           basis=basis, origin=origin)


def dynamics_basis(horizon, xi0, models, pins=None, pinned=None):
    """ return (orthonormal null space, particular solution) of the dynamics and pin rows

    States are affine in the commands, so the null space of the dynamics rows is
    spanned by the command directions with their state responses.
    """
    N, n = horizon.N, horizon.n
    S = np.zeros((n, 2 * N))
    origin = np.zeros(n)
    origin[:6] = xi0
    response = np.zeros((6, 2 * N))
    for i, m in enumerate(models):
        response = m.A @ response
        response[:, 2 * i:2 * i + 2] += m.B
        S[horizon.state(i + 1):horizon.state(i + 1) + 6] = response
        origin[horizon.state(i + 1):horizon.state(i + 1) + 6] = m.step(
            origin[horizon.state(i):horizon.state(i) + 6], np.zeros(2))
    S[horizon.command(0):] = np.eye(2 * N)
    if pins is not None and len(pins):
        PS = pins @ S
        shift = np.linalg.lstsq(PS, pinned - pins @ origin, rcond=None)[0]
        origin = origin + S @ shift
        S = S @ null_space(PS)
    return qr(S, mode="economic")[0], origin


##### collision rows ###########################################################

class FeaturePointRows:
    """ affine maps from the decision vector to the 6 feature points of each step

    headings are expanded to first order about angles[i]. after a crossing step k
    the points are those of the executed path, the planned path reflected through p_k
    """

    def __init__(self, horizon, vehicle, angles, crossing_step=None, margin=0.0):
        self.horizon = horizon
        self.margin = margin
        self.crossing_step = crossing_step
        offsets = body_offsets(vehicle)
        angles = np.broadcast_to(np.asarray(angles, dtype=float), (horizon.N + 1,))
        n = horizon.n
        self.maps = np.zeros((horizon.N + 1, len(offsets), 2, n))
        self.consts = np.zeros((horizon.N + 1, len(offsets), 2))
        for i in range(1, horizon.N + 1):
            a = angles[i]
            s, c = np.sin(a), np.cos(a)
            dx, dy = offsets[:, 0], offsets[:, 1]
            executed = crossing_step is not None and i > crossing_step
            for j, axis in ((X, 0), (Y, 1)):
                if executed:
                    self.maps[i, :, axis, horizon.state(crossing_step, j)] = 2.0
                    self.maps[i, :, axis, horizon.state(i, j)] = -1.0
                else:
                    self.maps[i, :, axis, horizon.state(i, j)] = 1.0
            theta = horizon.state(i, THETA)
            self.maps[i, :, 0, theta] = -dx * s - dy * c
            self.maps[i, :, 1, theta] = dx * c - dy * s
            self.consts[i, :, 0] = dx * c - dy * s + a * (dx * s + dy * c)
            self.consts[i, :, 1] = dx * s + dy * c - a * (dx * c - dy * s)

    def points(self, z):
        """ [N+1, 6, 2] feature points. row 0 is unused """
        return self.maps @ z + self.consts

    def collisions(self, z, regions):
        """ sorted (step, region index) pairs where the grown region meets the outline

        a step hits when a feature point is inside the region, or when the corner
        polygon overlaps it although every feature point is outside
        """
        pts = self.points(z)[1:]
        gap = max(self.margin - INSIDE_TOL, 0.0)
        hits = []
        for k, region in enumerate(regions):
            e = region.array
            values = pts @ e[:, :2].T + e[:, 2] - self.margin
            inside = (values.max(axis=2) < -INSIDE_TOL).any(axis=1)
            for i in range(len(pts)):
                if inside[i] or polygons_overlap(pts[i, :4], region.polygon, gap):
                    hits.append((i + 1, k))
        return sorted(hits)

    def group(self, step, region_index, region):
        """ one binary per region edge. all points of the step clear the same edge """
        e = region.array
        rows = np.einsum("l,pn->lpn", e[:, 0], self.maps[step, :, 0]) + \
            np.einsum("l,pn->lpn", e[:, 1], self.maps[step, :, 1])
        offsets = (self.consts[step] @ e[:, :2].T).T + e[:, 2:3] - self.margin
        return DisjunctionGroup(step=step, region=region_index, rows=rows, offsets=offsets)
