"""
Kinematic bicycle model with first order lag on acceleration and steering.

State order is (x, v, a, y, theta, delta_f) everywhere; commands are (a_com, delta_com).
Updates are explicit Euler so driving the negated commands from the negated
state traces the point reflection of the original path.
"""
from dataclasses import dataclass, astuple
import numpy as np
import pandas as pd
import logging
log = logging.getLogger()

X, V, A, Y, THETA, DELTA = range(6)
STATE_FIELDS = ["x", "v", "a", "y", "theta", "delta_f"]
COMMAND_FIELDS = ["a_com", "delta_com"]
TRACE_COLUMNS = ["t", "x", "y", "theta", "v", "a", "delta_f", "a_com", "delta_com"]


@dataclass(frozen=True)
class VehicleState:
    x: float = 0.0
    v: float = 0.0
    a: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    delta_f: float = 0.0

    @classmethod
    def from_array(cls, xi):
        return cls(*map(float, xi))

    @classmethod
    def from_pose(cls, pose, v=0.0):
        return cls(x=pose.x, v=v, y=pose.y, theta=pose.theta)

    def array(self):
        return np.array(astuple(self), dtype=float)


@dataclass(frozen=True)
class ControlInput:
    a_com: float = 0.0
    delta_com: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite([self.a_com, self.delta_com])):
            raise ValueError(f"command must be finite: {self}")

    def array(self):
        return np.array([self.a_com, self.delta_com], dtype=float)


def step_nonlinear(state, u, vehicle, dt=None):
    """ return the next state after holding command u for dt

    state: VehicleState or 6-vector. returned as the same type
    u: ControlInput or 2-vector
    """
    dt = vehicle.dt if dt is None else dt
    if dt <= 0:
        raise ValueError(f"dt must be positive not {dt}")
    xi = state.array() if isinstance(state, VehicleState) else np.asarray(state, dtype=float)
    u = u.array() if isinstance(u, ControlInput) else np.asarray(u, dtype=float)

    x, v, a, y, theta, delta = xi
    out = np.empty(6)
    out[X] = x + v * np.cos(theta) * dt
    out[Y] = y + v * np.sin(theta) * dt
    out[THETA] = theta + v * np.tan(delta) / vehicle.l * dt
    out[V] = v + a * dt
    out[A] = np.clip(a + (u[0] - a) / vehicle.tau_a * dt, vehicle.a_min, vehicle.a_max)
    out[DELTA] = np.clip(delta + (u[1] - delta) / vehicle.tau_delta * dt,
                         vehicle.delta_min, vehicle.delta_max)

    if isinstance(state, VehicleState):
        return VehicleState.from_array(out)
    return out


def simulate(state0, commands, vehicle, dt=None):
    """ return states [len(commands) + 1, 6] from repeated Euler steps """
    xi = state0.array() if isinstance(state0, VehicleState) else np.asarray(state0, dtype=float)
    commands = np.asarray(commands, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(commands)):
        raise ValueError("commands must be finite")
    states = np.empty((len(commands) + 1, 6))
    states[0] = xi
    for i, u in enumerate(commands):
        states[i + 1] = step_nonlinear(states[i], u, vehicle, dt)
    return states


def negate_commands(commands):
    """ reverse both channels of every command """
    return -np.asarray(commands, dtype=float)


##### export ###################################################################

def trace_frame(states, commands, dt):
    """ return trace DataFrame with one row per state

    commands hold for the step that starts at each row. the final row has zero commands
    """
    states = np.asarray(states, dtype=float)
    commands = np.asarray(commands, dtype=float).reshape(-1, 2)
    padded = np.zeros((len(states), 2))
    padded[:len(commands)] = commands[:len(states)]
    df = pd.DataFrame(states, columns=STATE_FIELDS)
    df["t"] = np.arange(len(states)) * dt
    df["a_com"] = padded[:, 0]
    df["delta_com"] = padded[:, 1]
    return df[TRACE_COLUMNS]


def write_trace(path, states, commands, dt):
    trace_frame(states, commands, dt).to_csv(path, index=False, float_format="%.9g")
