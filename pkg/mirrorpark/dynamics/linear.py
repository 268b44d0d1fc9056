"""
Local linearization of the bicycle model.

cos and sin of the heading are expanded to first order about a linearizing
angle and the speed is frozen at a reference value, so one step becomes
xi[i+1] = A xi[i] + B u[i] + c.
"""
from dataclasses import dataclass
from typing import Tuple
import numpy as np
from mirrorpark.dynamics.bicycle import X, V, A as ACC, Y, THETA, DELTA
import logging
log = logging.getLogger()


def gamma_coeffs(theta, angle):
    """ first order cos(theta), sin(theta) about angle """
    theta = np.asarray(theta, dtype=float)
    s, c = np.sin(angle), np.cos(angle)
    gamma1 = -theta * s + c + angle * s
    gamma2 = theta * c + s - angle * c
    if gamma1.ndim == 0:
        return float(gamma1), float(gamma2)
    return gamma1, gamma2


@dataclass(frozen=True)
class LinearModel:
    A: np.ndarray
    B: np.ndarray
    c: np.ndarray
    # (v_ref, theta_ref, angle)
    valid_around: Tuple[float, float, float]

    def step(self, xi, u):
        return self.A @ xi + self.B @ u + self.c


def _model(v_ref, theta_ref, angle, vehicle, dt):
    s, c = np.sin(angle), np.cos(angle)
    gamma1, gamma2 = gamma_coeffs(theta_ref, angle)

    A = np.eye(6)
    B = np.zeros((6, 2))
    offset = np.zeros(6)

    A[X, V] = gamma1 * dt
    A[X, THETA] = -v_ref * s * dt
    offset[X] = v_ref * s * theta_ref * dt

    A[Y, V] = gamma2 * dt
    A[Y, THETA] = v_ref * c * dt
    offset[Y] = -v_ref * c * theta_ref * dt

    A[THETA, DELTA] = v_ref / vehicle.l * dt
    A[V, ACC] = dt

    A[ACC, ACC] = 1 - dt / vehicle.tau_a
    B[ACC, 0] = dt / vehicle.tau_a
    A[DELTA, DELTA] = 1 - dt / vehicle.tau_delta
    B[DELTA, 1] = dt / vehicle.tau_delta

    return LinearModel(A=A, B=B, c=offset,
                       valid_around=(float(v_ref), float(theta_ref), float(angle)))


def linearize(reference, angle, vehicle, dt=None):
    """ return one LinearModel per step of the reference

    reference: states [N+1, 6] or [N, 6]. speed and heading of row i freeze step i
    angle: scalar linearizing angle or one per step
    """
    dt = vehicle.dt if dt is None else dt
    reference = np.atleast_2d(np.asarray(reference, dtype=float))
    steps = len(reference) - 1 if len(reference) > 1 else 1
    angles = np.broadcast_to(np.asarray(angle, dtype=float), (steps,))
    return [_model(reference[i, V], reference[i, THETA], angles[i], vehicle, dt)
            for i in range(steps)]
