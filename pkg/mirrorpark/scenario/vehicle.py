from dataclasses import dataclass
import numpy as np
import logging
log = logging.getLogger()


@dataclass(frozen=True)
class VehicleParams:
    """ geometry and actuation limits. defaults are the evaluation vehicle

    l: wheelbase
    l1, l2: rear axle to rear end and to front end
    l3: width
    """
    l: float = 2.5
    l1: float = 0.71
    l2: float = 3.11
    l3: float = 1.67
    v_min: float = -3.0
    v_max: float = 3.0
    a_min: float = -5.0
    a_max: float = 3.0
    delta_min: float = -0.6
    delta_max: float = 0.6
    tau_a: float = 0.3
    tau_delta: float = 0.1
    dt: float = 0.1
    N: int = 60

    def __post_init__(self):
        if self.l <= 0 or min(self.l1, self.l2, self.l3) <= 0:
            raise ValueError("vehicle lengths must be positive")
        if not self.v_min < 0 < self.v_max:
            raise ValueError(f"speed bounds must straddle 0: {self.v_min}, {self.v_max}")
        if not self.a_min < 0 < self.a_max:
            raise ValueError(f"acceleration bounds must straddle 0: {self.a_min}, {self.a_max}")
        if not (self.delta_max > 0 and np.isclose(self.delta_min, -self.delta_max)):
            raise ValueError("steering bounds must be symmetric about 0")
        if self.tau_a <= 0 or self.tau_delta <= 0:
            raise ValueError("actuator lags must be positive")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive not {self.dt}")
        if int(self.N) < 1:
            raise ValueError(f"N must be at least 1 not {self.N}")

    @property
    def length(self):
        return self.l1 + self.l2

    @property
    def lower(self):
        """ lower bounds over the state order (x, v, a, y, theta, delta_f) """
        return np.array([-np.inf, self.v_min, self.a_min, -np.inf, -np.inf, self.delta_min])

    @property
    def upper(self):
        return np.array([np.inf, self.v_max, self.a_max, np.inf, np.inf, self.delta_max])

    @property
    def command_lower(self):
        return np.array([self.a_min, self.delta_min])

    @property
    def command_upper(self):
        return np.array([self.a_max, self.delta_max])
