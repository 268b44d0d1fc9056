""" planner, solver, evaluation and run settings for mirrorpark

Defaults are the evaluation vehicle and the nominal case factors. A run changes
them from a YAML file or command line flags.
"""

import os
import numpy as np
import yaml
import logging
log = logging.getLogger()


class ConfigError(ValueError):
    """ unknown key or invalid value in a run configuration """


# one flat namespace. upper case names are settings, lower case names are helpers

class Config(object):
    """ settings as upper case class attributes

    Instances are independent so a run may update its own copy. update() and load()
    reject names that are not settings. R_MIN is derived from L and DELTA_MAX.
    """

##### vehicle ##################################################################

    # wheelbase (m)
    L = 2.5
    # rear axle to rear end, rear axle to front end, width (m)
    L1 = 0.71
    L2 = 3.11
    L3 = 1.67

    # speed (m/s), acceleration (m/s2) and front wheel angle (rad) limits
    V_MIN = -3.0
    V_MAX = 3.0
    A_MIN = -5.0
    A_MAX = 3.0
    DELTA_MAX = 0.6

    # first order actuator lags (s)
    TAU_A = 0.3
    TAU_DELTA = 0.1

    # step size (s) and steps per planning horizon
    DT = 0.1
    N = 60

##### weights ##################################################################

    # stage error weights over (x, v, a, y, theta, delta_f)
    Q_DIAG = [1.0, 0.1, 0.01, 1.0, 2.0, 0.01]
    # control effort weights over (a_com, delta_com)
    R_DIAG = [0.1, 0.5]
    # terminal weight is TERMINAL_SCALE * Q
    TERMINAL_SCALE = 50.0
    # terminal y weight before scaling. None means same as the x weight
    TERMINAL_Y_WEIGHT = None

##### mirror ###################################################################

    # reverse/angle distance added to the lower band
    MIRROR_MARGIN = 0.3
    # heading at the mirror line used to evaluate bands (rad)
    MIRROR_NOMINAL_HEADING = 0.0
    # vehicle must be at least this far on the target side of the line (m)
    MIRROR_APPROACH_CLEARANCE = 1.0
    # mirror line must stay this far inside the far road edge (m)
    MIRROR_ROAD_CLEARANCE = 1.0
    # plan straight to the target when no mirror line can be placed
    MIRROR_FALLBACK = True
    # desired position is the target reflected through the crossing point
    REFLECT_ABOUT_CROSSING = True

##### planner ##################################################################

    # successive linearization passes per segment
    LINEARIZE_ITERATIONS = 3
    # per kind linearizing angle (rad). None uses half the heading change
    LINEARIZING_ANGLE = dict(parallel=0.0, reverse=None, angle=None)
    # after the first pass linearize about the previous headings
    RELINEARIZE_HEADING = True
    # re-solve when the crossing step moves by more than this
    CROSSING_SHIFT = 2
    # stop the passes once states move less than this (m, rad) with the same active edges
    LINEARIZE_TOL = 0.02
    # zero acceleration at the switch so negated actuator states match
    PIN_ACCEL_AT_CROSSING = True
    # clearance kept from infeasible regions inside the optimizer (m)
    SAFETY_MARGIN = 0.05
    # peak of the first trapezoidal speed profile. None is half the speed limit
    NOMINAL_SPEED = None

##### solver ###################################################################

    QP_TOL = 1e-6
    QP_MAX_ITER = 200
    # added to the hessian diagonal
    QP_REGULARIZATION = 1e-9
    # relative optimality gap for branch and bound
    MIQP_GAP = 1e-4
    MIQP_NODE_LIMIT = 200
    # node budget per MIQP inside a planning pass. the best incumbent is used at the limit
    PLAN_NODE_LIMIT = 12
    BIG_M = 1e3
    # lazy collision activation passes
    LAZY_MAX_ITER = 10

##### decision loop ############################################################

    MAX_REPLANS = 12
    # simulated seconds before giving up
    TIME_LIMIT = 180.0

##### criteria #################################################################

    HEADING_TOL_DEG = 3.0
    # clearance margins must exceed these (m)
    PARALLEL_MARGIN = 0.0
    BAY_MARGIN = 0.1

##### scenario #################################################################

    # infeasible regions reach this far beyond the slot along the road (m)
    REGION_EXTENT = 12.0
    # depth of the slot back block and far road strip (m)
    REGION_DEPTH = 2.0
    # start x relative to the target rear axle (m)
    INITIAL_X_OFFSET = dict(parallel=6.0, reverse=-4.0, angle=-3.0)

##### grid #####################################################################

    # scalar or list of levels, or [low, high, step] ranges. THETA0 in degrees.
    # Y0 runs from 0 to RW in Y0_STEP
    GRID = dict(
        parallel=dict(RW=[4.5, 4.0, 3.5], SL=dict(low=3.82, high=7.35, step=0.1),
                      SW=[2.5], THETA0=dict(low=-90, high=90, step=10), Y0_STEP=0.1),
        reverse=dict(RW=[7.0, 6.0, 5.0], SL=[4.82],
                     SW=dict(low=1.67, high=3.27, step=0.05),
                     THETA0=dict(low=-90, high=90, step=10), Y0_STEP=0.1),
        angle=dict(RW=[4.5, 4.0, 3.5], SL=[4.82],
                   SW=dict(low=1.67, high=3.27, step=0.05),
                   THETA0=dict(low=-90, high=90, step=10), Y0_STEP=0.1))

##### run ######################################################################

    # single scenario for plan. For sweep a value pins that factor of the grid
    # and KIND may be "all". THETA0 in degrees
    KIND = "reverse"
    RW = None
    SL = None
    SW = None
    THETA0 = None
    Y0 = None
    # plan values for factors left at None
    NOMINAL = dict(parallel=dict(RW=4.5, SL=6.5, SW=2.5, THETA0=0.0, Y0=1.6),
                   reverse=dict(RW=6.0, SL=4.82, SW=2.9, THETA0=0.0, Y0=2.0),
                   angle=dict(RW=4.5, SL=4.82, SW=2.9, THETA0=0.0, Y0=1.8))

    OUT = "out"
    # full, stratified or list
    SAMPLER = "full"
    SAMPLE = None
    SEED = 0
    JOBS = os.cpu_count()
    # line-delimited case file for the list sampler
    CASES_FILE = None
    # write measured wall times. False makes reruns byte identical
    RECORD_TIMING = True
    # failed cases that get a trajectory plot
    FLAG_LIMIT = 20
    LITERAL_PAPER = False

#### calculated

    R_MIN = None

############################################################################################

    def __init__(self):
        """ derive R_MIN """
        self.R_MIN = self.L / np.tan(self.DELTA_MAX)

    @classmethod
    def keys(cls):
        """ configurable attribute names """
        return [k for k in dir(cls) if k.isupper() and not k.startswith("_")
                and k not in ("R_MIN", "OVERRIDES")]

    @classmethod
    def load(cls, path):
        """ return config with values from a yaml file """
        try:
            with open(path) as f:
                values = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"cannot read config {path}: {e}")
        if not isinstance(values, dict):
            raise ConfigError(f"config {path} is not a mapping")
        config = cls()
        config.update(**values)
        return config

    def update(self, **values):
        """ set attributes. unknown keys are rejected """
        keys = self.keys()
        unknown = sorted(set(values) - set(keys))
        if unknown:
            raise ConfigError(f"unknown config key {unknown[0]}")
        if values.get("LITERAL_PAPER"):
            self.literal()
        for k, v in values.items():
            setattr(self, k, v)
        self.__init__()
        self.check()
        return self

    def literal(self):
        """ switch to literal mode with the y entry of the desired state left free """
        for k in LiteralPaperConfig.OVERRIDES:
            setattr(self, k, getattr(LiteralPaperConfig, k))
        self.LITERAL_PAPER = True

    def check(self):
        """ raise ConfigError on values no run can use """
        if self.KIND not in ("parallel", "reverse", "angle", "all"):
            raise ConfigError(f"KIND must be parallel, reverse, angle or all not {self.KIND}")
        if self.SAMPLER not in ("full", "stratified", "list"):
            raise ConfigError(f"unknown SAMPLER {self.SAMPLER}")
        if len(self.Q_DIAG) != 6 or len(self.R_DIAG) != 2:
            raise ConfigError("Q_DIAG needs 6 and R_DIAG 2 entries")
        if int(self.N) < 1 or float(self.DT) <= 0:
            raise ConfigError("N must be >= 1 and DT > 0")
        if int(self.LINEARIZE_ITERATIONS) < 1:
            raise ConfigError("LINEARIZE_ITERATIONS must be >= 1")
        if int(self.PLAN_NODE_LIMIT) < 2 or int(self.MIQP_NODE_LIMIT) < 2:
            raise ConfigError("node limits must be >= 2 to reach a leaf")
        if self.JOBS is not None and int(self.JOBS) < 1:
            raise ConfigError("JOBS must be >= 1")

    def vehicle(self):
        """ return VehicleParams for these values """
        from mirrorpark.scenario.vehicle import VehicleParams
        return VehicleParams(l=self.L, l1=self.L1, l2=self.L2, l3=self.L3,
                             v_min=self.V_MIN, v_max=self.V_MAX,
                             a_min=self.A_MIN, a_max=self.A_MAX,
                             delta_min=-self.DELTA_MAX, delta_max=self.DELTA_MAX,
                             tau_a=self.TAU_A, tau_delta=self.TAU_DELTA,
                             dt=self.DT, N=int(self.N))

    def weights(self):
        """ return planner Weights for these values """
        from mirrorpark.planner.problem import Weights
        Q = np.diag(np.asarray(self.Q_DIAG, dtype=float))
        Q_terminal = self.TERMINAL_SCALE * Q
        y_weight = Q[0, 0] if self.TERMINAL_Y_WEIGHT is None else self.TERMINAL_Y_WEIGHT
        Q_terminal[3, 3] = self.TERMINAL_SCALE * y_weight
        return Weights(Q=Q, R=np.diag(np.asarray(self.R_DIAG, dtype=float)),
                       Q_terminal=Q_terminal)

    def as_dict(self):
        return {k: getattr(self, k) for k in self.keys()}

    def display(self):
        """ print every setting, one per row """
        print("\nmirrorpark settings:")
        for a in self.keys():
            print("{:30} {}".format(a, getattr(self, a)))
        print()


class LiteralPaperConfig(Config):
    """ desired y left free, fixed linearizing angle, fixed mirrored target """
    OVERRIDES = ["Q_DIAG", "TERMINAL_Y_WEIGHT", "RELINEARIZE_HEADING",
                 "REFLECT_ABOUT_CROSSING"]

    Q_DIAG = [1.0, 0.1, 0.01, 0.0, 2.0, 0.01]
    TERMINAL_Y_WEIGHT = 0.0
    RELINEARIZE_HEADING = False
    REFLECT_ABOUT_CROSSING = False
    LITERAL_PAPER = True
