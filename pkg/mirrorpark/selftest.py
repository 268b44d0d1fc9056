"""
In-process checks behind the selftest command.

Each suite returns (passed, worst deviation). Seeds are fixed so repeated runs
give the same numbers.
"""
import numpy as np
from mirrorpark.config import Config
from mirrorpark.dynamics.bicycle import simulate, negate_commands
from mirrorpark.mirror import parallel_band
from mirrorpark.solvers.qp import solve_qp
from mirrorpark.solvers.miqp import solve_miqp
from mirrorpark.utils.oracles import (rngreset, random_qp, random_miqp, active_set_qp,
                                      exhaustive_miqp, kkt_residual)
import logging
log = logging.getLogger()

# default pass tolerance per suite
TOLERANCES = dict(reflection=1e-9, bands=1e-4, qp=1e-6, miqp=1e-6)


def reflection_suite(tol, cases=1000, N=60, seed=0, vehicle=None):
    """ negated commands from the negated state trace the point reflection of the path """
    vehicle = vehicle or Config().vehicle()
    rng = rngreset(seed)
    a_lim = min(vehicle.a_max, -vehicle.a_min)
    worst = 0.0
    for _ in range(cases):
        theta0 = rng.uniform(-np.pi, np.pi)
        v0 = rng.uniform(vehicle.v_min, vehicle.v_max)
        a0 = rng.uniform(-a_lim, a_lim)
        d0 = rng.uniform(vehicle.delta_min, vehicle.delta_max)
        u = np.column_stack([rng.uniform(-a_lim, a_lim, N),
                             rng.uniform(vehicle.delta_min, vehicle.delta_max, N)])
        forth = simulate(np.array([0, v0, a0, 0, theta0, d0]), u, vehicle)
        back = simulate(np.array([0, -v0, -a0, 0, theta0, -d0]), negate_commands(u), vehicle)
        # heading is the only channel that keeps its sign
        sign = np.array([1, 1, 1, 1, -1, 1])
        worst = max(worst, float(np.abs(back + sign * forth).max()))
    return worst < tol, worst


def band_suite(tol, vehicle=None, SW=2.5):
    """ parallel band at 0 and 10 degrees and its shape up to 30 degrees """
    vehicle = vehicle or Config().vehicle()
    expected = {0.0: (0.0, 0.415), 10.0: (0.0555, 0.3044)}
    worst = 0.0
    for deg, band in expected.items():
        got = parallel_band(np.radians(deg), vehicle, SW)
        worst = max(worst, float(np.abs(np.subtract(got, band)).max()))
    bands = np.array([parallel_band(np.radians(d), vehicle, SW) for d in range(31)])
    monotone = np.all(np.diff(bands[:, 0]) >= 0) and np.all(np.diff(bands[:, 1]) <= 0)
    return bool(worst < tol and monotone), worst


def qp_suite(tol, cases=500, seed=0):
    """ active set enumeration on tiny problems and KKT residuals on larger ones """
    rng = rngreset(seed)
    worst = 0.0
    passed = True
    for i in range(cases):
        if i % 10 == 9:
            n = int(rng.integers(10, 41))
            problem = random_qp(rng, n, m_eq=int(rng.integers(0, n // 4)),
                                m_in=int(rng.integers(0, n)), bounds=bool(rng.integers(2)))
            sol = solve_qp(problem, tol=1e-8)
            if not sol.optimal:
                log.warning(f"qp case {i} n={n}: {sol.status}")
                passed = False
                continue
            worst = max(worst, kkt_residual(problem, sol.z))
            continue
        n = int(rng.integers(1, 5))
        problem = random_qp(rng, n, m_eq=int(rng.integers(0, n)),
                            m_in=int(rng.integers(0, 4)), bounds=bool(rng.integers(2)))
        expected, _ = active_set_qp(problem)
        sol = solve_qp(problem, tol=1e-8)
        if expected is None or not sol.optimal:
            log.warning(f"qp case {i} n={n}: {sol.status} oracle found {expected is not None}")
            passed = False
            continue
        worst = max(worst, float(np.abs(sol.z - expected).max()))
    return passed and worst < tol, worst


def miqp_suite(tol, cases=200, seed=0):
    """ branch and bound against enumeration of every binary choice """
    rng = rngreset(seed)
    shapes = [(2, 3), (3, 2), (1, 4), (2, 2), (1, 6)]
    worst = 0.0
    passed = True
    for i in range(cases):
        groups, edges = shapes[i % len(shapes)]
        problem = random_miqp(rng, n=int(rng.integers(2, 4)), groups=groups, edges=edges)
        _, expected = exhaustive_miqp(problem)
        sol = solve_miqp(problem, tol=1e-8, gap=0.0, node_limit=Config.MIQP_NODE_LIMIT)
        if np.isinf(expected) or sol.status != "optimal":
            if not (np.isinf(expected) and sol.status == "infeasible"):
                log.warning(f"miqp case {i}: {sol.status} oracle {expected}")
                passed = False
            continue
        worst = max(worst, abs(sol.objective - expected) / (1 + abs(expected)))
    return passed and worst < tol, worst


SUITES = dict(reflection=reflection_suite, bands=band_suite, qp=qp_suite, miqp=miqp_suite)


def run_selftest(tol=None):
    """ run every suite. return True if all pass

    tol: replaces every suite's tolerance
    """
    ok = True
    for name, suite in SUITES.items():
        limit = TOLERANCES[name] if tol is None else tol
        try:
            passed, worst = suite(limit)
        except ValueError as e:
            log.error(f"{name}: {e}")
            passed, worst = False, np.nan
        log.info(f"{name:12} {'pass' if passed else 'FAIL'} worst={worst:.3e} tol={limit:.0e}")
        ok = ok and passed
    return ok
