""" reference oracles and comparison helpers used by the selftest command and the tests

The oracles enumerate every case so they only suit tiny problems.
"""
from itertools import combinations, product
import random
import numpy as np
from mirrorpark.solvers.qp import QPProblem
from mirrorpark.solvers.miqp import DisjunctionGroup, MIQPProblem
import logging
log = logging.getLogger()


def rngreset(seed=0):
    """ reset all random number generators and return a fresh numpy generator """
    random.seed(seed)
    np.random.seed(seed)
    return np.random.default_rng(seed)


def mse(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shapes differ {a.shape} {b.shape}")
    return float(np.mean((a - b) ** 2)) if a.size else 0.0


def match(a, b, tol=1e-6):
    """ return True if a and b agree within tol. log the worst difference

    a, b: arrays, lists or scalars. a tuple compares item by item
    """
    if isinstance(a, tuple) and isinstance(b, tuple):
        return len(a) == len(b) and all(match(x, y, tol) for x, y in zip(a, b))
    x, y = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if x.shape != y.shape:
        log.warning(f"shape mismatch {x.shape} {y.shape}")
        return False
    diff = float(np.max(np.abs(x - y), initial=0))
    if not diff <= tol:
        log.warning(f"max difference {diff:.3e} above {tol:.0e}. mse {mse(x, y):.3e}")
        return False
    return True


##### random problems ##########################################################

def random_qp(rng, n, m_eq=0, m_in=0, bounds=False):
    """ strictly convex QP that is feasible at a random interior point """
    M = rng.standard_normal((n, n))
    H = M @ M.T + 0.5 * np.eye(n)
    g = rng.standard_normal(n)
    z_feas = rng.standard_normal(n)
    A_eq = rng.standard_normal((m_eq, n))
    A_in = rng.standard_normal((m_in, n))
    b_in = A_in @ z_feas + rng.uniform(0.1, 1.0, m_in)
    lb = ub = None
    if bounds:
        lb = z_feas - rng.uniform(0.2, 1.5, n)
        ub = z_feas + rng.uniform(0.2, 1.5, n)
    return QPProblem(H=H, g=g, A_eq=A_eq, b_eq=A_eq @ z_feas, A_in=A_in, b_in=b_in,
                     lb=lb, ub=ub)


def random_miqp(rng, n=3, groups=2, edges=3, m_in=1):
    """ MIQP whose disjunctions keep z out of random polytopes around the bound box centre

    every group has one point so each edge is a single row
    """
    base = random_qp(rng, n, m_in=m_in, bounds=True)
    centre = 0.5 * (base.lb + base.ub)
    out = []
    for i in range(groups):
        rows = rng.standard_normal((edges, n))
        rows /= np.linalg.norm(rows, axis=1, keepdims=True)
        offsets = -(rows @ centre) - rng.uniform(0.05, 0.15, edges)
        out.append(DisjunctionGroup(step=i, region=0, rows=rows, offsets=offsets))
    return MIQPProblem(base=base, groups=out, big_m=1e3)


##### oracles ##################################################################

def _kkt(H, g, A, b):
    """ solve the equality constrained QP. return (z, multipliers) or None if singular """
    n, m = len(g), len(b)
    K = np.block([[H, A.T], [A, np.zeros((m, m))]])
    rhs = np.concatenate([-g, b])
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.allclose(K @ sol, rhs, atol=1e-9):
        return None
    return sol[:n], sol[n:]


def active_set_qp(problem, tol=1e-9):
    """ return (z, objective) by trying every active set. (None, inf) if infeasible """
    G, h = problem.inequalities()
    m_eq = len(problem.b_eq)
    best, best_obj = None, np.inf
    for size in range(min(len(h), problem.n - m_eq) + 1):
        for active in combinations(range(len(h)), size):
            active = list(active)
            A = np.vstack([problem.A_eq, G[active]])
            b = np.concatenate([problem.b_eq, h[active]])
            res = _kkt(problem.H, problem.g, A, b)
            if res is None:
                continue
            z, lam = res
            if np.any(G @ z > h + tol * (1 + np.abs(h))):
                continue
            if np.any(lam[m_eq:] < -tol):
                continue
            obj = problem.objective(z)
            if obj < best_obj:
                best, best_obj = z, obj
    return best, best_obj


def exhaustive_miqp(problem, tol=1e-9):
    """ return (z, objective) minimizing over one active edge per group """
    base = problem.base
    best, best_obj = None, np.inf
    for choice in product(*[range(g.size) for g in problem.groups]):
        rows = [-g.rows[l].reshape(-1, base.n) for g, l in zip(problem.groups, choice)]
        offsets = [g.offsets[l].ravel() for g, l in zip(problem.groups, choice)]
        qp = QPProblem(H=base.H, g=base.g, A_eq=base.A_eq, b_eq=base.b_eq,
                       A_in=np.vstack([base.A_in] + rows),
                       b_in=np.concatenate([base.b_in] + offsets), lb=base.lb, ub=base.ub)
        z, obj = active_set_qp(qp, tol)
        if z is not None and obj < best_obj:
            best, best_obj = z, obj
    return best, best_obj


def kkt_residual(problem, z, tol=1e-6):
    """ stationarity residual of z with multipliers fitted on the active constraints """
    G, h = problem.inequalities()
    active = G @ z >= h - tol * (1 + np.abs(h))
    A = np.vstack([problem.A_eq, G[active]])
    grad = problem.H @ z + problem.g
    if len(A) == 0:
        return float(np.max(np.abs(grad), initial=0))
    lam = np.linalg.lstsq(A.T, -grad, rcond=None)[0]
    return float(np.max(np.abs(grad + A.T @ lam), initial=0))


##### geometry #################################################################

def boundary_points(vertices, per_edge=50):
    """ points spaced along every edge of a closed polygon """
    v = np.asarray(vertices, dtype=float)
    t = np.linspace(0, 1, per_edge, endpoint=False)[:, None]
    return np.vstack([p + t * (q - p) for p, q in zip(v, np.roll(v, -1, axis=0))])


def inside(vertices, points, tol=1e-9):
    """ strictly inside a convex polygon of either orientation """
    v = np.asarray(vertices, dtype=float)
    points = np.atleast_2d(points)
    cross = []
    for p, q in zip(v, np.roll(v, -1, axis=0)):
        d = q - p
        cross.append(d[0] * (points[:, 1] - p[1]) - d[1] * (points[:, 0] - p[0]))
    cross = np.array(cross)
    return np.all(cross > tol, axis=0) | np.all(cross < -tol, axis=0)


def sampled_overlap(a, b, per_edge=50):
    """ sampled interior overlap of two convex polygons """
    return bool(inside(b, boundary_points(a, per_edge)).any()
                or inside(a, boundary_points(b, per_edge)).any())
