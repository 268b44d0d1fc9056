"""
Dense convex QP solver

    minimize 0.5 z'Hz + g'z  s.t.  A_eq z = b_eq,  A_in z <= b_in,  lb <= z <= ub

Equalities are eliminated with a null space basis. The reduced problem is
solved by a Mehrotra predictor-corrector interior point method and the result
is polished on the strongly active set. Infeasibility is certified by a phase-1 LP.
"""
from dataclasses import dataclass, field
import numpy as np
from scipy.linalg import cho_factor, cho_solve, null_space, LinAlgError
from scipy.optimize import linprog
import logging
log = logging.getLogger()

# iteration at which an unconverged solve is checked for feasibility
PHASE1_CHECK = 25
STEP_TO_BOUNDARY = 0.99
POLISH_TOL = 1e-9


@dataclass
class QPProblem:
    H: np.ndarray
    g: np.ndarray
    A_eq: np.ndarray = None
    b_eq: np.ndarray = None
    A_in: np.ndarray = None
    b_in: np.ndarray = None
    lb: np.ndarray = None
    ub: np.ndarray = None

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float).ravel()
        n = len(self.g)
        self.H = np.asarray(self.H, dtype=float).reshape(n, n) if n else np.zeros((0, 0))
        self.A_eq = _rows(self.A_eq, n)
        self.b_eq = _vector(self.b_eq, len(self.A_eq))
        self.A_in = _rows(self.A_in, n)
        self.b_in = _vector(self.b_in, len(self.A_in))
        self.lb = (np.full(n, -np.inf) if self.lb is None
                   else np.asarray(self.lb, dtype=float).ravel())
        self.ub = (np.full(n, np.inf) if self.ub is None
                   else np.asarray(self.ub, dtype=float).ravel())

    @property
    def n(self):
        return len(self.g)

    def validate(self, psd=True):
        """ raise ValueError on inconsistent shapes or a non convex objective """
        n = self.n
        if self.H.shape != (n, n):
            raise ValueError(f"H shape {self.H.shape} does not match g length {n}")
        if len(self.b_eq) != len(self.A_eq) or len(self.b_in) != len(self.A_in):
            raise ValueError("constraint rows and right hand sides differ in length")
        if self.lb.shape != (n,) or self.ub.shape != (n,):
            raise ValueError("bounds must have one entry per variable")
        if np.any(self.lb > self.ub):
            raise ValueError("lower bound above upper bound")
        for name in ["H", "g", "A_eq", "b_eq", "A_in", "b_in"]:
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non finite entries")
        scale = 1 + np.abs(self.H).max(initial=0)
        if not np.allclose(self.H, self.H.T, atol=1e-9 * scale):
            raise ValueError("H is not symmetric")
        if psd and n and not _positive_definite(self.H + 1e-9 * np.eye(n)):
            raise ValueError("H is not positive semidefinite")

    def objective(self, z):
        return float(0.5 * z @ self.H @ z + self.g @ z)

    def inequalities(self):
        """ return G, h with all inequalities and finite bounds as G z <= h """
        eye = np.eye(self.n)
        upper = np.isfinite(self.ub)
        lower = np.isfinite(self.lb)
        G = np.vstack([self.A_in, eye[upper], -eye[lower]])
        h = np.concatenate([self.b_in, self.ub[upper], -self.lb[lower]])
        return G, h


@dataclass
class QPSolution:
    z: np.ndarray
    status: str
    kkt_residual: float
    iterations: int
    objective: float = np.nan
    polished: bool = False
    # diagonal shift added to the reduced hessian
    regularization: float = 0.0
    stats: dict = field(default_factory=dict)

    @property
    def optimal(self):
        return self.status == "optimal"


def _rows(A, n):
    return np.zeros((0, n)) if A is None else np.asarray(A, dtype=float).reshape(-1, n)


def _vector(b, m):
    return np.zeros(m) if b is None else np.asarray(b, dtype=float).ravel()


def _positive_definite(M):
    try:
        cho_factor(M)
        return True
    except LinAlgError:
        return False


def _inf(x):
    return float(np.abs(x).max(initial=0.0))


def equality_basis(A_eq):
    """ orthonormal basis of the null space of A_eq """
    return null_space(A_eq)


def fix_variables(problem, index, values):
    """ substitute fixed values for some variables

    return (problem over the remaining variables, indices of the remaining variables)
    """
    fixed = np.zeros(problem.n, dtype=bool)
    fixed[index] = True
    free = ~fixed
    v = np.asarray(values, dtype=float)
    reduced = QPProblem(H=problem.H[np.ix_(free, free)],
                        g=problem.g[free] + problem.H[np.ix_(free, fixed)] @ v,
                        A_eq=problem.A_eq[:, free],
                        b_eq=problem.b_eq - problem.A_eq[:, fixed] @ v,
                        A_in=problem.A_in[:, free],
                        b_in=problem.b_in - problem.A_in[:, fixed] @ v,
                        lb=problem.lb[free], ub=problem.ub[free])
    return reduced, np.flatnonzero(free)


def _bounds_to_equalities(problem):
    """ variables with lb == ub become equality rows """
    fixed = np.isfinite(problem.lb) & (problem.lb == problem.ub)
    if not fixed.any():
        return problem
    rows = np.eye(problem.n)[fixed]
    lb, ub = problem.lb.copy(), problem.ub.copy()
    lb[fixed], ub[fixed] = -np.inf, np.inf
    return QPProblem(H=problem.H, g=problem.g,
                     A_eq=np.vstack([problem.A_eq, rows]),
                     b_eq=np.concatenate([problem.b_eq, problem.lb[fixed]]),
                     A_in=problem.A_in, b_in=problem.b_in, lb=lb, ub=ub)


##### reduced problem ##########################################################

def _phase1_feasible(G, h, tol):
    """ False only when min t s.t. G w - t <= h proves infeasibility """
    m, n = G.shape
    c = np.zeros(n + 1)
    c[-1] = 1.0
    res = linprog(c, A_ub=np.hstack([G, -np.ones((m, 1))]), b_ub=h,
                  bounds=[(None, None)] * n + [(0, None)], method="highs")
    if res.status != 0:
        log.debug(f"phase-1 inconclusive: {res.message}")
        return True
    log.debug(f"phase-1 violation {res.fun:.3e}")
    return res.fun <= tol


def _step_length(s, ds, lam, dl):
    alpha = 1.0
    neg = ds < 0
    if neg.any():
        alpha = min(alpha, float(np.min(-s[neg] / ds[neg])))
    neg = dl < 0
    if neg.any():
        alpha = min(alpha, float(np.min(-lam[neg] / dl[neg])))
    return alpha


def _polish(H, g, G, h, w, s, lam):
    """ solve the KKT system on the strongly active set. None if not accepted """
    active = lam > s
    GA = G[active]
    n, k = len(g), int(active.sum())
    kkt = np.block([[H, GA.T], [GA, np.zeros((k, k))]])
    rhs = np.concatenate([-g, h[active]])
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    w_pol, lam_active = sol[:n], sol[n:]
    scale_h = 1 + _inf(h)
    scale_g = 1 + _inf(g)
    if np.max(G @ w_pol - h, initial=-np.inf) > POLISH_TOL * scale_h:
        return None
    if np.min(lam_active, initial=np.inf) < -POLISH_TOL * scale_g:
        return None
    lam_pol = np.zeros(len(h))
    lam_pol[active] = np.maximum(lam_active, 0.0)
    if _inf(H @ w_pol + g + G.T @ lam_pol) > POLISH_TOL * scale_g:
        return None
    return w_pol, lam_pol


def _interior_point(H, g, G, h, tol, max_iter):
    """ return (w, lam, status, residual, iterations, polished) """
    m, n = G.shape
    w = np.zeros(n)
    s = np.maximum(h - G @ w, 1.0)
    lam = np.ones(m)
    scale_g = 1 + _inf(g)
    scale_h = 1 + _inf(h)
    checked = False
    stalled = 0
    status = "max_iter"

    def residuals():
        rd = H @ w + g + G.T @ lam
        rp = G @ w + s - h
        mu = float(s @ lam) / m
        return rd, rp, mu, max(_inf(rd) / scale_g, _inf(rp) / scale_h, mu)

    it = 0
    for it in range(1, max_iter + 1):
        rd, rp, mu, residual = residuals()
        if residual <= tol:
            status = "optimal"
            break
        if it == PHASE1_CHECK and not checked:
            checked = True
            if not _phase1_feasible(G, h, tol):
                return w, lam, "infeasible", residual, it, False

        d = lam / s
        K = H + G.T @ (d[:, None] * G)
        try:
            factor = cho_factor(K)
        except LinAlgError:
            factor = cho_factor(K + 1e-12 * (1 + _inf(K)) * np.eye(n))

        def newton(rc):
            dw = cho_solve(factor, -rd - G.T @ (d * rp - rc / s))
            ds = -rp - G @ dw
            dl = -(rc + lam * ds) / s
            return dw, ds, dl

        # predictor
        dw, ds, dl = newton(s * lam)
        alpha = _step_length(s, ds, lam, dl)
        mu_aff = float((s + alpha * ds) @ (lam + alpha * dl)) / m
        sigma = (mu_aff / mu) ** 3

        # corrector
        dw, ds, dl = newton(s * lam + ds * dl - sigma * mu)
        alpha = min(1.0, STEP_TO_BOUNDARY * _step_length(s, ds, lam, dl))
        w = w + alpha * dw
        s = s + alpha * ds
        lam = lam + alpha * dl
        log.debug(f"ipm {it}: residual={residual:.3e} mu={mu:.3e} step={alpha:.3f}")

        stalled = stalled + 1 if alpha < 1e-10 else 0
        if stalled >= 5:
            break

    rd, rp, mu, residual = residuals()
    if status != "optimal":
        if residual <= tol:
            status = "optimal"
        elif not _phase1_feasible(G, h, tol):
            return w, lam, "infeasible", residual, it, False
        else:
            log.warning(f"qp stopped after {it} iterations with residual {residual:.3e}")
            return w, lam, "max_iter", residual, it, False

    polished = _polish(H, g, G, h, w, s, lam)
    if polished is None:
        return w, lam, status, residual, it, False
    w, lam = polished
    slack = h - G @ w
    residual = max(_inf(H @ w + g + G.T @ lam) / scale_g,
                   float(np.max(-slack, initial=0.0)) / scale_h,
                   _inf(lam * slack))
    return w, lam, status, residual, it, True


##### entry point ##############################################################

def solve_qp(problem, tol=1e-6, max_iter=200, regularization=1e-9, basis=None, check=True,
             origin=None):
    """ return QPSolution

    basis: precomputed null space of problem.A_eq, reused across related solves
    origin: a point with A_eq z = b_eq. computed by least squares when not given
    check: validate shapes and convexity first
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive not {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1 not {max_iter}")
    if check:
        problem.validate()
    if basis is None:
        problem = _bounds_to_equalities(problem)
    n = problem.n

    # particular solution and null space of the equalities
    if len(problem.b_eq):
        if origin is None:
            z0 = np.linalg.lstsq(problem.A_eq, problem.b_eq, rcond=None)[0]
        else:
            z0 = np.asarray(origin, dtype=float)
        violation = _inf(problem.A_eq @ z0 - problem.b_eq)
        if violation > tol * (1 + _inf(problem.b_eq)):
            log.debug(f"inconsistent equalities: residual {violation:.3e}")
            return QPSolution(z=z0, status="infeasible", kkt_residual=violation,
                              iterations=0, objective=problem.objective(z0))
        Z = equality_basis(problem.A_eq) if basis is None else basis
    elif basis is None:
        # no equalities. work on z directly
        z0 = np.zeros(n)
        Z = None
    else:
        z0 = np.zeros(n)
        Z = basis

    if Z is None:
        Hr, gr = problem.H, problem.g
    else:
        Hr = Z.T @ problem.H @ Z
        gr = Z.T @ (problem.H @ z0 + problem.g)
    shift = 0.0
    if len(Hr) and not _positive_definite(Hr):
        shift = regularization
        Hr = Hr + shift * np.eye(len(Hr))
    G, h = problem.inequalities()
    Gr = G if Z is None else G @ Z
    hr = h - G @ z0

    polished = False
    iterations = 0
    size = n if Z is None else Z.shape[1]
    if size == 0:
        # equalities fix every variable
        w = np.zeros(0)
        violation = float(np.max(-hr, initial=0.0))
        status = "optimal" if violation <= tol * (1 + _inf(h)) else "infeasible"
        residual = violation
    elif len(hr) == 0:
        w = -cho_solve(cho_factor(Hr), gr)
        status, residual = "optimal", _inf(Hr @ w + gr) / (1 + _inf(gr))
    else:
        w, _, status, residual, iterations, polished = _interior_point(Hr, gr, Gr, hr,
                                                                       tol, max_iter)
    z = z0 + (w if Z is None else Z @ w)
    return QPSolution(z=z, status=status, kkt_residual=float(residual),
                      iterations=iterations, objective=problem.objective(z),
                      polished=polished, regularization=shift,
                      stats=dict(reduced=size, inequalities=len(hr)))
