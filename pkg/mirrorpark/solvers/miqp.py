"""
Best-first branch and bound for QPs with big-M disjunctions.

A disjunction group holds one binary per edge. Binary b_l switches on

    rows[l, p] @ z + offsets[l, p] >= -M (1 - b_l)     for every point p

and at least one binary per group must be on.
"""
from dataclasses import dataclass, field
import heapq
from typing import List
import numpy as np
from scipy.linalg import block_diag
from mirrorpark.solvers.qp import (QPProblem, solve_qp, fix_variables,
                                   equality_basis, _bounds_to_equalities)
import logging
log = logging.getLogger()

INT_TOL = 1e-6


@dataclass
class DisjunctionGroup:
    step: int
    region: int
    # [L, P, n] coefficients and [L, P] offsets. one binary per edge l shared by points p
    rows: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float)
        self.offsets = np.asarray(self.offsets, dtype=float)
        if self.rows.ndim == 2:
            self.rows = self.rows[:, None, :]
            self.offsets = self.offsets.reshape(-1, 1)
        if len(self.rows) < 1:
            raise ValueError("disjunction group needs at least one edge")
        if self.offsets.shape != self.rows.shape[:2]:
            raise ValueError(f"offsets {self.offsets.shape} do not match rows {self.rows.shape}")

    @property
    def size(self):
        return len(self.rows)

    def margins(self, z):
        """ [L, P] edge values at z """
        return self.rows @ z + self.offsets

    def satisfied(self, z, tol=1e-6):
        """ some edge has every point on its outer side """
        return bool(np.any(np.all(self.margins(z) >= -tol, axis=1)))


@dataclass
class MIQPProblem:
    base: QPProblem
    groups: List[DisjunctionGroup] = field(default_factory=list)
    big_m: float = 1e3

    def __post_init__(self):
        if not self.big_m > 0:
            raise ValueError(f"big M must be positive not {self.big_m}")
        for g in self.groups:
            if g.rows.shape[2] != self.base.n:
                raise ValueError(f"group at step {g.step} has {g.rows.shape[2]} columns "
                                 f"for {self.base.n} variables")

    @property
    def binary_count(self):
        return sum(g.size for g in self.groups)

    def relaxation(self):
        """ QPProblem over [z, binaries] with binaries relaxed to [0, 1] """
        base, M = self.base, self.big_m
        n, nb = base.n, self.binary_count
        H = np.zeros((n + nb, n + nb))
        H[:n, :n] = base.H
        pad = lambda A: np.hstack([A, np.zeros((len(A), nb))])

        rows, rhs = [pad(base.A_in)], [base.b_in]
        col = n
        for g in self.groups:
            L, P, _ = g.rows.shape
            edge = np.zeros((L * P, n + nb))
            edge[:, :n] = -g.rows.reshape(L * P, n)
            edge[np.arange(L * P), col + np.repeat(np.arange(L), P)] = M
            rows.append(edge)
            rhs.append(M + g.offsets.reshape(-1))
            card = np.zeros((1, n + nb))
            card[0, col:col + L] = -1.0
            rows.append(card)
            rhs.append([-1.0])
            col += L

        return QPProblem(H=H, g=np.concatenate([base.g, np.zeros(nb)]),
                         A_eq=pad(base.A_eq), b_eq=base.b_eq,
                         A_in=np.vstack(rows), b_in=np.concatenate(rhs),
                         lb=np.concatenate([base.lb, np.zeros(nb)]),
                         ub=np.concatenate([base.ub, np.ones(nb)]))


@dataclass
class MIQPSolution:
    z: np.ndarray
    binaries: np.ndarray
    status: str
    objective: float
    nodes: int = 0
    bound: float = np.nan
    qp_iterations: int = 0

    @property
    def optimal(self):
        return self.status == "optimal"


def _project(relax, n, basis, origin):
    """ relaxation over [w, binaries] with z = origin + basis w. equalities drop out """
    nb = relax.n - n
    T = block_diag(basis, np.eye(nb))
    t0 = np.concatenate([origin, np.zeros(nb)])
    # z bounds become rows, binary bounds stay bounds
    upper, lower = np.isfinite(relax.ub[:n]), np.isfinite(relax.lb[:n])
    eye = np.eye(relax.n)[:n]
    G = np.vstack([relax.A_in, eye[upper], -eye[lower]])
    h = np.concatenate([relax.b_in, relax.ub[:n][upper], -relax.lb[:n][lower]])
    k = basis.shape[1]
    projected = QPProblem(H=T.T @ relax.H @ T, g=T.T @ (relax.H @ t0 + relax.g),
                          A_in=G @ T, b_in=h - G @ t0,
                          lb=np.concatenate([np.full(k, -np.inf), relax.lb[n:]]),
                          ub=np.concatenate([np.full(k, np.inf), relax.ub[n:]]))
    return projected, T, t0


def rounded_binaries(problem, z, warm=None):
    """ one edge per group: the warm choice if given, else the edge whose worst point is
    furthest outside at z

    warm: list with an edge index or None per group
    """
    out = []
    for i, g in enumerate(problem.groups):
        edge = None if warm is None or i >= len(warm) else warm[i]
        if edge is None:
            edge = int(np.argmax(g.margins(z).min(axis=1)))
        b = np.zeros(g.size)
        b[edge] = 1.0
        out.append(b)
    return np.concatenate(out) if out else np.zeros(0)


def chosen_edges(problem, binaries):
    """ edge index switched on per group """
    out, col = [], 0
    for g in problem.groups:
        out.append(int(np.argmax(binaries[col:col + g.size])))
        col += g.size
    return out


def solve_miqp(problem, tol=1e-6, node_limit=200, gap=1e-4, max_iter=200,
               regularization=1e-9, basis=None, origin=None, warm=None):
    """ return MIQPSolution

    nodes are expanded best bound first. ties go to the lower branching index,
    then the nearer value, then creation order. a rounded leaf seeds the incumbent
    basis: null space of problem.base.A_eq
    origin: a point satisfying problem.base equalities
    warm: edge index per group to try first, None entries are rounded from the root
    """
    base = problem.base
    if not problem.groups:
        sol = solve_qp(base, tol, max_iter, regularization, basis=basis, origin=origin)
        return MIQPSolution(z=sol.z, binaries=np.zeros(0), status=sol.status,
                            objective=sol.objective, nodes=1, bound=sol.objective,
                            qp_iterations=sol.iterations)
    if basis is None:
        base.validate()
        base = _bounds_to_equalities(base)
        problem = MIQPProblem(base, problem.groups, problem.big_m)
        if len(base.b_eq):
            basis = equality_basis(base.A_eq)
    n, nb = base.n, problem.binary_count
    relax = problem.relaxation()
    offset = 0.0
    if basis is not None:
        if origin is None:
            origin = np.linalg.lstsq(base.A_eq, base.b_eq, rcond=None)[0]
        if np.abs(base.A_eq @ origin - base.b_eq).max() > tol * (1 + np.abs(base.b_eq).max()):
            return MIQPSolution(z=None, binaries=None, status="infeasible", objective=np.inf)
        work, T, t0 = _project(relax, n, basis, origin)
        offset = relax.objective(t0)
    else:
        work, T, t0 = relax, None, None
    m = work.n - nb
    stats = dict(nodes=0, iterations=0)

    def lift(x):
        """ [w, b] to [z, b] """
        return x if T is None else t0 + T @ x

    def solve_node(fixed):
        """ solve relaxation with binaries fixed. return (objective, full x) or None """
        stats["nodes"] += 1
        index = np.array(sorted(fixed), dtype=int)
        values = np.array([fixed[i] for i in index], dtype=float)
        reduced, free = fix_variables(work, m + index, values)
        sol = solve_qp(reduced, tol, max_iter, regularization, check=False)
        stats["iterations"] += sol.iterations
        if sol.status != "optimal":
            if sol.status == "max_iter":
                log.warning(f"branch and bound node dropped after {sol.iterations} iterations")
            return None
        x = np.zeros(m + nb)
        x[free] = sol.z
        x[m + index] = values
        return work.objective(x) + offset, x

    root = solve_node({})
    if root is None:
        return MIQPSolution(z=None, binaries=None, status="infeasible", objective=np.inf,
                            nodes=stats["nodes"], qp_iterations=stats["iterations"])

    incumbent, best = None, np.inf
    guess = rounded_binaries(problem, lift(root[1])[:n], warm)
    leaf = solve_node({i: float(v) for i, v in enumerate(guess)})
    if leaf is not None:
        best, incumbent = leaf
        log.debug(f"rounded incumbent {best:.6f}")

    seq = 0
    heap = [(root[0], -1, 0, seq, {}, root[1])]
    bound = root[0]
    status = "optimal"
    while heap:
        bound, _, _, _, fixed, x = heapq.heappop(heap)
        if incumbent is not None and bound >= best - gap * max(1.0, abs(best)):
            continue
        b = x[m:]
        frac = np.abs(b - np.round(b))
        if frac.max() <= INT_TOL:
            # leaf: re-solve with every binary fixed so the big-M rows hold exactly
            leaf = solve_node({i: float(v) for i, v in enumerate(np.round(b))})
            if leaf is not None and leaf[0] < best:
                best, incumbent = leaf
                log.debug(f"incumbent {best:.6f} after {stats['nodes']} nodes")
            continue
        if stats["nodes"] >= node_limit:
            status = "node_limit"
            heapq.heappush(heap, (bound, -1, 0, seq, fixed, x))
            break
        j = int(np.argmax(frac))
        nearest = float(np.round(b[j]))
        for order, value in enumerate([nearest, 1.0 - nearest]):
            child = solve_node({**fixed, j: value})
            if child is None:
                continue
            seq += 1
            heapq.heappush(heap, (child[0], j, order, seq, {**fixed, j: value}, child[1]))

    if status == "node_limit":
        bound = min(h[0] for h in heap)
        log.warning(f"branch and bound hit node limit {node_limit}")
    elif incumbent is not None:
        bound = best
    if incumbent is None:
        return MIQPSolution(z=None, binaries=None,
                            status="node_limit" if status == "node_limit" else "infeasible",
                            objective=np.inf, nodes=stats["nodes"], bound=bound,
                            qp_iterations=stats["iterations"])
    z = lift(incumbent)
    return MIQPSolution(z=z[:n], binaries=np.round(incumbent[m:]), status=status,
                        objective=best, nodes=stats["nodes"], bound=bound,
                        qp_iterations=stats["iterations"])
