"""
Lazy activation of collision constraints.

Solve without collision constraints, then add disjunction groups only for the
(step, region) pairs the current trajectory actually collides with, and
re-solve as a MIQP until the trajectory is clear.
"""
from dataclasses import dataclass, field
from typing import List, Protocol
import numpy as np
from mirrorpark.solvers.qp import solve_qp
from mirrorpark.solvers.miqp import MIQPProblem, solve_miqp, chosen_edges
import logging
log = logging.getLogger()


class CollisionExtractor(Protocol):
    """ maps a solution vector to trajectory feature points """

    def collisions(self, z, regions):
        """ return sorted list of (step, region index) pairs in collision """

    def group(self, step, region_index, region):
        """ return DisjunctionGroup keeping step outside region """


@dataclass
class LazyResult:
    z: np.ndarray
    status: str
    theta_set: List[int] = field(default_factory=list)
    groups: List = field(default_factory=list)
    iterations: int = 0
    miqp_solves: int = 0
    nodes: int = 0
    qp_iterations: int = 0
    # edge switched on per (step, region index)
    edges: dict = field(default_factory=dict)

    @property
    def binaries(self):
        return sum(g.size for g in self.groups)

    @property
    def optimal(self):
        return self.status == "optimal"

    @property
    def usable(self):
        """ collision free under the extractor, possibly short of proven optimal """
        return self.z is not None and self.status in ("optimal", "node_limit")


def algorithm_one(problem, regions, extractor, tol=1e-6, max_iter=10, node_limit=200,
                  gap=1e-4, big_m=1e3, qp_max_iter=200, regularization=1e-9, basis=None,
                  origin=None, warm=None):
    """ return LazyResult

    problem: QPProblem without collision constraints
    extractor: CollisionExtractor for the problem's decision vector
    basis, origin: null space and particular solution of the problem's equalities
    warm: {(step, region index): edge} tried first when that group is created
    status is optimal, node_limit when some MIQP stopped early with an incumbent,
    unresolved after max_iter MIQP solves, or the failing solver status
    """
    warm = warm or {}
    sol = solve_qp(problem, tol, qp_max_iter, regularization, basis=basis, check=False,
                   origin=origin)
    result = LazyResult(z=sol.z, status=sol.status, qp_iterations=sol.iterations)
    if not sol.optimal:
        return result

    theta, keys = set(), []
    edges = []
    stopped_early = False
    for it in range(max_iter + 1):
        hits = extractor.collisions(result.z, regions)
        if not hits:
            result.status = "node_limit" if stopped_early else "optimal"
            break
        new = [hit for hit in hits if hit not in keys]
        if it == max_iter or not new:
            log.warning(f"collisions remain after {it} MIQP solves: {hits[:5]}")
            result.status = "unresolved"
            break
        for step, k in new:
            keys.append((step, k))
            theta.add(step)
            result.groups.append(extractor.group(step, k, regions[k]))
            edges.append(warm.get((step, k)))
        log.debug(f"lazy pass {it + 1}: steps {sorted(theta)}")

        miqp = solve_miqp(MIQPProblem(problem, result.groups, big_m), tol=tol,
                          node_limit=node_limit, gap=gap, max_iter=qp_max_iter,
                          regularization=regularization, basis=basis, origin=origin,
                          warm=edges)
        result.miqp_solves += 1
        result.nodes += miqp.nodes
        result.qp_iterations += miqp.qp_iterations
        if miqp.z is None:
            result.status = miqp.status
            break
        stopped_early = stopped_early or miqp.status == "node_limit"
        result.z = miqp.z
        edges = chosen_edges(MIQPProblem(problem, result.groups, big_m), miqp.binaries)
    result.iterations = result.miqp_solves
    result.theta_set = sorted(theta)
    result.edges = dict(zip(keys, edges)) if result.groups else {}
    return result
