import pytest
import numpy as np
from mirrorpark.scenario.geometry import ConvexRegion
from mirrorpark.solvers.qp import QPProblem, solve_qp
from mirrorpark.solvers.miqp import (DisjunctionGroup, MIQPProblem, solve_miqp, chosen_edges,
                                     rounded_binaries)
from mirrorpark.solvers.lazy import algorithm_one
from mirrorpark.utils.oracles import random_qp, random_miqp, exhaustive_miqp, match

import logging
log = logging.getLogger()


def outside_interval(step=0):
    """ |z| >= 1 as two edges """
    return DisjunctionGroup(step=step, region=0, rows=[[1.0], [-1.0]], offsets=[-1.0, -1.0])


def test_no_groups_is_qp(rng):
    problem = random_qp(rng, 4, m_in=2)
    sol = solve_miqp(MIQPProblem(problem))
    assert sol.optimal
    assert match(sol.z, solve_qp(problem).z)


def test_picks_nearer_side():
    base = QPProblem(H=[[2.0]], g=[-0.4])
    sol = solve_miqp(MIQPProblem(base, [outside_interval()]), gap=0.0)
    assert sol.optimal
    assert sol.z[0] == pytest.approx(1.0, abs=1e-6)
    assert list(sol.binaries) == [1, 0]
    assert sol.objective == pytest.approx(0.6, abs=1e-6)


def test_infeasible():
    base = QPProblem(H=[[2.0]], g=[0.0], lb=[-0.5], ub=[0.5])
    sol = solve_miqp(MIQPProblem(base, [outside_interval()]))
    assert sol.status == "infeasible"
    assert sol.z is None


def test_group_points_share_binary():
    # both coordinates must clear the same edge
    group = DisjunctionGroup(step=0, region=0,
                             rows=[[[1.0, 0.0], [0.0, 1.0]], [[-1.0, 0.0], [0.0, -1.0]]],
                             offsets=[[-1.0, -1.0], [-1.0, -1.0]])
    assert group.size == 2
    assert group.satisfied(np.array([1.5, 1.2]))
    assert not group.satisfied(np.array([1.5, -1.2]))
    base = QPProblem(H=np.eye(2) * 2, g=[-3.0, 3.0])
    sol = solve_miqp(MIQPProblem(base, [group]), gap=0.0)
    assert sol.optimal
    assert group.satisfied(sol.z, 1e-6)


@pytest.mark.parametrize("seed", range(30))
def test_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    groups, edges = [(2, 3), (3, 2), (1, 4)][seed % 3]
    problem = random_miqp(rng, n=int(rng.integers(2, 4)), groups=groups, edges=edges)
    _, expected = exhaustive_miqp(problem)
    sol = solve_miqp(problem, tol=1e-8, gap=0.0)
    if np.isinf(expected):
        assert sol.status == "infeasible"
        return
    assert sol.optimal
    assert sol.objective == pytest.approx(expected, abs=1e-6 * (1 + abs(expected)))
    assert all(g.satisfied(sol.z, 1e-6) for g in problem.groups)


def fixed_edges_qp(problem, binaries):
    """ base QP with the switched on edge of every group as plain inequalities """
    base = problem.base
    rows, rhs = [base.A_in], [base.b_in]
    for g, e in zip(problem.groups, chosen_edges(problem, binaries)):
        rows.append(-g.rows[e])
        rhs.append(g.offsets[e])
    return QPProblem(H=base.H, g=base.g, A_eq=base.A_eq, b_eq=base.b_eq,
                     A_in=np.vstack(rows), b_in=np.concatenate(rhs), lb=base.lb, ub=base.ub)


@pytest.mark.parametrize("seed", range(10))
def test_fixed_binaries_reproduce(seed):
    rng = np.random.default_rng(100 + seed)
    problem = random_miqp(rng, n=3, groups=2, edges=3)
    sol = solve_miqp(problem, tol=1e-8, gap=0.0)
    if sol.z is None:
        return
    again = solve_qp(fixed_edges_qp(problem, sol.binaries), tol=1e-8)
    assert again.optimal
    assert match(again.z, sol.z, tol=1e-6)


def two_sided():
    """ z0 and z1 each kept out of (-1, 1) """
    groups = [DisjunctionGroup(step=i, region=0, rows=np.eye(2)[[i, i]] * [[1.0], [-1.0]],
                               offsets=[-1.0, -1.0]) for i in range(2)]
    return MIQPProblem(QPProblem(H=2 * np.eye(2), g=[-0.2, 0.4]), groups)


def test_node_limit_keeps_rounded_incumbent():
    problem = two_sided()
    sol = solve_miqp(problem, node_limit=2)
    assert sol.status == "node_limit"
    assert sol.z is not None
    assert all(g.satisfied(sol.z, 1e-6) for g in problem.groups)
    assert sol.bound <= sol.objective + 1e-9
    best = solve_miqp(problem, gap=0.0)
    assert best.optimal
    assert best.objective <= sol.objective + 1e-9
    assert best.z == pytest.approx([1.0, -1.0], abs=1e-6)


def test_warm_edges_seed_incumbent():
    problem = MIQPProblem(QPProblem(H=[[2.0]], g=[-0.4]), [outside_interval()])
    sol = solve_miqp(problem, node_limit=2, warm=[1])
    assert sol.status == "node_limit"
    assert sol.z[0] == pytest.approx(-1.0, abs=1e-6)
    assert chosen_edges(problem, sol.binaries) == [1]
    assert list(rounded_binaries(problem, np.array([0.2]))) == [1, 0]
    assert list(rounded_binaries(problem, np.array([0.2]), [None])) == [1, 0]


def test_problem_checks():
    base = QPProblem(H=np.eye(2), g=[0, 0])
    with pytest.raises(ValueError):
        MIQPProblem(base, [outside_interval()])
    with pytest.raises(ValueError):
        MIQPProblem(QPProblem(H=[[1.0]], g=[0.0]), big_m=0)
    with pytest.raises(ValueError):
        DisjunctionGroup(step=0, region=0, rows=np.zeros((2, 3, 1)), offsets=np.zeros((2, 2)))


def test_relaxation_shape():
    problem = MIQPProblem(QPProblem(H=[[2.0]], g=[0.0]), [outside_interval(), outside_interval(1)])
    relax = problem.relaxation()
    assert problem.binary_count == 4
    assert relax.n == 5
    assert list(relax.lb[1:]) == [0, 0, 0, 0]
    assert list(relax.ub[1:]) == [1, 1, 1, 1]


##### lazy activation ##########################################################

class PointPath:
    """ z holds 2-D points, one per step """

    def __init__(self, steps):
        self.steps = steps

    def points(self, z):
        return np.asarray(z).reshape(self.steps, 2)

    def collisions(self, z, regions):
        hits = []
        for i, p in enumerate(self.points(z)):
            for k, r in enumerate(regions):
                e = r.array
                if np.max(e[:, :2] @ p + e[:, 2]) < -1e-6:
                    hits.append((i, k))
        return sorted(hits)

    def group(self, step, region_index, region):
        e = region.array
        rows = np.zeros((len(e), 2 * self.steps))
        rows[:, 2 * step:2 * step + 2] = e[:, :2]
        return DisjunctionGroup(step=step, region=region_index, rows=rows, offsets=e[:, 2])


def test_lazy_activates_colliding_steps():
    # points pulled towards targets. only step 1 targets the inside of the square
    targets = np.array([[-3.0, 0.0], [0.2, 0.1], [3.0, 0.0]])
    problem = QPProblem(H=2 * np.eye(6), g=-2 * targets.ravel())
    square = ConvexRegion.from_vertices([(-1, -1), (1, -1), (1, 1), (-1, 1)])
    path = PointPath(3)
    result = algorithm_one(problem, [square], path)
    assert result.optimal
    assert result.theta_set == [1]
    assert result.binaries == 4
    assert path.collisions(result.z, [square]) == []
    # free steps keep their unconstrained values
    assert match(path.points(result.z)[[0, 2]], targets[[0, 2]], tol=1e-5)
    assert path.points(result.z)[1] == pytest.approx([1.0, 0.1], abs=1e-5)


def test_lazy_without_collisions():
    problem = QPProblem(H=2 * np.eye(2), g=[-6.0, 0.0])
    square = ConvexRegion.from_vertices([(-1, -1), (1, -1), (1, 1), (-1, 1)])
    result = algorithm_one(problem, [square], PointPath(1))
    assert result.optimal
    assert result.miqp_solves == 0
    assert result.binaries == 0


@pytest.mark.parametrize("seed", range(50))
def test_lazy_binaries_below_dense_count(seed):
    rng = np.random.default_rng(seed)
    squares = [ConvexRegion.from_vertices([(x - 1, y - 1), (x + 1, y - 1), (x + 1, y + 1),
                                           (x - 1, y + 1)]) for x, y in [(-4, 0), (4, 3)]]
    centres = np.array([[-4.0, 0.0], [4.0, 3.0]])
    steps = 10
    # clear of both squares, then one or two steps pulled inside
    targets = np.column_stack([rng.uniform(-8, 8, steps), rng.uniform(-8, -2, steps)])
    for i in rng.choice(steps, size=int(rng.integers(1, 3)), replace=False):
        targets[i] = centres[rng.integers(0, 2)] + rng.uniform(-0.8, 0.8, 2)
    problem = QPProblem(H=2 * np.eye(2 * steps), g=-2 * targets.ravel())
    path = PointPath(steps)
    assert path.collisions(problem.g * -0.5, squares)

    result = algorithm_one(problem, squares, path, node_limit=1000)
    assert result.optimal
    assert path.collisions(result.z, squares) == []
    dense = steps * len(squares) * 4
    assert result.binaries < 0.3 * dense


def test_lazy_edges_and_warm_start():
    targets = np.array([[-3.0, 0.0], [0.2, 0.1], [3.0, 0.0]])
    problem = QPProblem(H=2 * np.eye(6), g=-2 * targets.ravel())
    square = ConvexRegion.from_vertices([(-1, -1), (1, -1), (1, 1), (-1, 1)])
    path = PointPath(3)
    result = algorithm_one(problem, [square], path)
    assert result.usable
    assert list(result.edges) == [(1, 0)]
    edge = result.edges[(1, 0)]
    # the warm edge is kept when the search stops at the rounded leaf
    other = (edge + 2) % 4
    forced = algorithm_one(problem, [square], path, node_limit=2, warm={(1, 0): other})
    assert forced.usable
    assert forced.status == "node_limit"
    assert forced.edges == {(1, 0): other}
    assert path.collisions(forced.z, [square]) == []


def test_lazy_failure_is_not_usable():
    problem = QPProblem(H=2 * np.eye(2), g=[0.0, 0.0], lb=[-0.5, -0.5], ub=[0.5, 0.5])
    square = ConvexRegion.from_vertices([(-1, -1), (1, -1), (1, 1), (-1, 1)])
    result = algorithm_one(problem, [square], PointPath(1))
    assert result.status == "infeasible"
    assert not result.usable
