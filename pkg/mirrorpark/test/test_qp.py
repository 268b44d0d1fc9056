import pytest
import numpy as np
from mirrorpark.solvers.qp import QPProblem, solve_qp, fix_variables, equality_basis
from mirrorpark.utils.oracles import random_qp, active_set_qp, kkt_residual, match

import logging
log = logging.getLogger()


def test_unconstrained(rng):
    problem = random_qp(rng, 5)
    sol = solve_qp(problem)
    assert sol.optimal
    assert match(sol.z, np.linalg.solve(problem.H, -problem.g))


def test_equality_only(rng):
    problem = random_qp(rng, 6, m_eq=2)
    sol = solve_qp(problem)
    K = np.block([[problem.H, problem.A_eq.T], [problem.A_eq, np.zeros((2, 2))]])
    expected = np.linalg.solve(K, np.concatenate([-problem.g, problem.b_eq]))[:6]
    assert sol.optimal
    assert match(sol.z, expected)


def test_reused_basis_and_origin(rng):
    problem = random_qp(rng, 6, m_eq=2, m_in=3, bounds=True)
    basis = equality_basis(problem.A_eq)
    # any point on the equalities serves
    origin = np.linalg.lstsq(problem.A_eq, problem.b_eq, rcond=None)[0]
    origin = origin + basis @ [1.0, -2.0, 0.5, 3.0]
    sol = solve_qp(problem, tol=1e-8, basis=basis, origin=origin)
    assert sol.optimal
    assert match(sol.z, solve_qp(problem, tol=1e-8).z)
    off = solve_qp(problem, basis=basis, origin=origin + 0.1 * problem.A_eq[0])
    assert off.status == "infeasible"


def test_box():
    problem = QPProblem(H=np.eye(2), g=[-3.0, 1.0], lb=[-1, -1], ub=[1, 1])
    sol = solve_qp(problem)
    assert sol.optimal
    assert match(sol.z, [1.0, -1.0])
    assert sol.objective == pytest.approx(-3.0, abs=1e-6)


@pytest.mark.parametrize("seed", range(40))
def test_matches_active_set(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    problem = random_qp(rng, n, m_eq=int(rng.integers(0, n)), m_in=int(rng.integers(0, 4)),
                        bounds=bool(seed % 2))
    expected, objective = active_set_qp(problem)
    sol = solve_qp(problem, tol=1e-8)
    assert sol.optimal
    assert match(sol.z, expected, tol=1e-6)
    assert sol.objective == pytest.approx(objective, abs=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_kkt_residual(seed):
    rng = np.random.default_rng(100 + seed)
    problem = random_qp(rng, 30, m_eq=5, m_in=20, bounds=True)
    sol = solve_qp(problem, tol=1e-8)
    assert sol.optimal
    G, h = problem.inequalities()
    assert np.all(G @ sol.z <= h + 1e-7)
    assert np.allclose(problem.A_eq @ sol.z, problem.b_eq, atol=1e-7)
    assert kkt_residual(problem, sol.z) < 1e-6


def test_infeasible_inequalities():
    problem = QPProblem(H=np.eye(1), g=[0.0], A_in=[[1.0], [-1.0]], b_in=[-1.0, -1.0])
    assert solve_qp(problem).status == "infeasible"


def test_inconsistent_equalities():
    problem = QPProblem(H=np.eye(2), g=[0, 0], A_eq=[[1, 1], [1, 1]], b_eq=[1, 2])
    assert solve_qp(problem).status == "infeasible"


def test_fixed_bounds():
    problem = QPProblem(H=np.eye(2), g=[1.0, 1.0], lb=[0.5, -5], ub=[0.5, 5])
    sol = solve_qp(problem)
    assert sol.optimal
    assert match(sol.z, [0.5, -1.0])


def test_singular_hessian_regularized():
    problem = QPProblem(H=np.zeros((2, 2)), g=[1.0, -1.0], lb=[-1, -1], ub=[1, 1])
    sol = solve_qp(problem)
    assert sol.optimal
    assert sol.regularization > 0
    assert match(sol.z, [-1.0, 1.0], tol=1e-4)


def test_fix_variables(rng):
    problem = random_qp(rng, 4, m_in=2)
    reduced, free = fix_variables(problem, [1, 3], [0.2, -0.1])
    assert list(free) == [0, 2]
    z = np.zeros(4)
    z[[1, 3]] = [0.2, -0.1]
    z[free] = rng.standard_normal(2)
    # objectives differ by a constant
    shift = problem.objective(z) - reduced.objective(z[free])
    z[free] = rng.standard_normal(2)
    assert problem.objective(z) - reduced.objective(z[free]) == pytest.approx(shift)


@pytest.mark.parametrize("kwargs", [dict(tol=0), dict(tol=-1), dict(max_iter=0)])
def test_bad_settings(rng, kwargs):
    with pytest.raises(ValueError):
        solve_qp(random_qp(rng, 2), **kwargs)


def test_validate():
    with pytest.raises(ValueError):
        solve_qp(QPProblem(H=[[1, 1], [0, 1]], g=[0, 0]))
    with pytest.raises(ValueError):
        solve_qp(QPProblem(H=-np.eye(2), g=[0, 0]))
    with pytest.raises(ValueError):
        solve_qp(QPProblem(H=np.eye(2), g=[0, 0], lb=[1, 1], ub=[0, 0]))


def test_match_mixed_types():
    assert match(np.array([1.0, -1.0]), [1.0, -1.0])
    assert match([0.5], np.array([0.5 + 1e-9]))
    assert match(2.0, np.float64(2.0))
    assert match((np.zeros(2), 1.0), ([0.0, 0.0], 1.0))
    assert not match(np.array([1.0, -1.0]), [1.0])
    assert not match([1.0, 0.0], [1.0, 0.1])


@pytest.mark.parametrize("seed", range(10))
def test_objective_scaling(seed):
    rng = np.random.default_rng(200 + seed)
    problem = random_qp(rng, 4, m_eq=1, m_in=3, bounds=True)
    scaled = QPProblem(H=7.5 * problem.H, g=7.5 * problem.g, A_eq=problem.A_eq, b_eq=problem.b_eq,
                       A_in=problem.A_in, b_in=problem.b_in, lb=problem.lb, ub=problem.ub)
    a, b = solve_qp(problem, tol=1e-8), solve_qp(scaled, tol=1e-8)
    assert a.optimal and b.optimal
    assert match(a.z, b.z, tol=1e-6)


@pytest.mark.parametrize("seed", range(10))
def test_no_feasible_sample_does_better(seed):
    rng = np.random.default_rng(300 + seed)
    problem = random_qp(rng, 3, m_in=3, bounds=True)
    sol = solve_qp(problem, tol=1e-8)
    assert sol.optimal
    G, h = problem.inequalities()
    samples = rng.uniform(problem.lb, problem.ub, (2000, 3))
    feasible = samples[np.all(samples @ G.T <= h, axis=1)]
    assert len(feasible) > 0
    objectives = np.array([problem.objective(z) for z in feasible])
    assert objectives.min() >= sol.objective - 1e-8
