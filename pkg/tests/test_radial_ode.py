import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import exponential
from pfold.errors import ParameterError, QuenchError
from pfold.nonlinearity import NonlinearitySpec, eval_f
from pfold.quadrature import integrate_samples
from pfold.radial_ode import (ProblemSpec, flux_residual, phi_p, phi_p_inv, shoot, singular_lambda,
                              singular_oracle, singular_solution, solve_linear_rhs, solve_on_branch)

LIOUVILLE_B = 3.0 - 2.0 * math.sqrt(2.0)
LIOUVILLE_A = math.log(8.0 * LIOUVILLE_B)


def test_phi_p_examples():
    assert phi_p(0.0, 1.5) == 0.0
    assert phi_p(4.0, 1.5) == pytest.approx(2.0)
    for s in (-3.0, 0.1, 7.0):
        assert phi_p_inv(phi_p(s, 1.5), 1.5) == pytest.approx(s, rel=1e-12)


def test_problem_validation():
    with pytest.raises(ParameterError):
        exponential(2.5, 3.0)
    with pytest.raises(ParameterError):
        exponential(1.5, 1.0)
    pr = exponential(1.5, 14.0)
    assert pr.n_c == pytest.approx(13.5) and pr.p_conj == pytest.approx(3.0)


def test_shoot_zero_lambda():
    sol = shoot(exponential(1.5, 3.0), 0.7, 0.0, N=64)
    assert np.all(sol.u == 0.7) and sol.boundary_residual == 0.7


def test_shoot_liouville_boundary():
    sol = shoot(exponential(2.0, 2.0), LIOUVILLE_A, 1.0)
    assert abs(sol.boundary_residual) < 1e-7


def test_solve_on_branch_liouville():
    lam, sol = solve_on_branch(exponential(2.0, 2.0), LIOUVILLE_A)
    assert lam == pytest.approx(1.0, abs=1e-6)
    exact = LIOUVILLE_A - 2.0 * np.log1p(LIOUVILLE_B * sol.r**2)
    assert np.max(np.abs(sol.u - exact)) < 1e-8


def test_self_consistency_supercritical():
    pr = exponential(1.5, 14.0)
    lam, sol = solve_on_branch(pr, 5.0)
    again = shoot(pr, 5.0, lam)
    assert abs(again.boundary_residual) < sol.solver_tol


def test_lambda_vanishes_at_zero_center():
    # near a = 0 the problem is p-homogeneous, so lambda(a) ~ lambda_1 a^(p-1)
    p = 1.5
    pr = exponential(p, 3.0)
    lams = [solve_on_branch(pr, a, N=64)[0] for a in (1e-4, 1e-6, 1e-8)]
    assert lams[0] > lams[1] > lams[2] > 0 and lams[2] < 1e-3
    assert lams[1] / lams[2] == pytest.approx(100.0 ** (p - 1), rel=1e-3)


def test_supercritical_branch_approaches_singular_value():
    pr = exponential(1.5, 14.0)
    lam_s = singular_lambda(1.5, 14.0)
    assert lam_s == pytest.approx(math.sqrt(1.5) * 12.5)
    lam, _ = solve_on_branch(pr, 20.0, N=128)
    assert lam == pytest.approx(lam_s, rel=1e-9)


def test_flux_invariants():
    lam, sol = solve_on_branch(exponential(1.5, 5.0), 0.8)
    assert np.all(np.diff(sol.w) < 0) and np.all(sol.w < 0)


@pytest.mark.parametrize("p,n,a", [(1.5, 3.0, 0.6), (2.0, 2.0, 1.0), (1.2, 5.0, 0.5)])
def test_weak_identity(p, n, a):
    pr = exponential(p, n)
    lam, sol = solve_on_branch(pr, a)
    r = sol.r
    phi, dphi = 1.0 - r**2, -2.0 * r
    left = integrate_samples(r, np.abs(sol.du) ** (p - 2.0) * sol.du * dphi * r ** (n - 1)).value
    right = lam * integrate_samples(r, eval_f(pr.nonlinearity, sol.u) * phi * r ** (n - 1)).value
    assert left == pytest.approx(right, rel=1e-5)


def test_grid_refinement():
    pr = exponential(1.5, 5.0)
    _, coarse = solve_on_branch(pr, 0.8, N=1024)
    _, fine = solve_on_branch(pr, 0.8, N=2048)
    assert np.max(np.abs(coarse.u - fine.u[1::2])) < 10 * coarse.solver_tol


def test_mems_quench_guard():
    with pytest.raises(QuenchError):
        shoot(ProblemSpec(2.0, 2.0, NonlinearitySpec.mems(2.0)), 1.0, 0.5)
    lam, _ = solve_on_branch(ProblemSpec(2.0, 2.0, NonlinearitySpec.mems(2.0)), 0.3)
    assert lam > 0


def test_linear_rhs_closed_forms():
    p, n = 1.5, 5.0
    pr = exponential(p, n)
    zero = solve_linear_rhs(pr, np.zeros(1024))
    assert np.all(zero.u == 0.0)
    c = 2.0
    sol = solve_linear_rhs(pr, lambda r: np.full_like(r, c))
    exact = ((p - 1) / p) * (c / n) ** (1 / (p - 1)) * (1 - sol.r ** (p / (p - 1)))
    assert np.max(np.abs(sol.u - exact)) < 1e-12
    sampled = solve_linear_rhs(pr, np.full(1024, c))
    assert np.max(np.abs(sampled.u - exact)) < 1e-12


@pytest.mark.parametrize("p", [1.5, 2.0])
def test_linear_rhs_reproduces_singular_solution(p):
    pr = exponential(p, 14.0)
    sol = solve_linear_rhs(pr, lambda r: singular_lambda(p, 14.0) * r**-p)
    assert np.max(np.abs(sol.u + p * np.log(sol.r))) < 1e-10
    assert math.isinf(sol.a)


def test_singular_oracle_values():
    o = singular_oracle(exponential(1.5, 14.0))
    assert o.lam == pytest.approx(15.30931, abs=1e-5)
    o2 = singular_oracle(exponential(2.0, 10.0))
    assert o2.lam == pytest.approx(16.0) and o2.n_c == pytest.approx(10.0)
    with pytest.raises(ParameterError):
        singular_oracle(exponential(1.5, 1.5))


@settings(max_examples=20, deadline=None)
@given(p=st.floats(1.1, 2.0), n=st.floats(3.0, 20.0))
def test_singular_flux_residual(p, n):
    pr = exponential(p, n)
    r = np.geomspace(1e-4, 1.0, 50)
    res = flux_residual(pr, singular_lambda(p, n), lambda x: -p * np.log(x), r)
    assert np.max(np.abs(res)) < 1e-8


def test_singular_solution_evaluator():
    sol = singular_solution(exponential(1.5, 14.0), 256)
    u, du = sol.evaluate(np.array([0.5]))
    assert u[0] == pytest.approx(-1.5 * math.log(0.5)) and du[0] == pytest.approx(-3.0)
