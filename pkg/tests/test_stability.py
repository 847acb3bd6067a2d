import numpy as np
import pytest

from conftest import exponential
from pfold.errors import DivergenceError, ParameterError
from pfold.radial_ode import singular_solution, solve_on_branch
from pfold.stability import (_discrete_mu1, assemble, mu1, quadratic_form, radial_form_weights, rayleigh_quotient,
                             singular_mu1, stability_threshold_scan, weight_integral)


def test_weights_p2_and_singular():
    _, sol = solve_on_branch(exponential(2.0, 2.0), 0.5)
    ws, _, wm = radial_form_weights(sol)
    np.testing.assert_allclose(ws, sol.r)
    np.testing.assert_allclose(wm, sol.r)
    sing = singular_solution(exponential(1.5, 14.0), 512)
    ws, _, _ = radial_form_weights(sing)
    np.testing.assert_allclose(ws, 0.5 * (1.5 / sing.r) ** -0.5 * sing.r**13, rtol=1e-12)


@pytest.mark.parametrize("p", [1.3, 1.5, 2.0])
def test_gradient_weight_integrable(p):
    _, sol = solve_on_branch(exponential(p, 3.0), 0.3)
    assert np.isfinite(weight_integral(sol))


def test_gradient_weight_divergence_guard():
    # |u'|^(p-2) r^(n-1) ~ r^(-7) for p = 1.1, n = 3
    _, sol = solve_on_branch(exponential(1.1, 3.0), 0.3)
    with pytest.raises(DivergenceError):
        weight_integral(sol)
    assert assemble(sol).singular_weight
    with pytest.raises(ParameterError):
        mu1(sol)
    _, ok = solve_on_branch(exponential(1.5, 3.0), 0.3)
    assert not assemble(ok).singular_weight


def test_branch_start_is_stable():
    _, sol = solve_on_branch(exponential(1.5, 3.0), 0.05)
    rep = mu1(sol)
    assert rep.mu1 > 0 and rep.sign_changes == 0


def test_singular_profile_stability_sides():
    assert singular_mu1(1.5, 14.0) >= 0
    assert singular_mu1(1.5, 13.0) < 0


def test_rayleigh_lower_bound():
    _, sol = solve_on_branch(exponential(1.5, 5.0), 0.8)
    mu, _, pencil = _discrete_mu1(sol)
    rng = np.random.default_rng(3)
    x = np.concatenate([[0.0], sol.r])
    for _ in range(20):
        coeffs = rng.normal(size=4)
        v = sum(c * np.cos((k + 0.5) * np.pi * x) for k, c in enumerate(coeffs))
        v[-1] = 0.0
        assert quadratic_form(sol, v) >= mu - 1e-6
        assert rayleigh_quotient(pencil, v[:-1]) == pytest.approx(quadratic_form(sol, v))


def test_grid_convergence_second_order():
    pr = exponential(1.5, 3.0)
    vals = [_discrete_mu1(solve_on_branch(pr, 0.5, N=N)[1])[0] for N in (512, 1024, 2048)]
    d1, d2 = abs(vals[0] - vals[1]), abs(vals[1] - vals[2])
    assert 3.5 < d1 / d2 < 4.5
    assert d1 <= 4 * d2 * (1 + 1e-2)


def test_guards():
    _, sol = solve_on_branch(exponential(1.5, 3.0), 0.3, N=256)
    with pytest.raises(ParameterError):
        mu1(sol)
    _, sol = solve_on_branch(exponential(1.5, 3.0), 0.3)
    with pytest.raises(ParameterError):
        mu1(sol, boundary="neumann")


def test_assembly_is_symmetric_pencil():
    _, sol = solve_on_branch(exponential(1.5, 3.0), 0.3, N=512)
    diag, off, mass, _ = assemble(sol)
    assert diag.size == off.size + 1 == mass.size
    assert np.all(mass > 0)


def test_threshold_scan_p19():
    scan = stability_threshold_scan(1.9)
    assert scan.n_star == pytest.approx(1.9 + 7.6 / 0.9, abs=0.1)
