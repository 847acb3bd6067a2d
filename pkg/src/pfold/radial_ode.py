"""Radial shooting for -Delta_p u = lambda f(u) on the ball B_R.

In radial form the problem is the first-order system

    u' = phi_p^{-1}(w / r^(n-1)),     w' = -lambda r^(n-1) f(u),

with the flux w = r^(n-1) phi_p(u') and phi_p(s) = |s|^(p-2) s. The
integrator works in t = log r on the pair (u, v) with v = phi_p(u') = w / r^(n-1):

    du/dt = r phi_p^{-1}(v),    dv/dt = -lambda r f(u) - (n - 1) v,

which is smooth at the origin, where v ~ -lambda f(a) r / n.

Minimal radial solutions are assumed radially symmetric, the usual
modelling assumption for this problem class on balls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate as _sint
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from . import nonlinearity as nl
from .errors import BracketError, DivergenceError, ParameterError, QuenchError, StiffnessError
from .quadrature import DEFAULT_N, RadialGrid, default_grading

STARTUP_RADIUS = 1e-6
LAMBDA_CAP = 1e6


@dataclass(frozen=True)
class ProblemSpec:
    """One instance of the radial problem: exponent p, real dimension n, reaction term, radius."""

    p: float
    n: float
    nonlinearity: nl.NonlinearitySpec
    R: float = 1.0

    def __post_init__(self):
        if not 1.0 < self.p <= 2.0:
            raise ParameterError(f"p must lie in (1, 2], got {self.p}")
        if self.n < 2:
            raise ParameterError(f"n must be >= 2, got {self.n}")
        if self.R <= 0:
            raise ParameterError("R must be positive")
        self.nonlinearity.validate_for(self.p)

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def n_p(self) -> float:
        return self.p + 2.0

    @property
    def n_c(self) -> float:
        """Dimension p + 4p/(p-1) at which the singular exponential solution becomes extremal."""
        return self.p + 4.0 * self.p / (self.p - 1.0)

    def grid(self, N: int = DEFAULT_N, gamma: float | None = None) -> RadialGrid:
        return RadialGrid(N, default_grading(self.p) if gamma is None else gamma, self.R, self.n)

    def to_dict(self) -> dict:
        return {"p": self.p, "n": self.n, "R": self.R, "nonlinearity": self.nonlinearity.to_dict()}


def phi_p(s, p):
    s = np.asarray(s, dtype=float)
    out = np.sign(s) * np.abs(s) ** (p - 1.0)
    return out[()] if out.ndim == 0 else out


def phi_p_inv(s, p):
    s = np.asarray(s, dtype=float)
    out = np.sign(s) * np.abs(s) ** (1.0 / (p - 1.0))
    return out[()] if out.ndim == 0 else out


@dataclass
class RadialSolution:
    """A radial profile sampled on a graded grid.

    ``w`` is the flux r^(n-1) phi_p(u') and ``du`` the recovered u'. For
    linear solves ``lam`` is nan and ``rhs`` holds the prescribed source.
    """

    problem: ProblemSpec
    lam: float
    a: float
    grid: RadialGrid
    u: np.ndarray
    w: np.ndarray
    du: np.ndarray
    boundary_residual: float
    solver_tol: float
    rhs: np.ndarray | None = None
    dense: Callable | None = field(default=None, repr=False, compare=False)

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def sup_norm(self) -> float:
        return self.a if np.isfinite(self.a) else float("inf")

    def source(self) -> np.ndarray:
        """Right-hand side -Delta_p u sampled on the nodes."""
        if self.rhs is not None:
            return self.rhs
        return self.lam * np.asarray(nl.eval_f(self.problem.nonlinearity, self.u))

    def evaluate(self, r):
        """(u, u') at arbitrary radii in (0, R]."""
        r = np.asarray(r, dtype=float)
        if self.dense is not None:
            return self.dense(r)
        center = self.a if np.isfinite(self.a) else None
        u_int = _pchip(self.r, self.u, center)
        du_int = _pchip(self.r, self.du, 0.0 if center is not None else None)
        return u_int(r), du_int(r)

    def to_rows(self):
        return zip(self.r, self.u, self.du, self.w)


def _pchip(r, values, origin_value):
    if origin_value is not None:
        r = np.concatenate([[0.0], r])
        values = np.concatenate([[origin_value], values])
    return PchipInterpolator(r, values, extrapolate=True)


def startup_expansion(problem: ProblemSpec, a: float, lam: float, r):
    """Two-term expansion (u, v) of the regular solution near r = 0."""
    p, n = problem.p, problem.n
    F = lam * float(nl.eval_f(problem.nonlinearity, a))
    r = np.asarray(r, dtype=float)
    u = a - (p - 1.0) / p * (F / n) ** (1.0 / (p - 1.0)) * r ** (p / (p - 1.0))
    v = -F * r / n
    return u, v


def _startup_radius(problem: ProblemSpec, a: float, lam: float, R_end: float) -> float:
    p, n = problem.p, problem.n
    F = lam * float(nl.eval_f(problem.nonlinearity, a))
    r0 = STARTUP_RADIUS * R_end
    if F > 0:
        coef = (p - 1.0) / p * (F / n) ** (1.0 / (p - 1.0))
        f_a = float(nl.eval_f(problem.nonlinearity, a))
        df_a = float(nl.eval_df(problem.nonlinearity, a))
        target = 1e-8 * min(1.0, f_a / df_a) if df_a > 0 else 1e-8
        r0 = min(r0, (target / coef) ** ((p - 1.0) / p))
    return r0


def _make_rhs(problem: ProblemSpec, lam: float):
    p, n = problem.p, problem.n
    spec = problem.nonlinearity
    expo = 1.0 / (p - 1.0)
    if spec.kind == "exponential":
        f = math.exp
    elif spec.kind == "power":
        m = spec.m
        f = lambda x: (1.0 + x) ** m
    else:
        m = spec.m
        f = lambda x: (1.0 - x) ** (-m)

    def rhs(t, y):
        r = math.exp(t)
        u, v = y
        dudt = -r * (-v) ** expo if v < 0 else r * v**expo
        return [dudt, -lam * r * f(u) - (n - 1.0) * v]

    return rhs


def _integrate(problem, a, lam, r0, r_end, t_eval, rtol, stop_at_zero=False):
    spec = problem.nonlinearity
    u0, v0 = startup_expansion(problem, a, lam, r0)
    events = []
    if stop_at_zero:
        zero = lambda t, y: y[0]
        zero.terminal = True
        zero.direction = -1
        events.append(zero)
    if spec.kind == "power":
        floor = lambda t, y: y[0] + 0.5
        floor.terminal = True
        events.append(floor)
    if spec.kind == "mems":
        quench = lambda t, y: y[0] - 1.0
        quench.terminal = True
        events.append(quench)
    sol = _sint.solve_ivp(
        _make_rhs(problem, lam),
        (math.log(r0), math.log(r_end)),
        [float(u0), float(v0)],
        method="DOP853",
        rtol=rtol,
        atol=[rtol * 1e-2 * max(1.0, abs(a)), 1e-300],
        t_eval=t_eval,
        dense_output=True,
        events=events or None,
    )
    if sol.status == -1:
        raise StiffnessError(f"integration failed at a={a}, lambda={lam}: {sol.message}")
    if spec.kind == "mems" and sol.t_events and sol.t_events[-1].size:
        raise QuenchError(f"profile reached u = 1 (a={a}, lambda={lam})")
    return sol


def shoot(problem: ProblemSpec, a: float, lam: float, N: int = DEFAULT_N, gamma: float | None = None,
          rtol: float = 1e-12, solver_tol: float = 1e-9) -> RadialSolution:
    """Integrate the initial value problem u(0) = a, u'(0) = 0 out to r = R.

    ``boundary_residual`` is u(R); it vanishes only when ``lam`` is on the branch.
    """
    if not a > 0:
        raise ParameterError("center value a must be positive")
    if problem.nonlinearity.kind == "mems" and a >= 1:
        raise QuenchError("mems center value must be below 1")
    if lam < 0:
        raise ParameterError("lambda must be nonnegative")
    grid = problem.grid(N, gamma)
    r = grid.nodes
    p, n = problem.p, problem.n
    if lam == 0:
        u = np.full_like(r, a)
        zeros = np.zeros_like(r)
        return RadialSolution(problem, 0.0, a, grid, u, zeros.copy(), zeros, a, solver_tol)

    r0 = _startup_radius(problem, a, lam, problem.R)
    head = r < r0
    t_eval = np.log(r[~head])
    t_eval[-1] = math.log(problem.R)
    sol = _integrate(problem, a, lam, r0, problem.R, t_eval, rtol)
    u = np.empty_like(r)
    v = np.empty_like(r)
    u[head], v[head] = startup_expansion(problem, a, lam, r[head])
    ok = sol.t.size
    tail_u = np.full(t_eval.size, np.nan)
    tail_v = np.full(t_eval.size, np.nan)
    tail_u[:ok], tail_v[:ok] = sol.y[0], sol.y[1]
    if ok < t_eval.size:
        # left the nonlinearity's domain before R; extend with the last state for the residual
        tail_u[ok:], tail_v[ok:] = sol.y_events[0][0][0], sol.y_events[0][0][1]
    u[~head], v[~head] = tail_u, tail_v
    du = phi_p_inv(v, p)
    w = r ** (n - 1.0) * v
    dense = _dense_evaluator(problem, a, lam, r0, sol.sol, p)
    return RadialSolution(problem, float(lam), float(a), grid, u, w, du, float(u[-1]), solver_tol, dense=dense)


def _dense_evaluator(problem, a, lam, r0, ode_sol, p):
    def evaluate(rr):
        rr = np.atleast_1d(np.asarray(rr, dtype=float))
        uu = np.empty_like(rr)
        vv = np.empty_like(rr)
        head = rr < r0
        uu[head], vv[head] = startup_expansion(problem, a, lam, rr[head])
        if np.any(~head):
            y = ode_sol(np.log(rr[~head]))
            uu[~head], vv[~head] = y[0], y[1]
        return uu, phi_p_inv(vv, p)

    return evaluate


def first_zero_scaled(problem: ProblemSpec, a: float, rtol: float = 1e-13) -> float:
    """First zero rho of the solution of -Delta_p U = f(U), U(0) = a.

    Rescaling gives the branch value lambda(a) = (rho / R)^p since
    u(r) = U(lambda^(1/p) r) solves the problem with parameter lambda.
    """
    r_end = 1e6
    r0 = _startup_radius(problem, a, 1.0, 1.0)
    sol = _integrate(problem, a, 1.0, r0, r_end, None, rtol, stop_at_zero=True)
    if not sol.t_events or sol.t_events[0].size == 0:
        raise BracketError(f"no zero of the scaled profile before r = {r_end:g} (a={a})")
    return float(math.exp(sol.t_events[0][0]))


def bracket_lambda(residual, lam_seed: float | None = None, cap: float = LAMBDA_CAP):
    """Bracket [lo, hi] with residual(lo) > 0 > residual(hi) by geometric growth."""
    if lam_seed is None or lam_seed <= 0:
        lo, hi = 0.0, 1.0
    else:
        lo, hi = lam_seed * (1 - 1e-6), lam_seed * (1 + 1e-6)
        while residual(lo) <= 0:
            lo *= 0.5
            if lo < 1e-300:
                lo = 0.0
                break
    while residual(hi) > 0:
        lo, hi = hi, 2.0 * hi
        if hi > cap:
            raise BracketError(f"no sign change of u(R) for lambda up to {cap:g}")
    return lo, hi


def solve_on_branch(problem: ProblemSpec, a: float, N: int = DEFAULT_N, gamma: float | None = None,
                    solver_tol: float = 1e-9, root_tol: float = 1e-10, rtol: float = 1e-12,
                    lam_seed: float | None = None):
    """Parameter lambda(a) and the solution with center value a and u(R) = 0.

    The scaled first zero supplies lambda directly; if the re-shot profile
    misses the boundary condition by more than ``solver_tol`` the value is
    refined by Brent's method on a bracket grown around the estimate.
    """
    if not a > 0:
        raise ParameterError("center value a must be positive")
    try:
        lam = first_zero_scaled(problem, a) ** problem.p / problem.R**problem.p
    except BracketError:
        lam = lam_seed
    if lam is not None:
        sol = shoot(problem, a, lam, N, gamma, rtol, solver_tol)
        if abs(sol.boundary_residual) < solver_tol:
            return lam, sol
    residual = lambda x: shoot(problem, a, x, 16, gamma, rtol).boundary_residual
    lo, hi = bracket_lambda(residual, lam if lam is not None else lam_seed)
    lam = brentq(residual, lo, hi, xtol=root_tol * max(1.0, hi), rtol=1e-15, maxiter=200)
    sol = shoot(problem, a, lam, N, gamma, rtol, solver_tol)
    return lam, sol


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _power_fit(f_half, f_full, r1):
    """Exponent alpha of c r^alpha through (r1/2, f_half) and (r1, f_full)."""
    if f_half <= 0 or f_full <= 0:
        return 1.0
    return math.log(f_full / f_half) / math.log(2.0)


def _as_callable(g, r):
    """Callable source from samples: log-log interpolation when positive, linear otherwise."""
    gv = np.asarray(g, dtype=float)
    if gv.shape != r.shape:
        raise ValueError("g must be sampled on the grid nodes")
    if not np.all(np.isfinite(gv)):
        raise DivergenceError("source term is not finite on the grid")
    if np.all(gv > 0):
        interp = PchipInterpolator(np.log(r), np.log(gv), extrapolate=True)
        return lambda x: np.exp(interp(np.log(x)))
    if not np.any(gv):
        return lambda x: np.zeros_like(np.asarray(x, dtype=float))
    interp = PchipInterpolator(r, gv, extrapolate=True)
    return lambda x: interp(x)


def solve_linear_rhs(problem: ProblemSpec, g, N: int = DEFAULT_N, gamma: float | None = None) -> RadialSolution:
    """Solve -Delta_p u = g(|x|) in B_R, u = 0 on the boundary, by two radial quadratures.

    ``g`` is a callable of r or an array sampled on the grid nodes (then
    interpolated). Both quadratures use 16-point Gauss-Legendre per grid
    interval in log r, nested for the inner flux integral; the cell [0, r_1] uses
    the power law through r_1/2 and r_1.
    """
    grid = problem.grid(N, gamma)
    r = grid.nodes
    p, n = problem.p, problem.n
    func = g if callable(g) else _as_callable(g, r)
    gv = np.asarray(func(r), dtype=float)
    if not np.all(np.isfinite(gv)):
        raise DivergenceError("source term is not finite on the grid")
    F = lambda x: x ** (n - 1.0) * np.asarray(func(x), dtype=float)

    r1 = r[0]
    f_half, f_full = F(np.array([0.5 * r1]))[0], F(np.array([r1]))[0]
    alpha = _power_fit(f_half, f_full, r1)
    if alpha <= -1.0:
        raise DivergenceError(f"r^(n-1) g behaves like r^{alpha:.4g} near 0 (not integrable)")
    G0 = f_full * r1 / (alpha + 1.0)

    # GL in log r: power laws become exponentials, which matters on the ratio-4 cells near 0
    lo, hi = r[:-1], r[1:]
    L = np.log(hi / lo)
    t = lo[:, None] * np.exp(0.5 * L[:, None] * (1.0 + _GL_X[None, :]))
    wt = 0.5 * L[:, None] * _GL_W[None, :] * t
    span = np.log(t / lo[:, None])
    inner = lo[:, None, None] * np.exp(0.5 * span[:, :, None] * (1.0 + _GL_X[None, None, :]))
    win = 0.5 * span[:, :, None] * _GL_W[None, None, :] * inner
    partial = np.sum(F(inner.ravel()).reshape(inner.shape) * win, axis=2)
    cells = np.sum(F(t.ravel()).reshape(t.shape) * wt, axis=1)
    G = np.concatenate([[G0], G0 + np.cumsum(cells)])
    Gt = G[:-1, None] + partial

    slope = phi_p_inv(r ** (1.0 - n) * G, p)
    slope_t = phi_p_inv(t ** (1.0 - n) * Gt, p)
    pieces = np.sum(slope_t * wt, axis=1)
    # u(r_i) = int_{r_i}^R slope
    u = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
    # slope ~ r^beta on [0, r_1] with beta = (alpha + 2 - n)/(p - 1)
    beta = (alpha + 1.0 - (n - 1.0)) / (p - 1.0)
    if slope[0] == 0.0:
        a = float(u[0])
    else:
        a = float(u[0] + slope[0] * r1 / (beta + 1.0)) if beta > -1.0 else float("inf")
    du = -slope
    w = -G
    return RadialSolution(problem, float("nan"), a, grid, u, w, du, float(u[-1]), 0.0, rhs=gv)


@dataclass(frozen=True)
class SingularOracle:
    """Closed-form singular solution u_s = -p log r with parameter lambda_s = p^(p-1)(n-p)."""

    lam: float
    n_c: float
    r: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)


def singular_lambda(p: float, n: float) -> float:
    return p ** (p - 1.0) * (n - p)


def singular_oracle(problem: ProblemSpec, N: int = DEFAULT_N, gamma: float | None = None) -> SingularOracle:
    if problem.nonlinearity.kind != "exponential":
        raise ParameterError("the singular oracle exists for the exponential nonlinearity only")
    if problem.R != 1.0:
        raise ParameterError("the singular oracle is stated on the unit ball")
    if not problem.n > problem.p:
        raise ParameterError("singular solution requires n > p")
    r = problem.grid(N, gamma).nodes
    return SingularOracle(singular_lambda(problem.p, problem.n), problem.n_c, r, -problem.p * np.log(r))


def singular_solution(problem: ProblemSpec, N: int = DEFAULT_N, gamma: float | None = None) -> RadialSolution:
    """The singular oracle packaged as a RadialSolution (a = inf)."""
    orc = singular_oracle(problem, N, gamma)
    p, n = problem.p, problem.n
    r = orc.r
    du = -p / r
    w = r ** (n - 1.0) * phi_p(du, p)

    def evaluate(rr):
        rr = np.asarray(rr, dtype=float)
        return -p * np.log(rr), -p / rr

    return RadialSolution(problem, orc.lam, float("inf"), problem.grid(N, gamma), orc.u, w, du, float(orc.u[-1]),
                          0.0, dense=evaluate)


def flux_residual(problem: ProblemSpec, lam: float, u_func: Callable, r) -> np.ndarray:
    """Relative residual of the integrated flux equation for a closed-form profile.

    For each radius compares w(r) = r^(n-1) phi_p(u'(r)) with
    -lambda int_0^r s^(n-1) f(u(s)) ds. ``u_func`` must accept complex
    arguments; u' is taken by complex-step differentiation and the
    integral by adaptive quadrature, so neither side uses the other.
    """
    p, n = problem.p, problem.n
    spec = problem.nonlinearity
    r = np.atleast_1d(np.asarray(r, dtype=float))
    h = 1e-30
    du = np.array([np.imag(u_func(complex(x, h * x))) / (h * x) for x in r])
    w = r ** (n - 1.0) * phi_p(du, p)
    integrand = lambda s: s ** (n - 1.0) * float(nl.eval_f(spec, float(np.real(u_func(s)))))
    acc, left = 0.0, 0.0
    out = np.empty_like(r)
    for i, x in enumerate(r):
        acc += _sint.quad(integrand, left, x, epsabs=0.0, epsrel=1e-13, limit=200)[0]
        left = x
        out[i] = abs(w[i] + lam * acc) / abs(lam * acc)
    return out
