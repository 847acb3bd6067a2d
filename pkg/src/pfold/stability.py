"""First eigenvalue of the linearised operator at a radial solution.

For radial test functions the second variation reduces to

    Q(v) = int (p-1)|u'|^(p-2) v'^2 - lambda f'(u) v^2    (measure r^(n-1) dr),

and mu_1 is the smallest eigenvalue of -(w_s v')' - w_q v = mu w_m v with
v(R) = 0 and a natural condition at the origin. The common factor
omega_{n-1} is dropped from all three weights. Radial test functions only
bound the full first eigenvalue from above; the first eigenfunction of a
radial semistable solution is assumed radial.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from . import nonlinearity as nl
from .errors import ParameterError, ToleranceError
from .quadrature import integrate
from .radial_ode import ProblemSpec, RadialSolution, singular_solution


@dataclass
class StabilityReport:
    """First radial eigenvalue of the linearisation.

    ``mu1`` is Richardson-extrapolated from the grids with N and N/2
    intervals; ``mu1_discrete`` is the eigenvalue of the fine-grid pencil,
    whose Rayleigh quotient the returned eigenfunction attains.
    """

    mu1: float
    mu1_discrete: float
    mu1_coarse: float
    eigenfunction: np.ndarray = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    discretization_size: int
    weight_integral: float
    sign_changes: int

    def to_dict(self) -> dict:
        return {
            "mu1": self.mu1,
            "mu1_discrete": self.mu1_discrete,
            "mu1_coarse": self.mu1_coarse,
            "discretization_size": self.discretization_size,
            "weight_integral": self.weight_integral,
            "sign_changes": self.sign_changes,
        }


def _weights_at(solution: RadialSolution, r, u, du):
    p, n = solution.problem.p, solution.problem.n
    rn = r ** (n - 1.0)
    ws = rn.copy() if p == 2.0 else (p - 1.0) * np.abs(du) ** (p - 2.0) * rn
    wq = solution.lam * np.asarray(nl.eval_df(solution.problem.nonlinearity, u)) * rn
    return ws, wq, rn


def radial_form_weights(solution: RadialSolution):
    """Stiffness, potential and mass weights of the radial quadratic form on the nodes."""
    return _weights_at(solution, solution.r, solution.u, solution.du)


def weight_integral(solution: RadialSolution) -> float:
    """int_B |grad u|^(p-2) dx.

    Near the center |u'|^(p-2) ~ r^((p-2)/(p-1)), so the integral is
    finite iff n > (2-p)/(p-1); otherwise DivergenceError is raised.
    """
    p = solution.problem.p
    return integrate(solution.grid, np.abs(solution.du) ** (p - 2.0)).value


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def _power_moments(c, alpha, r1):
    """int_0^r1 c r^alpha phi_i phi_j for the two hat functions of the cell [0, r1]."""
    base = c * r1 ** (alpha + 1.0)
    right = base / (alpha + 3.0)
    cross = base * (1.0 / (alpha + 2.0) - 1.0 / (alpha + 3.0))
    left = base * (1.0 / (alpha + 1.0) - 2.0 / (alpha + 2.0) + 1.0 / (alpha + 3.0))
    return left, cross, right, base / (alpha + 1.0)


def _origin_fit(values_half, values_full, r1):
    """Power law c r^alpha through samples at r1/2 and r1."""
    if values_full == 0 or values_half == 0:
        return 0.0, 1.0
    alpha = np.log(values_full / values_half) / np.log(2.0)
    return values_full / r1**alpha, alpha


class Pencil(NamedTuple):
    diag: np.ndarray
    off: np.ndarray
    mass: np.ndarray
    singular_weight: bool = False


def assemble(solution: RadialSolution, nodes=None) -> Pencil:
    """Tridiagonal P1 pencil on [0, r_1, ..., r_N] with the Dirichlet node r_N eliminated.

    Stiffness and potential use consistent element matrices, integrated by
    8-point Gauss-Legendre against the solution's own evaluator, with an
    exact power-law rule on the cell touching the origin. The mass is
    lumped, which keeps the pencil reducible to a symmetric tridiagonal.
    The pencil acts on nodes 0..N-1. ``singular_weight`` flags a stiffness
    weight that is not integrable at the origin (n <= (2-p)/(p-1)); the
    origin cell then gets zero stiffness and the pencil is not usable.
    """
    r = solution.r if nodes is None else np.asarray(nodes, dtype=float)
    x = np.concatenate([[0.0], r])
    h = np.diff(x)
    m = x.size - 1
    r1 = r[0]

    left, right = x[1:-1], x[2:]
    hh = h[1:]
    pts = 0.5 * (left + right)[:, None] + 0.5 * hh[:, None] * _GL_X[None, :]
    u, du = solution.evaluate(pts.ravel())
    ws, wq, wm = (w.reshape(pts.shape) for w in _weights_at(solution, pts.ravel(), u, du))
    gw = 0.5 * hh[:, None] * _GL_W[None, :]
    phi_r = (pts - left[:, None]) / hh[:, None]
    phi_l = 1.0 - phi_r

    S = np.empty(h.size)
    qll, qlr, qrr = np.empty(h.size), np.empty(h.size), np.empty(h.size)
    mll, mrr = np.empty(h.size), np.empty(h.size)
    S[1:] = np.sum(gw * ws, axis=1)
    qll[1:] = np.sum(gw * wq * phi_l**2, axis=1)
    qlr[1:] = np.sum(gw * wq * phi_l * phi_r, axis=1)
    qrr[1:] = np.sum(gw * wq * phi_r**2, axis=1)
    mll[1:] = np.sum(gw * wm * phi_l, axis=1)
    mrr[1:] = np.sum(gw * wm * phi_r, axis=1)

    uh, duh = solution.evaluate(np.array([0.5 * r1, r1]))
    wh = _weights_at(solution, np.array([0.5 * r1, r1]), uh, duh)
    c_s, alpha_s = _origin_fit(wh[0][0], wh[0][1], r1)
    # stiffness weight not integrable at 0: the origin cell carries no finite energy
    singular = bool(alpha_s <= -1.0)
    S[0] = 0.0 if singular else _power_moments(c_s, alpha_s, r1)[3]
    qll[0], qlr[0], qrr[0], _ = _power_moments(*_origin_fit(wh[1][0], wh[1][1], r1), r1)
    ml, mc, mr, mt = _power_moments(*_origin_fit(wh[2][0], wh[2][1], r1), r1)
    mll[0], mrr[0] = mt - (mr + mc), mr + mc

    diag = np.zeros(x.size)
    diag[:-1] += S / h**2 - qll
    diag[1:] += S / h**2 - qrr
    off = -S / h**2 - qlr
    mass = np.zeros(x.size)
    mass[:-1] += mll
    mass[1:] += mrr
    return Pencil(diag[:m], off[: m - 1], mass[:m], singular)


_BISECTION_TOL = 1e-13


def _smallest(diag, off, mass):
    scale = 1.0 / np.sqrt(mass)
    d = diag * scale**2
    e = off * scale[:-1] * scale[1:]
    vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, 0), lapack_driver="stebz", tol=_BISECTION_TOL)
    y = vecs[:, 0]
    v = y * scale
    return float(vals[0]), v


def _discrete_mu1(solution, nodes=None):
    pencil = assemble(solution, nodes)
    mu, v = _smallest(pencil.diag, pencil.off, pencil.mass)
    return mu, v, pencil


def rayleigh_quotient(pencil, v) -> float:
    """Quotient of a nodal vector on the pencil's unknowns."""
    diag, off, mass = pencil[:3]
    num = np.dot(diag, v * v) + 2.0 * np.dot(off, v[:-1] * v[1:])
    return float(num / np.dot(mass, v * v))


def _sign_changes(v):
    big = v[np.abs(v) > 1e-10 * np.max(np.abs(v))]
    return int(np.count_nonzero(np.diff(np.sign(big)) != 0))


def mu1(solution: RadialSolution, boundary: str = "dirichlet") -> StabilityReport:
    """Smallest radial eigenvalue of the linearised operator (Sturm bisection, Richardson over N and N/2)."""
    if boundary.lower() != "dirichlet":
        raise ParameterError("only Dirichlet boundary conditions are supported")
    if solution.grid.N < 512:
        raise ParameterError("eigenvalue solve needs a grid with at least 512 intervals")
    r = solution.r
    fine, v, pencil = _discrete_mu1(solution)
    if pencil.singular_weight:
        p, n = solution.problem.p, solution.problem.n
        raise ParameterError(f"|u'|^(p-2) r^(n-1) is not integrable at 0 for p = {p:g}, n = {n:g} "
                             f"(needs n > (2-p)/(p-1) = {(2 - p) / (p - 1):g}); the radial form is undefined")
    coarse = _discrete_mu1(solution, r[1::2])[0]
    v = v / np.sqrt(np.dot(pencil.mass, v * v))
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    rq = rayleigh_quotient(pencil, v)
    if abs(rq - fine) > 1e-8 * max(1.0, abs(fine)):
        raise ToleranceError(f"eigenvector does not reproduce its eigenvalue ({rq} vs {fine})", achieved=abs(rq - fine))
    eig = np.concatenate([v, [0.0]])
    return StabilityReport(
        mu1=(4.0 * fine - coarse) / 3.0,
        mu1_discrete=fine,
        mu1_coarse=coarse,
        eigenfunction=eig,
        nodes=np.concatenate([[0.0], r]),
        discretization_size=solution.grid.N,
        weight_integral=weight_integral(solution) if np.isfinite(solution.a) else float("nan"),
        sign_changes=_sign_changes(v),
    )


def quadratic_form(solution: RadialSolution, v) -> float:
    """Discrete Rayleigh quotient of a nodal test function v on [0, r_1, ..., r_N] with v(R) = 0."""
    pencil = assemble(solution)
    return rayleigh_quotient(pencil, np.asarray(v, dtype=float)[:-1])


def singular_mu1(p: float, n: float, N: int = 1024) -> float:
    problem = ProblemSpec(p, n, nl.NonlinearitySpec.exponential())
    return mu1(singular_solution(problem, N)).mu1


@dataclass(frozen=True)
class ThresholdScan:
    n_star: float
    n_formula: float
    deviation: float
    evaluations: tuple

    def to_dict(self) -> dict:
        return {
            "n_star": self.n_star,
            "n_formula": self.n_formula,
            "deviation": self.deviation,
            "evaluations": [list(e) for e in self.evaluations],
        }


def stability_threshold_scan(p: float, n_range=None, N: int = 1024, xtol: float = 1e-3) -> ThresholdScan:
    """Dimension where mu_1 of the singular exponential solution changes sign."""
    n_formula = p + 4.0 * p / (p - 1.0)
    lo, hi = n_range if n_range is not None else (p + 2.0, n_formula + 6.0)
    seen = []

    def signed(n):
        val = singular_mu1(p, n, N)
        seen.append((float(n), val))
        return val

    f_lo, f_hi = signed(lo), signed(hi)
    if not (f_lo < 0 < f_hi):
        raise ParameterError(f"mu_1 does not change sign on [{lo}, {hi}] ({f_lo:.3g}, {f_hi:.3g})")
    n_star = brentq(signed, lo, hi, xtol=xtol)
    return ThresholdScan(float(n_star), n_formula, float(n_star - n_formula), tuple(seen))
