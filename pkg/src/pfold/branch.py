"""Minimal-branch tracing in the center value a, fold location and lambda* estimation."""

from __future__ import annotations

import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit, minimize_scalar

from .errors import PFoldError
from .quadrature import DEFAULT_N
from .radial_ode import ProblemSpec, RadialSolution, first_zero_scaled, solve_on_branch

log = logging.getLogger(__name__)

# relative spread of lambda values below which two branch values are indistinguishable
LAMBDA_NOISE = 1e-11


@dataclass
class BranchPoint:
    a: float
    lam: float
    solution: RadialSolution | None = field(default=None, repr=False)
    mu1: float | None = None
    estimates: dict | None = field(default=None, repr=False)
    failure: str | None = None

    @property
    def sup_norm(self) -> float:
        return self.a


@dataclass
class Branch:
    problem: ProblemSpec
    points: list
    fold: tuple | None = None
    lambda_star_estimate: float = float("nan")
    method: str = "none"
    monotone_tail: bool = False
    diagnostics: dict = field(default_factory=dict)

    @property
    def ok_points(self):
        return [pt for pt in self.points if pt.failure is None]

    def minimal_points(self):
        """Points on the stable side of the first fold (all points for a monotone branch)."""
        pts = self.ok_points
        if self.fold is None:
            return pts
        return [pt for pt in pts if pt.a <= self.fold[0] * (1 + 1e-12)]

    def to_dict(self) -> dict:
        return {
            "problem": self.problem.to_dict(),
            "fold": None if self.fold is None else {"a": self.fold[0], "lambda": self.fold[1]},
            "lambda_star_estimate": self.lambda_star_estimate,
            "method": self.method,
            "monotone_tail": self.monotone_tail,
            "diagnostics": self.diagnostics,
            "points": [
                {"a": pt.a, "lambda": pt.lam, "sup_norm": pt.sup_norm, "mu1": pt.mu1, "failure": pt.failure}
                for pt in self.points
            ],
        }


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("PFOLD_THREADS", "1")))
    except ValueError:
        return 1


def _lambda_of(problem: ProblemSpec, a: float) -> float:
    return first_zero_scaled(problem, a) ** problem.p / problem.R**problem.p


def _solve_point(problem, a, N, gamma, tolerances, lam_seed=None) -> BranchPoint:
    try:
        lam, sol = solve_on_branch(problem, a, N=N, gamma=gamma, lam_seed=lam_seed, **tolerances)
        return BranchPoint(a=float(a), lam=float(lam), solution=sol)
    except PFoldError as exc:
        log.warning("branch point a=%g failed: %s", a, exc)
        return BranchPoint(a=float(a), lam=float("nan"), failure=f"{type(exc).__name__}: {exc}")


def _first_fold_index(lams):
    """Index of the first interior maximum of lambda(a) that stands above the noise floor."""
    for k in range(1, len(lams) - 1):
        tau = LAMBDA_NOISE * max(1.0, abs(lams[k]))
        if lams[k] >= lams[k - 1] - tau and lams[k] - lams[k + 1] > tau:
            return k
    return None


def _tail_model(a, lam_inf, c, beta):
    return lam_inf - c * a ** (-beta)


def tail_extrapolation(a, lam):
    """Fit lambda(a) = lambda_inf - c a^(-beta) over the last decade of a.

    Returns (lambda_inf, diagnostics). A tail already flat to the noise
    floor is reported as converged without fitting.
    """
    a = np.asarray(a, dtype=float)
    lam = np.asarray(lam, dtype=float)
    sel = a >= a[-1] / 10.0
    if np.count_nonzero(sel) < 4:
        sel = slice(max(0, a.size - 4), None)
    ta, tl = a[sel], lam[sel]
    top = float(np.max(lam))
    spread = float(np.max(tl) - np.min(tl))
    if spread <= LAMBDA_NOISE * max(1.0, abs(top)) * 10:
        return top, {"fit": "converged", "spread": spread, "points": int(ta.size)}
    scale = ta[-1]
    x = ta / scale
    c0 = max(tl[-1] - tl[0], 1e-12)
    try:
        params, _ = curve_fit(
            _tail_model, x, tl, p0=(top, c0, 1.0),
            bounds=([top - 1e-12 * abs(top), 0.0, 1e-3], [np.inf, np.inf, 60.0]), maxfev=20000,
        )
        lam_inf, c, beta = (float(v) for v in params)
        resid = float(np.max(np.abs(_tail_model(x, *params) - tl)))
        return max(lam_inf, top), {"fit": "power", "c": c * scale**beta, "beta": beta,
                                   "max_residual": resid, "points": int(ta.size)}
    except (RuntimeError, ValueError) as exc:
        return top, {"fit": "failed", "reason": str(exc), "points": int(ta.size)}


def trace(problem: ProblemSpec, a_min: float, a_max: float, steps: int = 32, refine: bool = True,
          N: int = DEFAULT_N, gamma: float | None = None, tolerances: dict | None = None,
          workers: int | None = None) -> Branch:
    """Sweep solve_on_branch over a geometric grid of center values and locate the first fold."""
    if not 0 < a_min < a_max:
        raise ValueError("need 0 < a_min < a_max")
    if steps < 16:
        raise ValueError("need at least 16 sweep steps")
    tolerances = dict(tolerances or {})
    a_grid = np.geomspace(a_min, a_max, steps)
    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(lambda a: _solve_point(problem, a, N, gamma, tolerances), a_grid))
    else:
        points, seed = [], None
        for a in a_grid:
            pt = _solve_point(problem, a, N, gamma, tolerances, lam_seed=seed)
            seed = pt.lam if pt.failure is None else seed
            points.append(pt)

    good = [pt for pt in points if pt.failure is None]
    branch = Branch(problem, points)
    if not good:
        return branch
    lams = [pt.lam for pt in good]
    k = _first_fold_index(lams)
    if k is not None:
        lo, mid, hi = good[k - 1].a, good[k].a, good[k + 1].a
        a_fold, lam_fold = mid, lams[k]
        if refine:
            res = minimize_scalar(lambda a: -_lambda_of(problem, a), bracket=(lo, mid, hi),
                                  method="golden", tol=1e-5)
            a_fold, lam_fold = float(res.x), float(-res.fun)
        fold_pt = _solve_point(problem, a_fold, N, gamma, tolerances)
        if fold_pt.failure is None:
            branch.points.append(fold_pt)
            branch.points.sort(key=lambda pt: pt.a)
            lam_fold = max(lam_fold, fold_pt.lam)
        branch.fold = (float(a_fold), float(lam_fold))
        branch.lambda_star_estimate = float(max(lam_fold, max(lams)))
        branch.method = "fold-max"
        branch.diagnostics = {"bracket": [lo, hi], "refined": refine}
    else:
        increasing = all(lams[i + 1] >= lams[i] - LAMBDA_NOISE * max(1.0, lams[i]) for i in range(len(lams) - 1))
        branch.monotone_tail = bool(increasing)
        lam_inf, diag = tail_extrapolation([pt.a for pt in good], lams)
        branch.lambda_star_estimate = float(lam_inf)
        branch.method = "tail-extrapolation"
        branch.diagnostics = diag
    return branch


@dataclass
class ExtremalProfile:
    solution: RadialSolution
    point: BranchPoint
    singular_gap: float | None = None
    warning: str | None = None


def extremal_profile(branch: Branch, gap_window=(0.05, 1.0)) -> ExtremalProfile:
    """Branch solution standing in for u*: the fold point, or the last point of a monotone tail."""
    pts = [pt for pt in branch.ok_points if pt.solution is not None]
    if not pts:
        raise PFoldError("branch has no converged points")
    if len(pts) == 1:
        msg = "branch has a single point; returning it as the extremal stand-in"
        warnings.warn(msg, stacklevel=2)
        return ExtremalProfile(pts[0].solution, pts[0], warning=msg)
    if branch.fold is not None:
        target = branch.fold[0]
        minimal = [pt for pt in pts if pt.a <= target * (1 + 1e-12)] or pts
        pt = min(minimal, key=lambda q: abs(q.a - target))
        return ExtremalProfile(pt.solution, pt)
    pt = pts[-1]
    return ExtremalProfile(pt.solution, pt, singular_gap=singular_gap(pt.solution, gap_window))


def singular_gap(solution: RadialSolution, window=(0.05, 1.0)) -> float | None:
    """sup |u(r) - (-p log r)| over the window, when the singular oracle exists."""
    pr = solution.problem
    if pr.nonlinearity.kind != "exponential" or pr.R != 1.0 or not pr.n > pr.p:
        return None
    r = solution.r
    sel = (r >= window[0]) & (r <= window[1])
    return float(np.max(np.abs(solution.u[sel] + pr.p * np.log(r[sel]))))
