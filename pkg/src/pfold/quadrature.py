"""Graded radial grids, weighted radial integrals and level-set geometry.

Integrals of radial functions over balls are reduced to

    int_{B_R} phi(|x|) dx = int_0^R phi(r) omega_{n-1} r^(n-1) dr

for any real dimension n >= 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate as _sint
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq
from scipy.special import gammaln

from .errors import DivergenceError, InvariantError, ParameterError

DEFAULT_N = 1024


def surface_area(n: float) -> float:
    """Area omega_{n-1} = 2 pi^(n/2) / Gamma(n/2) of the unit sphere in R^n."""
    if n < 2:
        raise ParameterError(f"dimension must be >= 2, got {n}")
    return float(2.0 * np.exp(0.5 * n * np.log(np.pi) - gammaln(0.5 * n)))


def ball_volume(n: float, R: float = 1.0) -> float:
    return surface_area(n) * R**n / n


def default_grading(p: float) -> float:
    pp = p / (p - 1.0)
    return max(2.0, pp / (pp - 1.0))


@dataclass(frozen=True)
class RadialGrid:
    """Graded nodes r_i = R (i/N)^gamma, i = 1..N, on the ball of radius R in real dimension n."""

    N: int
    gamma: float
    R: float
    n: float

    def __post_init__(self):
        if self.N < 8:
            raise ParameterError("grid needs at least 8 intervals")
        if self.gamma < 1:
            raise ParameterError("grading exponent must be >= 1")
        if self.R <= 0:
            raise ParameterError("radius must be positive")
        if self.n < 2:
            raise ParameterError("dimension must be >= 2")

    @property
    def nodes(self) -> np.ndarray:
        i = np.arange(1, self.N + 1, dtype=float)
        return self.R * (i / self.N) ** self.gamma

    @property
    def volume(self) -> float:
        return ball_volume(self.n, self.R)

    def coarsened(self) -> "RadialGrid":
        if self.N % 2:
            raise ParameterError("only grids with even N can be coarsened")
        return RadialGrid(self.N // 2, self.gamma, self.R, self.n)


class Integral(NamedTuple):
    value: float
    error: float


def _power_law_head(r1, r2, F1, F2):
    """Integral of F over [0, r1] assuming F ~ c r^alpha fitted through two nodes."""
    if F1 == 0.0:
        return 0.0, 0.0, np.inf
    if F2 == 0.0 or np.sign(F1) != np.sign(F2):
        # no usable power law; fall back to a linear ramp through the origin
        return 0.5 * r1 * F1, abs(0.5 * r1 * F1), 1.0
    alpha = np.log(F2 / F1) / np.log(r2 / r1)
    if alpha <= -1.0:
        raise DivergenceError(f"integrand behaves like r^{alpha:.4g} near 0 (not integrable)")
    head = F1 * r1 / (alpha + 1.0)
    return head, 0.0, alpha


def origin_head(r, F) -> float:
    """Integral of F over [0, r[0]] for the power law through the first two samples."""
    return float(_power_law_head(r[0], r[1], F[0], F[1])[0])


def integrate_samples(r, F, include_origin: bool = True) -> Integral:
    """Integral of samples F over [0 or r[0], r[-1]] with an error estimate.

    The body uses composite Simpson on the (possibly nonuniform) nodes; the
    error estimate is the Simpson/trapezoid discrepancy, an upper bound for
    the Simpson error on resolved integrands. With ``include_origin`` the
    panel [0, r[0]] is integrated exactly for the power law through the
    first two samples.
    """
    r = np.asarray(r, dtype=float)
    F = np.asarray(F, dtype=float)
    if r.size != F.size:
        raise ValueError("samples and nodes differ in length")
    if not np.all(np.isfinite(F)):
        raise DivergenceError("integrand is not finite on the nodes")
    head, head_err = 0.0, 0.0
    if include_origin and r.size >= 2 and r[0] > 0:
        head, head_err, alpha = _power_law_head(r[0], r[1], F[0], F[1])
        # the fit uses two samples; compare with the fit through nodes 2 and 3
        if r.size >= 3 and F[1] != 0 and F[2] != 0 and np.sign(F[1]) == np.sign(F[2]) and np.isfinite(alpha):
            alpha2 = np.log(F[2] / F[1]) / np.log(r[2] / r[1])
            if alpha2 > -1:
                head_err = max(head_err, abs(head - F[0] * r[0] / (alpha2 + 1.0)))
    if r.size < 2:
        return Integral(head, head_err)
    if r.size == 2:
        trap = 0.5 * (r[1] - r[0]) * (F[0] + F[1])
        return Integral(head + trap, head_err + abs(trap) * 1e-2)
    simpson = _sint.simpson(F, x=r)
    trap = _sint.trapezoid(F, x=r)
    return Integral(float(head + simpson), float(head_err + abs(simpson - trap)))


def integrate(grid: RadialGrid, values) -> Integral:
    """int_0^R phi(r) omega_{n-1} r^(n-1) dr for phi sampled on the grid nodes."""
    r = grid.nodes
    values = np.asarray(values, dtype=float)
    if values.shape != r.shape:
        raise ValueError("values must be sampled on the grid nodes")
    w = surface_area(grid.n)
    return integrate_samples(r, values * w * r ** (grid.n - 1.0))


def radial_weight(r, n):
    return surface_area(n) * np.asarray(r, dtype=float) ** (n - 1.0)


class LevelCut(NamedTuple):
    radius: float
    empty: bool


def monotone_profile(r, u, center: float | None = None) -> PchipInterpolator:
    """Monotone cubic interpolant of a decreasing profile, anchored at r = 0 when the center value is known."""
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    if center is not None and r[0] > 0:
        r = np.concatenate([[0.0], r])
        u = np.concatenate([[center], u])
    if np.any(np.diff(u) > 0):
        raise InvariantError("profile is not decreasing")
    return PchipInterpolator(r, u, extrapolate=False)


def level_radius(r, u, s: float, center: float | None = None) -> LevelCut:
    """Radius r_s with u(r_s) = s for a decreasing profile.

    {u > s} is the ball r < r_s. For s at or above the supremum the
    superlevel set is empty and r_s = 0 is returned with the flag set.
    """
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    # ties are allowed: near the center the profile is flat to rounding
    if np.any(np.diff(u) > 0):
        raise InvariantError("profile is not decreasing")
    top = u[0] if center is None else center
    if s >= top:
        return LevelCut(0.0, True)
    if s <= u[-1]:
        return LevelCut(float(r[-1]), False)
    k = int(np.searchsorted(-u, -s))
    # u[k-1] > s >= u[k]
    if u[k] == s:
        return LevelCut(float(r[k]), False)
    interp = monotone_profile(r, u, center)
    lo = r[k - 1] if k > 0 else 0.0
    hi = r[k]
    if center is None and k == 0:
        return LevelCut(float(r[0]), False)
    root = brentq(lambda x: float(interp(x)) - s, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return LevelCut(float(root), False)


@dataclass(frozen=True)
class LevelSetGeometry:
    """Curvature data of the level sphere of a radial function through radius r."""

    H: float
    B2: float
    tangential_grad_speed: float = 0.0

    def satisfies_curvature_bound(self, n: float) -> bool:
        return (n - 1.0) * self.H**2 <= self.B2 * (1.0 + 1e-14)


def level_set_geometry(r: float, n: float) -> LevelSetGeometry:
    """Level sets of radial functions are spheres: H = 1/r and |B|^2 = (n-1)/r^2."""
    return LevelSetGeometry(H=1.0 / r, B2=(n - 1.0) / r**2, tangential_grad_speed=0.0)
