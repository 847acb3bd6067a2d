"""Reaction-term plugins f(u), the psi-transform and its integrals.

Three reaction terms are supported::

    exponential   f(t) = e^t
    power         f(t) = (1 + t)^m,    m > p - 1
    mems          f(t) = (1 - t)^(-m), m > 0, t < 1

All evaluators accept scalars or arrays and return numpy values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError, ParameterError, ToleranceError

KINDS = ("exponential", "power", "mems")

# Gauss-Legendre nodes for the panelled g(t) evaluation.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class NonlinearitySpec:
    """Immutable description of a reaction term f."""

    kind: str
    m: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown nonlinearity kind {self.kind!r}")
        if self.kind == "exponential":
            if self.m is not None:
                raise ParameterError("exponential nonlinearity takes no exponent")
        else:
            if self.m is None:
                raise ParameterError(f"{self.kind} nonlinearity needs an exponent m")
            if self.kind == "mems" and not self.m > 0:
                raise ParameterError("mems exponent must satisfy m > 0")

    @classmethod
    def exponential(cls) -> "NonlinearitySpec":
        return cls("exponential")

    @classmethod
    def power(cls, m: float) -> "NonlinearitySpec":
        return cls("power", float(m))

    @classmethod
    def mems(cls, m: float) -> "NonlinearitySpec":
        return cls("mems", float(m))

    def validate_for(self, p: float) -> None:
        """Check the exponent restriction that depends on p."""
        if self.kind == "power" and not self.m > p - 1:
            raise ParameterError(f"power nonlinearity needs m > p - 1 = {p - 1:g}, got m = {self.m:g}")

    @property
    def f0(self) -> float:
        return 1.0

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.m is not None:
            out["m"] = self.m
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "NonlinearitySpec":
        return cls(str(data["kind"]).lower(), None if data.get("m") is None else float(data["m"]))


def _check_domain(spec: NonlinearitySpec, t):
    t = np.asarray(t, dtype=float)
    if spec.kind == "mems" and np.any(t >= 1.0):
        raise DomainError("mems nonlinearity is only defined for t < 1")
    if spec.kind == "power" and np.any(t <= -1.0):
        raise DomainError("power nonlinearity is only defined for t > -1")
    return t


def _evaluate(values):
    values = np.asarray(values)
    return values[()] if values.ndim == 0 else values


def eval_f(spec: NonlinearitySpec, t):
    t = _check_domain(spec, t)
    with np.errstate(over="raise"):
        if spec.kind == "exponential":
            out = np.exp(t)
        elif spec.kind == "power":
            out = (1.0 + t) ** spec.m
        else:
            out = (1.0 - t) ** (-spec.m)
    return _evaluate(out)


def eval_df(spec: NonlinearitySpec, t):
    t = _check_domain(spec, t)
    with np.errstate(over="raise"):
        if spec.kind == "exponential":
            out = np.exp(t)
        elif spec.kind == "power":
            out = spec.m * (1.0 + t) ** (spec.m - 1.0)
        else:
            out = spec.m * (1.0 - t) ** (-spec.m - 1.0)
    return _evaluate(out)


def f_minus_f0(spec: NonlinearitySpec, t):
    """f(t) - f(0) without cancellation for small t."""
    t = _check_domain(spec, t)
    with np.errstate(over="raise"):
        if spec.kind == "exponential":
            out = np.expm1(t)
        elif spec.kind == "power":
            out = np.expm1(spec.m * np.log1p(t))
        else:
            out = np.expm1(-spec.m * np.log1p(-t))
    return _evaluate(out)


def _check_p(p):
    if not 1.0 < p <= 2.0:
        raise ParameterError(f"p must lie in (1, 2], got {p!r}")


def psi(spec: NonlinearitySpec, p: float, t):
    """psi(t) = (f(t) - f(0))^(1/(p-1)) for t >= 0."""
    _check_p(p)
    d = f_minus_f0(spec, np.maximum(t, 0.0))
    return _evaluate(np.power(d, 1.0 / (p - 1.0)))


def dpsi(spec: NonlinearitySpec, p: float, t):
    """Exact derivative of psi."""
    _check_p(p)
    t = np.maximum(t, 0.0)
    d = np.asarray(f_minus_f0(spec, t))
    e = 1.0 / (p - 1.0) - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        base = np.where(d > 0, np.power(np.where(d > 0, d, 1.0), e), 1.0 if e == 0 else 0.0)
    return _evaluate(base * eval_df(spec, t) / (p - 1.0))


def _quad_checked(func, a, b, tol):
    value, err = integrate.quad(func, a, b, epsabs=tol, epsrel=1e-12, limit=400)
    if not np.isfinite(value) or err > max(tol, 1e-10 * abs(value)):
        raise ToleranceError(f"quadrature on [{a}, {b}] did not converge (error {err:.3e})", achieved=err)
    return value


def g_integral(spec: NonlinearitySpec, p: float, t: float, tol: float = 1e-10) -> float:
    """g(t) = int_0^t psi'(s)^2 ds by adaptive quadrature."""
    _check_p(p)
    if t < 0:
        raise ParameterError("g is defined for t >= 0")
    if t == 0:
        return 0.0
    return _quad_checked(lambda s: float(dpsi(spec, p, s)) ** 2, 0.0, float(t), tol)


def h_integral(spec: NonlinearitySpec, p: float, t: float, tol: float = 1e-10) -> float:
    """h(t) = int_0^t (psi'(t) - psi'(s)) psi'(s) ds, evaluated as psi'(t) psi(t) - g(t)."""
    if t == 0:
        return 0.0
    return float(dpsi(spec, p, t)) * float(psi(spec, p, t)) - g_integral(spec, p, t, tol)


def g_values(spec: NonlinearitySpec, p: float, t, tol: float = 1e-10) -> np.ndarray:
    """Vectorised g over an array of nonnegative arguments.

    Sorted arguments are chained panel by panel: a 16-point Gauss-Legendre
    rule on panels well separated from 0, adaptive quadrature otherwise.
    """
    _check_p(p)
    t = np.asarray(t, dtype=float)
    flat = np.maximum(t.ravel(), 0.0)
    knots = np.unique(flat)
    cumulative = np.zeros_like(knots)
    left, acc = 0.0, 0.0
    for k, right in enumerate(knots):
        if right > left:
            width = right - left
            if left >= width:
                s = 0.5 * (left + right) + 0.5 * width * _GL_X
                acc += 0.5 * width * float(np.dot(_GL_W, np.asarray(dpsi(spec, p, s)) ** 2))
            else:
                acc += _quad_checked(lambda s: float(dpsi(spec, p, s)) ** 2, left, right, tol)
        cumulative[k] = acc
        left = right
    return cumulative[np.searchsorted(knots, flat)].reshape(t.shape)


def h_values(spec: NonlinearitySpec, p: float, t, tol: float = 1e-10) -> np.ndarray:
    t = np.maximum(np.asarray(t, dtype=float), 0.0)
    return np.asarray(dpsi(spec, p, t)) * np.asarray(psi(spec, p, t)) - g_values(spec, p, t, tol)


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of sampling the structural hypotheses on f.

    Every flag is backed by ``grid``; ``witnesses`` holds the tail samples
    (t, f(t)/t^(p-1)) that support the superlinearity verdict.
    """

    positive: bool
    increasing: bool
    superlinear: bool
    asymptotically_convex: bool
    convexity_threshold: float | None
    psi_halfbound_threshold: float | None
    grid: tuple = field(repr=False)
    witnesses: tuple = field(repr=False, default=())

    @property
    def all_pass(self) -> bool:
        return (
            self.positive
            and self.increasing
            and self.superlinear
            and self.asymptotically_convex
            and self.psi_halfbound_threshold is not None
        )

    def to_dict(self) -> dict:
        return {
            "positive": self.positive,
            "increasing": self.increasing,
            "superlinear": self.superlinear,
            "asymptotically_convex": self.asymptotically_convex,
            "convexity_threshold": self.convexity_threshold,
            "psi_halfbound_threshold": self.psi_halfbound_threshold,
            "grid_size": len(self.grid),
            "witnesses": [list(w) for w in self.witnesses],
        }


def _tail_start(ok: np.ndarray):
    """Index from which ``ok`` is true through the end, or None."""
    if ok.size == 0 or not ok[-1]:
        return None
    bad = np.flatnonzero(~ok)
    return 0 if bad.size == 0 else int(bad[-1]) + 1


def default_sample_grid(spec: NonlinearitySpec, size: int = 256) -> np.ndarray:
    if spec.kind == "mems":
        return 1.0 - np.geomspace(1.0, 1e-3, size)
    return np.linspace(0.0, 50.0, size)


def check_assumptions(spec: NonlinearitySpec, p: float, sample_grid: Sequence[float] | None = None) -> AssumptionReport:
    """Sample positivity, monotonicity, p-superlinearity and asymptotic convexity."""
    _check_p(p)
    grid = default_sample_grid(spec) if sample_grid is None else np.asarray(sample_grid, dtype=float)
    if grid.size < 32 or np.any(np.diff(grid) <= 0):
        raise ParameterError("sample grid must be strictly increasing with at least 32 points")
    last_needed = 1.0 - 1e-3 if spec.kind == "mems" else 50.0
    if grid[-1] < last_needed - 1e-15:
        raise ParameterError(f"sample grid must reach t >= {last_needed:g}")

    f = np.asarray(eval_f(spec, grid))
    df = np.asarray(eval_df(spec, grid))
    positive = bool(np.all(f > 0))
    increasing = bool(np.all(df >= 0) and np.all(np.diff(f) >= 0))

    pos = grid > 0
    tpos = grid[pos]
    ratio = f[pos] / tpos ** (p - 1.0)
    tail = slice(tpos.size // 2, None)
    log_slope = np.polyfit(np.log(tpos[tail]), np.log(ratio[tail]), 1)[0]
    superlinear = bool(np.all(np.diff(ratio[tail]) > 0) and log_slope > 1e-3)
    witness_idx = np.linspace(tpos.size // 2, tpos.size - 1, 8).astype(int)
    witnesses = tuple((float(tpos[i]), float(ratio[i])) for i in witness_idx)

    with np.errstate(over="ignore"):
        big_f = f ** (1.0 / (p - 1.0))
    h0, h1 = np.diff(grid)[:-1], np.diff(grid)[1:]
    dd2 = 2.0 * ((big_f[2:] - big_f[1:-1]) / h1 - (big_f[1:-1] - big_f[:-2]) / h0) / (h0 + h1)
    scale = np.maximum.reduce([np.abs(big_f[:-2]), np.abs(big_f[1:-1]), np.abs(big_f[2:])])
    normalised = dd2 * h0 * h1 / scale
    start = _tail_start(np.isfinite(normalised) & (normalised >= -1e-12))
    convexity_threshold = None if start is None else float(grid[start])

    ps = np.asarray(psi(spec, p, tpos))
    dps = np.asarray(dpsi(spec, p, tpos))
    half = _tail_start(2.0 * tpos * dps >= ps * (1.0 - 1e-12))
    half_threshold = None if half is None else float(tpos[half])

    return AssumptionReport(
        positive=positive,
        increasing=increasing,
        superlinear=superlinear,
        asymptotically_convex=convexity_threshold is not None and start < grid.size - 3,
        convexity_threshold=convexity_threshold,
        psi_halfbound_threshold=half_threshold,
        grid=tuple(float(x) for x in grid),
        witnesses=witnesses,
    )
