"""Planar curves given by their curvature, offset curves and the a'priori bound.

Graphs ``v(u)`` have signed curvature ``v'' / (1 + v'^2)^{3/2}``, positive for
graphs that are convex upward.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicHermiteSpline

from .fields import Function1D
from .ode import rk4_path

STEPS_PER_UNIT = 4096
BLOWUP_GUARD = 10.0
FOCAL_TOL = 1e-9


class CurveError(RuntimeError):
    pass


@dataclass
class PlanarCurveGraph:
    """Samples of ``v``, ``w = v'`` and the curvature on a symmetric grid ``u``."""
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    kappa: np.ndarray

    def __post_init__(self):
        self.wprime = self.kappa * (1 + self.w ** 2) ** 1.5
        self._v = CubicHermiteSpline(self.u, self.v, self.w)
        self._w = CubicHermiteSpline(self.u, self.w, self.wprime)

    @property
    def halfwidth(self):
        return float(self.u[-1])

    def v_at(self, u):
        return self._v(u)

    def w_at(self, u):
        return self._w(u)

    def wprime_at(self, u):
        """``v''`` at ``u`` (derivative of the Hermite interpolant of ``w``)."""
        return self._w(u, 1)


@dataclass
class ProfileCurve:
    """The profile ``rho(h)`` with ``rho(0) = rho'(0) = 0``."""
    h: np.ndarray
    rho: np.ndarray
    rho_prime: np.ndarray
    rho_second: np.ndarray

    def __post_init__(self):
        self._r = CubicHermiteSpline(self.h, self.rho, self.rho_prime)
        self._rp = CubicHermiteSpline(self.h, self.rho_prime, self.rho_second)

    @property
    def phi(self):
        """``1 / sqrt(1 + rho'^2)`` at the samples."""
        return 1 / np.sqrt(1 + self.rho_prime ** 2)

    @property
    def halfwidth(self):
        return float(self.h[-1])

    def rho_at(self, h):
        return self._r(h)

    def rho_prime_at(self, h):
        return self._rp(h)

    def rho_second_at(self, h):
        return self._rp(h, 1)

    def phi_at(self, h):
        return 1 / np.sqrt(1 + self._rp(h) ** 2)


def _integrate_graph(kappa, halfwidth, steps_per_unit, guard):
    n = max(2, math.ceil(halfwidth * steps_per_unit - 1e-9))
    h = halfwidth / n

    def rhs(t, s):
        return np.array([s[1], kappa(t) * (1 + s[1] * s[1]) ** 1.5])

    def check(t, s):
        if not abs(s[1]) <= guard:
            raise CurveError(f"slope exceeds the blow-up guard {guard} near u = {t:.6g}")

    _, right = rk4_path(rhs, 0.0, np.zeros(2), h, n, check)
    _, left = rk4_path(rhs, 0.0, np.zeros(2), -h, n, check)
    u = h * np.arange(-n, n + 1)
    vals = np.concatenate([left[::-1], right[1:]])
    return u, vals[:, 0], vals[:, 1]


def curve_from_curvature(kappa, halfwidth, steps_per_unit=STEPS_PER_UNIT, guard=BLOWUP_GUARD):
    """Graph ``v(u)`` on ``|u| <= halfwidth`` with ``v(0) = v'(0) = 0`` and curvature ``kappa``.

    ``kappa`` is a number, an expression in ``u`` or a callable.
    """
    kappa = Function1D.from_spec(kappa, "u") if not isinstance(kappa, Function1D) else kappa
    u, v, w = _integrate_graph(kappa, halfwidth, steps_per_unit, guard)
    return PlanarCurveGraph(u, v, w, np.broadcast_to(kappa(u), u.shape).astype(float))


def profile_from_k2(kbar2, alpha, a1, steps_per_unit=STEPS_PER_UNIT, guard=BLOWUP_GUARD):
    """Profile ``rho`` on ``|h| <= a1 / sqrt(alpha^2 + 1)`` with curvature ``kbar2(h sqrt(alpha^2 + 1))``."""
    kbar2 = Function1D.from_spec(kbar2)
    s = math.sqrt(alpha * alpha + 1)

    def kappa(h):
        return kbar2(h * s)
    h, rho, rp = _integrate_graph(kappa, a1 / s, steps_per_unit, guard)
    rpp = np.broadcast_to(kappa(h), h.shape) * (1 + rp ** 2) ** 1.5
    return ProfileCurve(h, rho, rp, rpp)


def profile_bounds(kbar, alpha, a1):
    """Upper bounds for ``(|rho|, |rho'|, |rho''|)`` valid when ``kbar <= sqrt(alpha^2+1) / (sqrt2 a1)``."""
    s2 = alpha * alpha + 1
    return (math.sqrt(2) * a1 * a1 * kbar / s2, math.sqrt(2) * a1 * kbar / math.sqrt(s2),
            math.sqrt(8) * kbar)


def base_curve_bounds(kbar, alpha, a1):
    """Upper bounds for ``(|v0|, |v0'|, |v0''|)`` valid when ``kbar <= sqrt(alpha^2+1) / (sqrt2 alpha a1)``."""
    s2 = alpha * alpha + 1
    return (math.sqrt(2) * a1 * a1 * kbar * alpha * alpha / s2,
            math.sqrt(2) * a1 * kbar * alpha / math.sqrt(s2), math.sqrt(8) * kbar)


@dataclass
class OffsetCurve:
    x: np.ndarray
    y: np.ndarray
    curvature: np.ndarray


def offset_curve(curve: PlanarCurveGraph, rho, orientation=1):
    """Parallel curve at distance ``rho`` along the upward normal ``(-w, 1) / sqrt(1 + w^2)``.

    The curvature is ``orientation * kappa / (1 - kappa rho)``: ``orientation=1``
    measures it with the same upward normal as the base curve, ``-1`` uses
    the opposite sign convention.
    """
    w = curve.w
    s = np.sqrt(1 + w * w)
    denom = 1 - curve.kappa * rho
    if np.any(denom <= FOCAL_TOL):
        raise CurveError("offset distance reaches a focal point (1 - kappa rho <= 0)")
    return OffsetCurve(curve.u - w * rho / s, curve.v + rho / s, orientation * curve.kappa / denom)


def fd_curvature(x, y):
    """Signed curvature of a sampled parametric curve by central differences (interior samples)."""
    xp = (x[2:] - x[:-2]) / 2
    yp = (y[2:] - y[:-2]) / 2
    xpp = x[2:] - 2 * x[1:-1] + x[:-2]
    ypp = y[2:] - 2 * y[1:-1] + y[:-2]
    return (xp * ypp - yp * xpp) / (xp * xp + yp * yp) ** 1.5


@dataclass
class AprioriResult:
    verdict: str  # "holds", "violated" or "inapplicable"
    slack: float  # min over samples of (bound - u)
    hypothesis_gap: float  # max over samples of u - A * integral


def apriori_bound_check(y, u, A, a, rtol=1e-9):
    """Check ``u(y) <= A y / sqrt(1 - A^2 y^2)`` on ``[0, a]``.

    The bound applies when ``0 <= u(y) <= A * int_0^y (1 + u^2)^{3/2}``; that
    hypothesis is checked first with the composite trapezoid rule and the
    verdict is ``"inapplicable"`` when it fails.
    """
    y = np.asarray(y, float)
    u = np.asarray(u, float)
    if not (A > 0 and A * a < 1):
        raise ValueError("need 0 < A < 1/a")
    if y[0] != 0 or y[-1] > a * (1 + 1e-12) or np.any(np.diff(y) <= 0):
        raise ValueError("samples must start at 0, increase and stay in [0, a]")
    if np.any(u < 0):
        raise ValueError("u must be nonnegative")
    integral = A * cumulative_trapezoid((1 + u * u) ** 1.5, y, initial=0.0)
    gap = float(np.max(u - integral * (1 + rtol)))
    bound = A * y / np.sqrt(1 - A * A * y * y)
    slack = float(np.min(bound - u))
    if gap > 1e-14:
        return AprioriResult("inapplicable", slack, gap)
    ok = np.all(u <= bound * (1 + rtol) + 1e-14)
    return AprioriResult("holds" if ok else "violated", slack, gap)
