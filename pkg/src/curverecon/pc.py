"""Parallel curved (PC) surfaces in Euclidean space.

A PC surface for the constant direction ``alpha d/dx + d/dy`` is built from a
base curve ``v0(u)`` in the plane ``x - alpha y = 0`` and a profile ``rho(h)``:

    U = u - v0' rho / sqrt(1 + v0'^2),  V = v0 + rho / sqrt(1 + v0'^2),  W = h,
    x = (h + alpha U) / s,  y = (U - alpha h) / s,  z = V,   s = sqrt(alpha^2 + 1).

When both curvatures are prescribed along ``y = 0`` the unknown base curve is
found from the fixed point of an operator ``S`` acting on ``(X(u), w(u))``,
where ``X`` is the abscissa on ``y = 0`` reached from the parameter ``u`` and
``w = v0'``.
"""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from .curves import (BLOWUP_GUARD, STEPS_PER_UNIT, CurveError, PlanarCurveGraph, ProfileCurve,
                     curve_from_curvature, profile_from_k2)
from .fields import Function1D
from .strip import ThresholdWarning


class PCError(RuntimeError):
    pass


@dataclass
class PCConfig:
    alpha: float
    a1: float
    a: float
    kbar1: Function1D
    kbar2: Function1D
    T_weight: float = None
    tol: float = 1e-12
    max_iters: int = 200
    steps_per_unit: int = STEPS_PER_UNIT
    a_solve: float = None
    force: bool = False

    def __post_init__(self):
        self.kbar1 = Function1D.from_spec(self.kbar1)
        self.kbar2 = Function1D.from_spec(self.kbar2)
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0 < self.a < self.a1:
            raise ValueError("need 0 < a < a1")
        if self.a_solve is None:
            self.a_solve = 0.5 * (self.a + self.a1)
        if not self.a <= self.a_solve < self.a1:
            raise ValueError("need a <= a_solve < a1")

    @property
    def s(self):
        return math.sqrt(self.alpha ** 2 + 1)

    @property
    def kbar(self):
        x = np.linspace(-self.a1, self.a1, 4097)
        return float(max(np.max(np.abs(self.kbar1(x))), np.max(np.abs(self.kbar2(x)))))


def smallness_report(alpha, a1, a, kbar):
    """Each sufficient smallness inequality of the PC construction, checked separately.

    Returns a dict ``name -> {"limit", "value", "ok"}``; for the inequalities
    stated as ``kbar <= limit`` the value is ``kbar``.
    """
    s = math.sqrt(alpha * alpha + 1)
    r2 = math.sqrt(2)
    limits = {
        "profile_window": s / (r2 * a1),
        "base_curve_window": s / (r2 * alpha * a1),
        "F_self_map": (a1 - a) * alpha * s / (r2 * a1 * a1),
        "F_bound": alpha * s / (2 * a1),
        "lower_bound_denominator": s * s / (2 * a1 * a1),
        "w_window": s / (2 * alpha * a1),
        "S_self_map": s / (4 * alpha * a1),
    }
    rep = {k: {"limit": v, "value": kbar, "ok": kbar <= v} for k, v in limits.items()}
    dfdx = r2 * a1 * kbar / (alpha * s)
    rep["dFdX"] = {"limit": 1 / r2, "value": dfdx, "ok": dfdx <= 1 / r2}
    t_norm = 4 * r2 * a1 * a1 * kbar * kbar / (s * s) + r2 * a1 * kbar / s
    rep["T_contraction"] = {"limit": 1.0, "value": t_norm, "ok": t_norm < 1}
    return rep


@dataclass
class PCSolution:
    alpha: float
    a1: float
    a: float
    profile: ProfileCurve
    base: PlanarCurveGraph
    ktilde: object  # callable of u
    u: np.ndarray = None
    X: np.ndarray = None
    w: np.ndarray = None
    iters: int = 0
    distances: list = field(default_factory=list)
    contraction_factor: float = math.nan
    residual_X: float = math.nan
    residual_w: float = math.nan
    T_weight: float = math.nan
    thresholds: dict = field(default_factory=dict)
    dT_sup: float = math.nan
    warnings: list = field(default_factory=list)

    @property
    def s(self):
        return math.sqrt(self.alpha ** 2 + 1)

    @property
    def u_max(self):
        return self.base.halfwidth

    @property
    def h_max(self):
        return self.profile.halfwidth

    def param(self, u, h):
        """Cartesian point ``(x, y, z)`` of the parameters ``(u, h)``."""
        w = self.base.w_at(u)
        r = self.profile.rho_at(h)
        c = 1 / np.sqrt(1 + w * w)
        U = u - w * r * c
        V = self.base.v_at(u) + r * c
        return (h + self.alpha * U) / self.s, (U - self.alpha * h) / self.s, V


def _pc_dT_sup(base, profile, n=101):
    """``sup ||dT||_inf`` over a lattice of the parameter rectangle."""
    U, H = np.meshgrid(np.linspace(-base.halfwidth, base.halfwidth, n),
                       np.linspace(-profile.halfwidth, profile.halfwidth, n))
    w = base.w_at(U)
    v2 = base.wprime_at(U)
    return float(np.max(np.abs(profile.rho_at(H) * v2) / (1 + w * w) ** 1.5
                        + np.abs(profile.rho_prime_at(H) * w) / np.sqrt(1 + w * w)))


def _gate(thresholds, force, messages, what):
    failed = [k for k, v in thresholds.items() if not v["ok"]]
    if failed:
        msg = f"{what}: smallness conditions not met: {', '.join(failed)}"
        if not force:
            raise PCError(msg + " (use force to proceed)")
        messages.append(msg)
        warnings.warn(msg, ThresholdWarning, stacklevel=3)


def reconstruct_given_gamma1(ktilde, kbar2, cfg: PCConfig):
    """PC surface from the curvature ``ktilde(u)`` of the base curve and ``kbar2`` on gamma."""
    ktilde = Function1D.from_spec(ktilde, "u")
    alpha, a1 = cfg.alpha, cfg.a1
    s = cfg.s
    umax = a1 * alpha / s
    uu = np.linspace(-umax, umax, 2049)
    kb = float(max(np.max(np.abs(ktilde(uu))), cfg.kbar))
    window = s / (math.sqrt(2) * a1) * min(1.0, 1.0 / alpha)
    thresholds = {"regular_window": {"limit": window, "value": kb, "ok": kb <= window}}
    msgs = []
    _gate(thresholds, cfg.force, msgs, "reconstruct_given_gamma1")
    try:
        profile = profile_from_k2(cfg.kbar2, alpha, a1, cfg.steps_per_unit)
        base = curve_from_curvature(ktilde, umax, cfg.steps_per_unit)
    except CurveError as exc:
        raise PCError(str(exc)) from None
    dT = _pc_dT_sup(base, profile)
    thresholds["T_contraction_numeric"] = {"limit": 1.0, "value": dT, "ok": dT < 1}
    if not dT < 1:
        raise PCError(f"projection map is not a contraction: sup |dT| = {dT:.4g}")
    return PCSolution(alpha, a1, cfg.a, profile, base, ktilde, thresholds=thresholds, dT_sup=dT,
                      warnings=msgs)


def _newton_X(u, w, profile, alpha, a1, tol=1e-13, max_iter=100):
    """Solve ``X = (s/alpha)(u - rho(X/s) w / sqrt(1 + w^2))`` for every ``u``.

    Safeguarded Newton on the increasing residual, bracket ``[-a1, a1]``.
    """
    s = math.sqrt(alpha * alpha + 1)
    c = w / np.sqrt(1 + w * w)

    def R(X):
        return X - s / alpha * (u - profile.rho_at(X / s) * c)

    lo = np.full_like(u, -a1)
    hi = np.full_like(u, a1)
    if np.any(R(lo) > 0) or np.any(R(hi) < 0):
        raise PCError("inner solve: the abscissa X leaves [-a1, a1]")
    X = np.clip(s / alpha * u, -a1, a1)
    for _ in range(max_iter):
        r = R(X)
        lo = np.where(r < 0, X, lo)
        hi = np.where(r > 0, X, hi)
        d = 1 + profile.rho_prime_at(X / s) * c / alpha
        Xn = X - r / d
        bad = (Xn <= lo) | (Xn >= hi) | ~np.isfinite(Xn)
        Xn = np.where(bad, 0.5 * (lo + hi), Xn)
        step = np.max(np.abs(Xn - X))
        X = Xn
        if step <= tol:
            return X
    raise PCError("inner solve did not converge")


def _cumulative_simpson_from_zero(u, g):
    """``int_0^u g`` on a symmetric grid with ``u[n] = 0``."""
    n = len(u) // 2
    right = cumulative_simpson(g[n:], x=u[n:], initial=0.0)
    left = -cumulative_simpson(g[n::-1], x=-u[n::-1], initial=0.0)[::-1]
    return np.concatenate([left[:-1], right])


def _G(X, w, kbar1, profile, s):
    k = kbar1(X)
    return k * (1 + w * w) ** 1.5 / (profile.rho_at(X / s) * k + profile.phi_at(X / s))


def estimate_L2(kbar1, profile, alpha, a1, n=201):
    """Lipschitz constant of ``G(X, w)`` on ``[-a1, a1] x [-1, 1]`` (max-norm), by differences."""
    s = math.sqrt(alpha * alpha + 1)
    X, W = np.meshgrid(np.linspace(-a1, a1, n), np.linspace(-1, 1, n))
    hX, hW = 1e-6 * a1, 1e-6
    Xc = np.clip(X, -a1 + hX, a1 - hX)
    gX = (_G(Xc + hX, W, kbar1, profile, s) - _G(Xc - hX, W, kbar1, profile, s)) / (2 * hX)
    gW = (_G(Xc, W + hW, kbar1, profile, s) - _G(Xc, W - hW, kbar1, profile, s)) / (2 * hW)
    return float(np.max(np.abs(gX) + np.abs(gW)))


def fixed_point_solve(cfg: PCConfig):
    """Recover the PC surface with both curvatures prescribed along ``y = 0``.

    Iterates ``(X, w) -> (Xt(u, w), int_0^u G(X, w))`` from ``(s u / alpha, 0)``
    on ``|u| <= a_solve alpha / s`` and measures progress in
    ``max(|dX|, max e^{-T|u|} |dw|)``.
    """
    alpha, a1 = cfg.alpha, cfg.a1
    s = cfg.s
    msgs = []
    thresholds = smallness_report(alpha, a1, cfg.a_solve, cfg.kbar)
    _gate(thresholds, cfg.force, msgs, "fixed_point_solve")
    try:
        profile = profile_from_k2(cfg.kbar2, alpha, a1, cfg.steps_per_unit)
    except CurveError as exc:
        raise PCError(str(exc)) from None
    umax = cfg.a_solve * alpha / s
    n = max(2, math.ceil(umax * cfg.steps_per_unit))
    u = umax * np.arange(-n, n + 1) / n
    L2 = estimate_L2(cfg.kbar1, profile, alpha, a1)
    T = 2 * L2 if cfg.T_weight is None else float(cfg.T_weight)
    weight = np.exp(-T * np.abs(u))

    X = s / alpha * u
    w = np.zeros_like(u)
    dists = []
    iters = None
    stall = 0
    for it in range(cfg.max_iters):
        Xn = _newton_X(u, w, profile, alpha, a1)
        wn = _cumulative_simpson_from_zero(u, _G(Xn, w, cfg.kbar1, profile, s))
        d = max(float(np.max(np.abs(Xn - X))), float(np.max(weight * np.abs(wn - w))))
        X, w = Xn, wn
        if np.max(np.abs(w)) > BLOWUP_GUARD:
            raise PCError("iterates blow up")
        dists.append(d)
        if d <= cfg.tol:
            iters = it
            break
        stall = stall + 1 if len(dists) > 1 and d >= dists[-2] else 0
        if stall >= 5:
            raise PCError(f"no contraction: distance non-decreasing for 5 iterations (d = {d:.3e})")
    if iters is None:
        raise PCError(f"fixed point not reached in {cfg.max_iters} iterations (d = {dists[-1]:.3e})")
    ratios = [b / a for a, b in zip(dists[:-1], dists[1:]) if a > 1e2 * cfg.tol]
    factor = max(ratios) if ratios else 0.0

    G = _G(X, w, cfg.kbar1, profile, s)
    res_X = float(np.max(np.abs(X - s / alpha * (u - profile.rho_at(X / s) * w / np.sqrt(1 + w * w)))))
    res_w = float(np.max(np.abs(w - _cumulative_simpson_from_zero(u, G))))
    kt = cfg.kbar1(X) / (profile.rho_at(X / s) * cfg.kbar1(X) + profile.phi_at(X / s))
    kt = np.broadcast_to(kt, u.shape).astype(float)
    v0 = _cumulative_simpson_from_zero(u, w)
    base = PlanarCurveGraph(u, v0, w, kt)
    kspline = CubicSpline(u, kt)
    ktilde = Function1D(kspline, kspline.derivative(1), kspline.derivative(2), "recovered")
    dT = _pc_dT_sup(base, profile)
    thresholds["T_contraction_numeric"] = {"limit": 1.0, "value": dT, "ok": dT < 1}
    if not dT < 1:
        raise PCError(f"projection map is not a contraction: sup |dT| = {dT:.4g}")
    if factor >= 1:
        msgs.append(f"iterates converged but the observed contraction factor is {factor:.3g} >= 1")
    if np.max(np.abs(X)) > a1 or np.max(np.abs(w)) > 1:
        msgs.append("fixed point leaves the ball |X| <= a1, |w| <= 1")
    return PCSolution(alpha, a1, cfg.a, profile, base, ktilde, u, X, w, iters, dists, factor,
                      res_X, res_w, T, thresholds, dT, msgs)


def invert_projection(sol: PCSolution, x, y, tol=1e-15, max_iter=200):
    """Parameters ``(u, h)`` over the point ``(x, y)`` by iterating the map T."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    s, a = sol.s, sol.alpha
    h = (x - a * y) / s
    u0 = (a * x + y) / s
    if np.any(np.abs(h) > sol.h_max * (1 + 1e-12)):
        raise PCError("point outside the parameter strip |h| <= a1 / s")
    r = sol.profile.rho_at(h)
    u = u0.copy()
    for _ in range(max_iter):
        if np.any(np.abs(u) > sol.u_max * (1 + 1e-12)):
            raise PCError("point outside the region covered by the base curve")
        w = sol.base.w_at(u)
        un = u0 + w * r / np.sqrt(1 + w * w)
        step = np.max(np.abs(un - u)) if un.size else 0.0
        u = un
        if step <= tol * max(1.0, sol.u_max):
            return u, h
    raise PCError("projection inversion did not converge")


def in_region(alpha, a, x, y):
    """Mask of ``Pi(a) = {|alpha x + y| <= alpha a, |x - alpha y| <= a}``."""
    return (np.abs(alpha * x + y) <= alpha * a * (1 + 1e-12)) & (np.abs(x - alpha * y) <= a * (1 + 1e-12))


def to_graph(sol: PCSolution, x, y, outside="raise"):
    """Height ``f(x, y)`` of the PC surface.

    ``outside="nan"`` returns NaN for points outside ``Pi(a)`` instead of raising.
    """
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    m = in_region(sol.alpha, sol.a, x, y)
    if not np.all(m) and outside == "raise":
        raise PCError("point outside the certified region Pi(a)")
    f = np.full(x.shape, np.nan)
    u, h = invert_projection(sol, x[m], y[m])
    w = sol.base.w_at(u)
    f[m] = sol.base.v_at(u) + sol.profile.rho_at(h) / np.sqrt(1 + w * w)
    return f


def pc_curvatures(sol: PCSolution, u, h):
    """Closed-form principal curvatures ``(k1, k2)`` at the parameters ``(u, h)``."""
    kt = sol.ktilde(u)
    rho = sol.profile.rho_at(h)
    d = 1 - kt * rho
    if np.any(d <= 1e-9):
        raise PCError("focal point: 1 - ktilde rho <= 0")
    rp = sol.profile.rho_prime_at(h)
    k1 = kt / d / np.sqrt(1 + rp * rp)
    k2 = sol.profile.rho_second_at(h) / (1 + rp * rp) ** 1.5
    k2 = np.broadcast_to(k2, np.broadcast_shapes(np.shape(k1), np.shape(k2)))
    return k1, k2
