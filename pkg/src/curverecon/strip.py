"""Initial strip: the jet ``(f0, p0, q0)`` of the surface along ``gamma``.

Along ``y = 0`` the surface satisfies ``f0' = p0``, ``p0' = H11`` and
``q0' = H12`` with the prescribed curvatures inserted into the H-coefficients,
and ``f0(0) = p0(0) = q0(0) = 0``.
"""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .fields import AlphaField, BoundaryData
from .geometry import (DomainError, christoffels, graph_first_form, h_coefficients, h_euclidean,
                       umbilical_identities)
from .ode import rk4_path

DEFAULT_STEPS_PER_SIDE = 2048


class StripError(RuntimeError):
    pass


class ThresholdWarning(UserWarning):
    pass


@dataclass
class StripSolution:
    x: np.ndarray
    f0: np.ndarray
    p0: np.ndarray
    q0: np.ndarray
    r: float
    norm: float
    step: float
    threshold: float = math.nan
    C: float = math.nan
    Lbar: float = math.nan
    k0bar: float = math.nan
    warnings: list = field(default_factory=list)

    @property
    def within_threshold(self):
        return self.k0bar < self.threshold


def _alpha_on_gamma(data, alpha):
    if data.alpha0 is not None:
        return data.alpha0
    if alpha is None:
        raise ValueError("a direction field or alpha0 samples are required")
    return lambda x: alpha(x, np.zeros_like(np.asarray(x, float)))


def _h_parts(metric, x1, f, p, q, a):
    """H-coefficients at ``(x1, 0, f)`` (numpy, vectorised)."""
    x1, f, p, q, a = np.broadcast_arrays(*[np.asarray(v, float) for v in (x1, f, p, q, a)])
    x2 = np.zeros_like(x1)
    g11, g12, g22, g33 = metric.components(x1, x2, f)
    E, F, G, delta, _ = graph_first_form(g11, g12, g22, g33, p, q)
    from .geometry import graph_lower_terms
    L1, M1, N1 = graph_lower_terms(christoffels(metric, x1, x2, f), p, q)
    return h_coefficients(E, F, G, delta, L1, M1, N1, a)


def make_strip_rhs(metric, data, alpha=None):
    """Right-hand side ``(x1, (f0, p0, q0)) -> (p0, H11, H12)`` on gamma."""
    a0 = _alpha_on_gamma(data, alpha)
    if metric.is_euclidean:
        def rhs(x, s):
            H11, H12, _ = h_euclidean(s[1], s[2], float(a0(x)), data.kbar1(x), data.kbar2(x))
            return np.array([s[1], H11, H12])
        return rhs
    from .kernel import evaluate_general

    def rhs(x, s):
        out = evaluate_general(metric, x, 0.0, s[0], s[1], s[2], a0(x), 0.0, 0.0,
                               data.kbar1(x), data.kbar2(x))
        return np.array([s[1], out.H11[0], out.H12[0]])
    return rhs


def smallness_threshold(r, C, Lbar, a1):
    """``min(r / (4 a1 C) * exp(-Lbar a1), r)``."""
    if not (r > 0 and C > 0 and Lbar > 0 and a1 > 0):
        raise ValueError("r, C, Lbar and a1 must be positive")
    return min(r / (4 * a1 * C) * math.exp(-Lbar * a1), r)


def estimate_constants(metric, data, alpha=None, r=1.0, n_side=32, n_x=9, n_pairs=10_000, seed=0):
    """Empirical ``C(r)`` and ``Lbar(r)`` over ``|x1| <= a1``, ``|f|, |p|, |q| <= r``.

    ``C`` is 1.1 times the largest ``|h^(k)_ij|`` on a lattice; ``Lbar`` is
    1.1 times the largest difference quotient of the strip right-hand side
    (with the data and with ``kbar = lam``) over random pairs.
    """
    a0 = _alpha_on_gamma(data, alpha)
    a1 = data.a1
    s = np.linspace(-r, r, n_side)
    rf = min(r, -metric.lo[2], metric.hi[2])  # f must stay inside the metric box
    xs = np.linspace(-a1, a1, n_x)
    X, Fv, P, Q = np.meshgrid(xs, np.linspace(-rf, rf, n_side), s, s, indexing="ij")
    hc = _h_parts(metric, X, Fv, P, Q, a0(X))
    C = 1.1 * max(float(np.max(np.abs(v))) for v in
                  (hc.h11_1, hc.h11_2, hc.h12_1, hc.h12_2))
    rng = np.random.default_rng(seed)
    x = rng.uniform(-a1, a1, n_pairs)
    lim = np.array([[rf], [r], [r]])
    u = rng.uniform(-1, 1, (3, n_pairs)) * lim
    v = rng.uniform(-1, 1, (3, n_pairs)) * lim
    a = a0(x)
    best = 0.0
    for k1, k2 in ((data.kbar1(x), data.kbar2(x)), (data.lam + 0 * x, data.lam + 0 * x)):
        hu = _h_parts(metric, x, u[0], u[1], u[2], a).values(k1, k2)
        hv = _h_parts(metric, x, v[0], v[1], v[2], a).values(k1, k2)
        du = np.abs(np.array([u[1] - v[1], hu[0] - hv[0], hu[1] - hv[1]])).max(axis=0)
        dn = np.abs(u - v).max(axis=0)
        best = max(best, float(np.max(du / dn)))
    return C, 1.1 * best


def solve_initial_strip(data: BoundaryData, metric, alpha: AlphaField = None, r=1.0, nodes=None,
                        step=None, strict=False, check_umbilic=True, constants=None):
    """Integrate the strip system outward from ``x1 = 0`` with fixed-step RK4.

    Parameters
    ----------
    nodes : array, optional
        Uniform symmetric grid containing 0 (spacing ``dx``). The RK4 step is
        ``dx / m`` with the smallest ``m`` that keeps it below ``step`` and the
        solution is returned on ``nodes``. Without ``nodes`` the solution is
        returned on the RK4 grid itself.
    step : float, optional
        Largest RK4 step, ``a1 / 2048`` by default.
    strict : bool
        Raise instead of warning when the smallness threshold is violated.
    constants : (C, Lbar), optional
        Skip the sampling estimate of the threshold constants.
    """
    a1 = data.a1
    if check_umbilic and not metric.is_euclidean and metric.umbilic_lambda is not None:
        rep = umbilical_identities(metric, data.lam)
        if not rep.passed:
            raise StripError(f"x3 = 0 is not totally umbilical with lambda = {data.lam}: "
                             f"residual {max(rep.gamma_residual, rep.quadratic_residual):.3e}")
    hmax = a1 / DEFAULT_STEPS_PER_SIDE if step is None else float(step)
    if nodes is not None:
        nodes = np.asarray(nodes, float)
        n = (len(nodes) - 1) // 2
        dx = nodes[1] - nodes[0]
        if len(nodes) % 2 == 0 or abs(nodes[n]) > 1e-14 * a1 or nodes[-1] > a1 * (1 + 1e-12):
            raise ValueError("nodes must be a symmetric uniform grid containing 0 inside gamma")
        m = max(1, math.ceil(dx / hmax - 1e-9))
        h = dx / m
        nsteps = n * m
    else:
        nsteps = DEFAULT_STEPS_PER_SIDE if step is None else max(1, math.ceil(a1 / hmax - 1e-9))
        h = a1 / nsteps
        m = 1

    messages = []
    C, Lbar = constants if constants is not None else estimate_constants(metric, data, alpha, r)
    k0 = data.k0bar
    thr = smallness_threshold(r, C, Lbar, a1) if C > 0 else r
    if not k0 < thr:
        msg = (f"boundary data deviate from the umbilic value by {k0:.4g}, above the strip "
               f"smallness threshold {thr:.4g}; existence is not certified")
        if strict:
            raise StripError(msg)
        messages.append(msg)
        warnings.warn(msg, ThresholdWarning, stacklevel=2)

    def guard(t, y):
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > r:
            raise StripError(f"strip solution leaves the ball of radius {r} near x1 = {t:.6g}")

    try:
        if metric.is_euclidean:
            rhs = make_strip_rhs(metric, data, alpha)
            _, right = rk4_path(rhs, 0.0, np.zeros(3), h, nsteps, guard)
            _, left = rk4_path(rhs, 0.0, np.zeros(3), -h, nsteps, guard)
        else:
            from .kernel import integrate_strip_general
            a0 = _alpha_on_gamma(data, alpha)
            metric.check_domain(np.array([-a1, a1]), 0.0, 0.0)
            right, left = (integrate_strip_general(metric, hh, nsteps, a0, data.kbar1, data.kbar2)
                           for hh in (h, -h))
            for path, sgn in ((right, 1), (left, -1)):
                bad = np.flatnonzero(~np.all(np.isfinite(path), axis=1) | (np.max(np.abs(path), axis=1) > r))
                if bad.size:
                    guard(sgn * h * bad[0], path[bad[0]])
            metric.check_domain(0.0, 0.0, np.concatenate([right[:, 0], left[:, 0]]))
    except DomainError as exc:
        raise StripError(str(exc)) from None
    full = np.concatenate([left[::-1], right[1:]])
    xs = h * np.arange(-nsteps, nsteps + 1)
    if m > 1:
        full = full[::m]
        xs = nodes
    elif nodes is not None:
        xs = nodes
    norm = float(np.max(np.abs(full)))
    return StripSolution(xs, full[:, 0].copy(), full[:, 1].copy(), full[:, 2].copy(), r, norm, h,
                         thr, C, Lbar, k0, messages)


@dataclass
class GronwallResult:
    measured: float
    bound: float

    @property
    def verdict(self):
        return self.measured <= self.bound * (1 + 1e-6)


def gronwall_bound(P, Q, y0, z0, h, Lbar, m, n_steps=2000):
    """Measured gap between ``y' = P(t, y)`` and ``z' = Q(t, z)`` on ``[0, h]`` and
    the bound ``(m h + |y0 - z0|) exp(Lbar h)``."""
    y0 = np.atleast_1d(np.asarray(y0, float))
    z0 = np.atleast_1d(np.asarray(z0, float))

    def finite(t, y):
        if not np.all(np.isfinite(y)):
            raise StripError("solution blows up before the horizon")
    _, ys = rk4_path(P, 0.0, y0, h / n_steps, n_steps, finite)
    _, zs = rk4_path(Q, 0.0, z0, h / n_steps, n_steps, finite)
    measured = float(np.max(np.abs(ys - zs)))
    bound = (m * h + float(np.max(np.abs(y0 - z0)))) * math.exp(Lbar * h)
    return GronwallResult(measured, bound)
