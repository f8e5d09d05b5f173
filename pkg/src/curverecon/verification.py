"""Finite-difference oracle for sampled graphs and convergence studies.

Everything here works from the sampled heights ``f`` alone: derivatives are
recomputed by finite differences and never taken from a solver.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .fields import Function1D
from .geometry import euclidean_metric, fundamental_forms, principal_curvatures

UMBILIC_SKIP = 1e-6


class OracleError(ValueError):
    pass


def fd_derivatives(f, dx, dy, onesided_y=False):
    """Second-order differences ``p, q, fxx, fxy, fyy`` of ``f[j, i] = f(x_i, y_j)``.

    Nodes without the needed neighbours get NaN (NaN input propagates). With
    ``onesided_y`` the bottom row uses forward differences in ``y``.
    """
    f = np.asarray(f, float)
    nan = np.full_like(f, np.nan)
    p, q, fxx, fxy, fyy = (nan.copy() for _ in range(5))
    p[:, 1:-1] = (f[:, 2:] - f[:, :-2]) / (2 * dx)
    fxx[:, 1:-1] = (f[:, 2:] - 2 * f[:, 1:-1] + f[:, :-2]) / dx ** 2
    q[1:-1] = (f[2:] - f[:-2]) / (2 * dy)
    fyy[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / dy ** 2
    fxy[1:-1, 1:-1] = (f[2:, 2:] - f[2:, :-2] - f[:-2, 2:] + f[:-2, :-2]) / (4 * dx * dy)
    if onesided_y and f.shape[0] >= 4:
        q[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * dy)
        fyy[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / dy ** 2
        px = np.full_like(f[:3], np.nan)
        px[:, 1:-1] = (f[:3, 2:] - f[:3, :-2]) / (2 * dx)
        fxy[0] = (-3 * px[0] + 4 * px[1] - px[2]) / (2 * dy)
    return p, q, fxx, fxy, fyy


def fd_shape_operator(f, x, y, metric=None, alpha=None, onesided_y=False):
    """Principal data of the sampled graph ``f`` on the tensor grid ``(x, y)``.

    Returns ``(PrincipalData, FundamentalForms)`` with fields shaped like ``f``.
    """
    x, y = np.asarray(x, float), np.asarray(y, float)
    f = np.asarray(f, float)
    if f.shape != (len(y), len(x)) or len(x) < 3 or len(y) < 2:
        raise OracleError("f must be sampled on a grid of at least 3 x 2 nodes, shape (len(y), len(x))")
    dx, dy = x[1] - x[0], (y[1] - y[0]) if len(y) > 1 else 1.0
    if not (np.allclose(np.diff(x), dx, rtol=1e-9) and np.allclose(np.diff(y), dy, rtol=1e-9)):
        raise OracleError("grid must be uniform")
    metric = euclidean_metric() if metric is None else metric
    p, q, fxx, fxy, fyy = fd_derivatives(f, dx, dy, onesided_y)
    X, Y = np.meshgrid(x, y)
    if alpha is not None and callable(alpha):
        alpha = alpha(X, Y)
    ok = np.isfinite(p) & np.isfinite(q) & np.isfinite(fxx) & np.isfinite(fxy) & np.isfinite(fyy)
    safe = [np.where(ok, v, 0.0) for v in (f, p, q, fxx, fxy, fyy)]
    with np.errstate(invalid="ignore"):
        forms = fundamental_forms(metric, X, Y, *safe)
        pd = principal_curvatures(forms, alpha=alpha)
    for name in ("k1", "k2", "alpha"):
        setattr(pd, name, np.where(ok, getattr(pd, name), np.nan))
    pd.dir1 = np.where(ok, pd.dir1, np.nan)
    pd.dir2 = np.where(ok, pd.dir2, np.nan)
    return pd, forms


@dataclass
class DirectionCheck:
    angle: np.ndarray  # radians, NaN where skipped
    max_angle: float
    n_tested: int
    n_umbilic: int

    @property
    def vacuous(self):
        return self.n_tested == 0


def direction_projection_check(f, x, y, alpha, metric=None, rows=None, onesided_y=False,
                               umbilic_skip=UMBILIC_SKIP):
    """Angle between the projected k1-direction and ``(alpha, 1)``, modulo sign.

    The k1-direction is the principal direction closest to ``(alpha, 1)``; its
    projection drops the vertical component. Nodes with
    ``|k1 - k2| < umbilic_skip * max(1, |k1|)`` are skipped and counted.
    """
    pd, _ = fd_shape_operator(f, x, y, metric, alpha, onesided_y)
    X, Y = np.meshgrid(np.asarray(x, float), np.asarray(y, float))
    a = alpha(X, Y) if callable(alpha) else np.broadcast_to(np.asarray(alpha, float), X.shape)
    d0, d1 = pd.dir1
    cross = d0 - a * d1
    dot = a * d0 + d1
    ang = np.arctan2(np.abs(cross), np.abs(dot))
    valid = np.isfinite(ang)
    if rows is not None:
        sel = np.zeros_like(valid)
        sel[rows] = True
        valid &= sel
    umb = valid & (np.abs(pd.k1 - pd.k2) < umbilic_skip * np.maximum(1.0, np.abs(pd.k1)))
    tested = valid & ~umb
    ang = np.where(tested, ang, np.nan)
    mx = float(np.max(ang[tested])) if tested.any() else math.nan
    return DirectionCheck(ang, mx, int(tested.sum()), int(umb.sum()))


def trace_projected_k1_line(f, x, y, alpha, x_start, metric=None, onesided_y=True):
    """Follow the projected k1-direction field upward from ``(x_start, y[0])``.

    The slope ``dx/dy`` of the direction is interpolated linearly in ``x`` on
    each row and integrated with the midpoint rule. Returns the traced
    abscissae, one per row, truncated where the field is undefined.
    """
    pd, _ = fd_shape_operator(f, x, y, metric, alpha, onesided_y)
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = pd.dir1[0] / pd.dir1[1]
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    xs = [float(x_start)]
    for j in range(len(y) - 1):
        s0 = np.interp(xs[-1], x, slope[j], left=np.nan, right=np.nan)
        xm = xs[-1] + 0.5 * (y[j + 1] - y[j]) * s0
        s1 = np.interp(xm, x, 0.5 * (slope[j] + slope[j + 1]), left=np.nan, right=np.nan)
        xn = xs[-1] + (y[j + 1] - y[j]) * s1
        if not np.isfinite(xn):
            break
        xs.append(float(xn))
    return np.array(xs)


def reduced_ode_oracle(kbar1, kbar2, alpha, a1, u_eval, rtol=1e-12, atol=1e-14):
    """``w(u)`` of the PC base curve from a direct adaptive ODE solve.

    The profile ``rho`` is integrated separately with DOP853, the abscissa
    ``X(u, w)`` is found by Brent's method at every right-hand-side call, and
    ``dw/du = k1(X)(1 + w^2)^{3/2} / (rho(X/s) k1(X) + 1/sqrt(1 + rho'(X/s)^2))``
    is integrated outward from ``w(0) = 0``.
    """
    kbar1, kbar2 = (k if callable(k) else Function1D.constant(k) for k in (kbar1, kbar2))
    s = math.sqrt(alpha * alpha + 1)
    hmax = a1 / s

    def prof_rhs(h, z):
        return [z[1], float(kbar2(h * s)) * (1 + z[1] ** 2) ** 1.5]

    branches = {sgn: solve_ivp(prof_rhs, (0, sgn * hmax), [0.0, 0.0], method="DOP853",
                               rtol=rtol, atol=atol, dense_output=True) for sgn in (1, -1)}

    def rho(h):
        z = branches[1 if h >= 0 else -1].sol(h)
        return z[0], z[1]

    def Xt(u, w):
        c = w / math.sqrt(1 + w * w)
        g = lambda X: X - s / alpha * (u - rho(X / s)[0] * c)
        return brentq(g, -a1, a1, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    def rhs(u, w):
        X = Xt(u, w[0])
        r, rp = rho(X / s)
        k = float(kbar1(X))
        return [k * (1 + w[0] ** 2) ** 1.5 / (r * k + 1 / math.sqrt(1 + rp * rp))]

    u_eval = np.asarray(u_eval, float)
    out = np.zeros_like(u_eval)
    for sgn in (1, -1):
        m = (u_eval > 0) if sgn > 0 else (u_eval < 0)
        if not m.any():
            continue
        t = u_eval[m]
        order = np.argsort(sgn * t)
        sol = solve_ivp(rhs, (0, t[order][-1]), [0.0], method="DOP853", t_eval=t[order],
                        rtol=rtol, atol=atol)
        if not sol.success:
            raise OracleError(sol.message)
        vals = np.empty_like(t)
        vals[order] = sol.y[0]
        out[m] = vals
    return out


def observed_orders(hs, errors):
    """Orders ``log(e_i / e_{i+1}) / log(h_i / h_{i+1})`` with their grid pairs."""
    res = []
    for (h0, e0), (h1, e1) in zip(zip(hs, errors), zip(hs[1:], errors[1:])):
        order = math.log(e0 / e1) / math.log(h0 / h1) if e0 > 0 and e1 > 0 else math.nan
        res.append({"h": [h0, h1], "order": order})
    return res


@dataclass
class OracleReport:
    problem: str
    grids: list
    errors: list
    convergence_orders: list
    max_k1_err: float = math.nan
    max_k2_err: float = math.nan
    direction_angle_err: float = math.nan
    verdict: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {k: getattr(self, k) for k in ("problem", "grids", "errors", "convergence_orders",
                                             "max_k1_err", "max_k2_err", "direction_angle_err",
                                             "verdict", "notes")}


ROUNDOFF = 1e-12


def convergence_study(problem, grids, workers=1, **kwargs):
    """Run one of the problems in ``studies.STUDIES`` on each grid step and fit orders.

    ``grids`` must hold at least three steps in geometric refinement. Each
    run returns ``(error, k1_err, k2_err, angle_err)``; runs are dispatched to
    a thread pool of ``workers`` and collected in grid order.
    """
    from .studies import STUDIES, expected_order
    if problem not in STUDIES:
        raise ValueError(f"unknown problem {problem!r}; choose from {sorted(STUDIES)}")
    grids = [float(h) for h in grids]
    if len(grids) < 3:
        raise ValueError("a convergence study needs at least three grids")
    ratios = [a / b for a, b in zip(grids, grids[1:])]
    if min(ratios) <= 1 or max(ratios) / min(ratios) > 1 + 1e-9:
        raise ValueError("grids must refine geometrically")
    run = STUDIES[problem]

    def one(h):
        try:
            return run(h, **kwargs)
        except Exception as exc:
            raise RuntimeError(f"{problem} failed at grid step {h:g}: {exc}") from exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(one, grids))
    else:
        results = [one(h) for h in grids]
    errs = [r["error"] for r in results]
    rep = OracleReport(problem, grids, errs, [],
                       max(r.get("k1_err", math.nan) for r in results[-1:]),
                       max(r.get("k2_err", math.nan) for r in results[-1:]),
                       max(r.get("angle_err", math.nan) for r in results[-1:]))
    if max(errs) <= ROUNDOFF:
        rep.notes.append("errors at roundoff; order fit skipped")
        rep.verdict["converges"] = True
        return rep
    rep.convergence_orders = observed_orders(grids, errs)
    lo, hi = expected_order(problem)
    last = rep.convergence_orders[-1]["order"]
    rep.verdict["converges"] = bool(lo <= last <= hi)
    return rep
