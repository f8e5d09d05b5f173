"""Explicit marching of the Cauchy problem over the trapezoid.

The unknowns ``(f, p, q)`` obey ``f_y = q``, ``p_y = H12``, ``q_y = H22`` on
vertical lines and the curvatures obey the transport equations
``k_i,y + lambda_i k_i,x = psi_i``. Each level is advanced with

* Heun's method for ``(f, p, q)`` with the curvatures frozen at the old level;
* the Courant-Isaacson-Rees upwind scheme for ``(k1, k2)``: trace the
  characteristic back one step, interpolate linearly at its foot and add
  ``dy * psi`` (``scheme="cir"``), or a predictor-corrector variant with
  averaged speeds and quadratic interpolation (``scheme="pc2"``).

Row ``j`` holds the nodes ``j <= i <= 2n - j``: the span loses one node per
side per level, which is the domain of dependence of the three-point stencil.
"""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .fields import AlphaField, BoundaryData
from .geometry import SINGULAR_TOL
from .kernel import evaluate
from .strip import StripSolution, ThresholdWarning, solve_initial_strip


class MarchError(RuntimeError):
    pass


@dataclass
class TrapezoidGrid:
    a1: float
    K: float
    dx: float
    dy: float
    n: int
    levels: int

    @property
    def x(self):
        return self.dx * np.arange(-self.n, self.n + 1)

    @property
    def y(self):
        return self.dy * np.arange(self.levels + 1)

    @property
    def eps(self):
        return self.levels * self.dy

    @property
    def cfl(self):
        return self.K * self.dy / self.dx

    def span(self, j):
        """Inclusive index range of row ``j``."""
        return j, 2 * self.n - j

    def mask(self, levels=None):
        levels = self.levels if levels is None else levels
        j = np.arange(levels + 1)[:, None]
        i = np.arange(2 * self.n + 1)[None, :]
        return (i >= j) & (i <= 2 * self.n - j)


@dataclass
class StateGrid:
    """Fields on the trapezoid nodes; NaN outside the accepted rows/spans."""
    grid: TrapezoidGrid
    f: np.ndarray
    p: np.ndarray
    q: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    alpha: AlphaField
    metric: object
    lam: float
    levels_done: int
    stop_reason: str = "completed"
    K_observed: float = math.nan
    scheme: str = "cir"
    strip: StripSolution = None
    warnings: list = field(default_factory=list)

    @property
    def x(self):
        return self.grid.x

    @property
    def y(self):
        return self.grid.y[: self.levels_done + 1]

    @property
    def eps_achieved(self):
        return self.levels_done * self.grid.dy

    @property
    def mask(self):
        return self.grid.mask(self.levels_done)

    @property
    def completed(self):
        return self.stop_reason == "completed"

    def fields(self):
        return {"f": self.f, "p": self.p, "q": self.q, "k1": self.k1, "k2": self.k2}

    def nodes(self):
        """Flattened arrays (x, y, f, p, q, k1, k2) of the valid nodes, row-major."""
        X, Y = np.meshgrid(self.x, self.y)
        m = self.mask
        return {k: v[m] for k, v in dict(x=X, y=Y, **self.fields()).items()}


def _eval(metric, alpha, x, y, f, p, q, k1, k2, pad=0):
    yy = np.full_like(x, y) if np.ndim(y) == 0 else y
    a = alpha(x, yy)
    ax, ay = alpha.gradient(x, yy)
    out = evaluate(metric, x, yy, f, p, q, a, ax, ay, k1, k2, pad=pad)
    sing = np.abs(a * out.E + out.F) < SINGULAR_TOL * (1 + np.abs(a) * out.E + np.abs(out.F))
    return out, sing


def _foot_linear(v, I, theta):
    """Upwind linear interpolation of row values ``v`` at ``x_i - theta dx``."""
    vi = v[I]
    back = vi - theta * (vi - v[I - 1])
    fwd = vi - theta * (v[I + 1] - vi)
    return np.where(theta >= 0, back, fwd)


def _foot_quadratic(v, I, theta):
    vm, vi, vp = v[I - 1], v[I], v[I + 1]
    return vi - 0.5 * theta * (vp - vm) + 0.5 * theta * theta * (vp - 2 * vi + vm)


def march_cauchy(data: BoundaryData, metric, alpha, dx, strip=None, eps=None, K=None, cfl=0.9,
                 r=1.0, scheme="cir", strict=False, strip_step=None, norm_weights=(1.0, 1.0, 1.0)):
    """March the Cauchy problem from ``gamma`` into ``y >= 0``.

    Parameters
    ----------
    data, metric, alpha
        Boundary curvatures, ambient metric and direction field.
    dx : float
        Horizontal step; ``a1 / dx`` must be an integer.
    eps : float, optional
        Target height. Defaults to the height at which the trapezoid closes.
    K : float, optional
        Characteristic speed bound; estimated as 1.5 times the largest speed
        on level 0 when omitted. The vertical step is ``cfl * dx / K``.
    r : float
        Bound on ``max_i c_i |(f, p, q)_i|``; the march stops when exceeded.
    scheme : {"cir", "pc2"}

    Returns
    -------
    StateGrid
        The march stops early (``stop_reason``) on a singular characteristic
        speed, a norm breach or a stencil (CFL) violation.
    """
    if scheme not in ("cir", "pc2"):
        raise ValueError(f"unknown scheme {scheme!r}")
    if not 0 < cfl <= 1:
        raise ValueError("cfl must lie in (0, 1]")
    alpha = AlphaField.from_spec(alpha)
    a1 = data.a1
    n = int(round(a1 / dx))
    if n < 2 or abs(n * dx - a1) > 1e-9 * a1:
        raise ValueError(f"a1 / dx must be an integer >= 2 (got {a1 / dx})")
    x = dx * np.arange(-n, n + 1)
    if strip is None:
        strip = solve_initial_strip(data, metric, alpha, r=r, nodes=x, step=strip_step, strict=strict)
    elif len(strip.x) != len(x) or np.max(np.abs(strip.x - x)) > 1e-12:
        raise ValueError("strip solution is not sampled on the march nodes")
    w = np.asarray(norm_weights, float)
    msgs = list(strip.warnings)

    nx = 2 * n + 1
    k1_0 = np.broadcast_to(data.kbar1(x), x.shape).astype(float)
    k2_0 = np.broadcast_to(data.kbar2(x), x.shape).astype(float)
    out0, sing0 = _eval(metric, alpha, x, 0.0, strip.f0, strip.p0, strip.q0, k1_0, k2_0, pad=nx)
    if np.any(sing0):
        raise MarchError(f"alpha E + F vanishes on gamma near x = {x[np.argmax(sing0)]:.6g}")
    vmax = float(max(np.max(np.abs(out0.lambda1)), np.max(np.abs(out0.lambda2))))
    if K is None:
        K = max(1.5 * vmax, 1e-6)
    elif vmax > K:
        raise MarchError(f"characteristic speed {vmax:.4g} on gamma exceeds K = {K}")
    dy = cfl * dx / K
    levels = n
    if eps is not None:
        levels = max(1, math.ceil(eps / dy - 1e-9))
        if levels > n:
            msg = f"requested height {eps} exceeds the closing height {n * dy:.4g} of the trapezoid"
            msgs.append(msg)
            warnings.warn(msg, ThresholdWarning, stacklevel=2)
            levels = n
        else:
            dy = eps / levels
    grid = TrapezoidGrid(a1, K, dx, dy, n, levels)

    shape = (levels + 1, nx)
    F = {k: np.full(shape, np.nan) for k in ("f", "p", "q", "k1", "k2")}
    F["f"][0], F["p"][0], F["q"][0] = strip.f0, strip.p0, strip.q0
    F["k1"][0], F["k2"][0] = k1_0, k2_0
    stop = "completed"
    done = 0
    K_obs = vmax
    for j in range(levels):
        lo, hi = grid.span(j)
        S = slice(lo, hi + 1)
        yj, yn = j * dy, (j + 1) * dy
        row = {k: F[k][j] for k in F}
        if j == 0:
            out, sing = out0, sing0
        else:
            out, sing = _eval(metric, alpha, x[S], yj, *(row[k][S] for k in ("f", "p", "q", "k1", "k2")),
                              pad=nx)
        if np.any(sing):
            stop = f"singular: alpha E + F vanishes at y = {yj:.6g}"
            break
        lam1 = np.full(nx, np.nan)
        lam2 = np.full(nx, np.nan)
        psi1 = np.full(nx, np.nan)
        psi2 = np.full(nx, np.nan)
        H12 = np.full(nx, np.nan)
        H22 = np.full(nx, np.nan)
        for arr, val in ((lam1, out.lambda1), (lam2, out.lambda2), (psi1, out.psi1),
                         (psi2, out.psi2), (H12, out.H12), (H22, out.H22)):
            arr[S] = val
        speed = float(max(np.max(np.abs(lam1[S])), np.max(np.abs(lam2[S]))))
        K_obs = max(K_obs, speed)
        if speed * dy > dx * (1 + 1e-12):
            stop = f"cfl: speed {speed:.4g} leaves the stencil at y = {yj:.6g}"
            break
        I = np.arange(lo + 1, hi)
        rhs = np.array([row["q"][I], H12[I], H22[I]])
        s0 = np.array([row["f"][I], row["p"][I], row["q"][I]])
        sp_ = s0 + dy * rhs
        kin1, kin2 = row["k1"][I], row["k2"][I]
        th1 = lam1[I] * dy / dx
        th2 = lam2[I] * dy / dx
        k1n = _foot_linear(row["k1"], I, th1) + dy * _foot_linear(psi1, I, th1)
        k2n = _foot_linear(row["k2"], I, th2) + dy * _foot_linear(psi2, I, th2)
        if scheme == "pc2":
            kin1, kin2 = k1n, k2n
        try:
            outp, singp = _eval(metric, alpha, x[I], yn, sp_[0], sp_[1], sp_[2], kin1, kin2, pad=nx)
        except Exception as exc:
            stop = f"kernel failure at y = {yn:.6g}: {exc}"
            break
        snew = s0 + 0.5 * dy * (rhs + np.array([sp_[2], outp.H12, outp.H22]))
        if scheme == "pc2":
            if np.any(singp):
                stop = f"singular: alpha E + F vanishes at y = {yn:.6g}"
                break
            th1 = 0.5 * (lam1[I] + outp.lambda1) * dy / dx
            th2 = 0.5 * (lam2[I] + outp.lambda2) * dy / dx
            k1n = _foot_quadratic(row["k1"], I, th1) + 0.5 * dy * (_foot_quadratic(psi1, I, th1) + outp.psi1)
            k2n = _foot_quadratic(row["k2"], I, th2) + 0.5 * dy * (_foot_quadratic(psi2, I, th2) + outp.psi2)
        if not (np.all(np.isfinite(snew)) and np.all(np.isfinite(k1n)) and np.all(np.isfinite(k2n))):
            stop = f"non-finite values at y = {yn:.6g}"
            break
        if np.max(np.abs(snew) * w[:, None]) > r:
            stop = f"norm: |(f, p, q)| exceeds r = {r} at y = {yn:.6g}"
            break
        F["f"][j + 1, I], F["p"][j + 1, I], F["q"][j + 1, I] = snew
        F["k1"][j + 1, I], F["k2"][j + 1, I] = k1n, k2n
        done = j + 1
    if stop != "completed":
        msgs.append(f"march stopped early ({stop}); achieved height {done * dy:.6g}")
        if strict:
            raise MarchError(msgs[-1])
    if K_obs > K:
        msgs.append(f"observed characteristic speed {K_obs:.4g} exceeds the bound K = {K:.4g}")
    trimmed = {k: v[: done + 1].copy() for k, v in F.items()}
    return StateGrid(grid, trimmed["f"], trimmed["p"], trimmed["q"], trimmed["k1"], trimmed["k2"],
                     alpha, metric, data.lam, done, stop, K_obs, scheme, strip, msgs)


def h_fields(state):
    """``(H11, H12, H22)`` evaluated on every valid node of ``state``."""
    X, Y = np.meshgrid(state.x, state.y)
    m = state.mask
    out, _ = _eval(state.metric, state.alpha, X[m], Y[m], state.f[m], state.p[m], state.q[m],
                   state.k1[m], state.k2[m])
    res = []
    for v in (out.H11, out.H12, out.H22):
        a = np.full(X.shape, np.nan)
        a[m] = v
        res.append(a)
    return res


def _d_dx(v, dx):
    d = np.full_like(v, np.nan)
    d[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2 * dx)
    return d


def _d_dy_onesided(v, dy):
    """Second-order backward difference in y where possible, forward otherwise."""
    d = np.full_like(v, np.nan)
    if v.shape[0] >= 3:
        d[2:] = (3 * v[2:] - 4 * v[1:-1] + v[:-2]) / (2 * dy)
        fwd = (-3 * v[:-2] + 4 * v[1:-1] - v[2:]) / (2 * dy)
        d[:2] = fwd[:2]
    return d


@dataclass
class CompatibilityResidual:
    field: np.ndarray
    max: float
    mean: float


def compatibility_residual(state, H=None):
    """Discrete ``max(|D_y H11 - D_x H12|, |D_y H12 - D_x H22|)`` on the grid.

    Central differences in x, second-order one-sided differences in y.
    """
    H11, H12, H22 = h_fields(state) if H is None else H
    dx, dy = state.grid.dx, state.grid.dy
    r1 = _d_dy_onesided(H11, dy) - _d_dx(H12, dx)
    r2 = _d_dy_onesided(H12, dy) - _d_dx(H22, dx)
    res = np.fmax(np.abs(r1), np.abs(r2))
    ok = np.isfinite(res)
    if not np.any(ok):
        return CompatibilityResidual(res, math.nan, math.nan)
    return CompatibilityResidual(res, float(np.max(res[ok])), float(np.mean(res[ok])))


def state_from_function(fields, a1, dx, dy, levels, alpha, metric, lam=0.0):
    """``StateGrid`` sampled from ``fields(X, Y) -> dict(f, p, q, k1, k2)`` on a trapezoid.

    Used to feed exact solutions to the grid diagnostics.
    """
    n = int(round(a1 / dx))
    grid = TrapezoidGrid(a1, dx / dy, dx, dy, n, levels)
    X, Y = np.meshgrid(grid.x, grid.y)
    vals = fields(X, Y)
    m = grid.mask()
    arrs = {k: np.where(m, np.broadcast_to(np.asarray(vals[k], float), X.shape), np.nan)
            for k in ("f", "p", "q", "k1", "k2")}
    return StateGrid(grid, arrs["f"], arrs["p"], arrs["q"], arrs["k1"], arrs["k2"],
                     AlphaField.from_spec(alpha), metric, lam, levels)
