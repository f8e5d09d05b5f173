"""Riemannian 3-space with ``g13 = g23 = 0`` and graph surfaces ``x3 = f(x1, x2)``.

The formulas in this module are written once against an array namespace
``xp`` (numpy or jax.numpy) so that the numpy evaluators used for checking and
the automatically differentiated kernel in :mod:`curverecon.kernel` share the
same algebra.

Conventions
-----------
* Christoffel symbols are stored as ``Gamma[k, i, j]`` (upper index first)
  with the usual factor one half.
* The unit normal of a graph is the one with positive third contravariant
  component.
* A direction field is the slope ``alpha`` of ``alpha * d/dx + d/dy``.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import sympy as sp

from .expressions import CompiledExpression, parse_expression

UMBILIC_TOL = 1e-10
SINGULAR_TOL = 1e-9


class DomainError(ValueError):
    """Point outside the coordinate box of a metric."""


class SingularGraphError(ValueError):
    """The first fundamental form of the graph degenerates."""


# ---------------------------------------------------------------------------
# metric fields


@dataclass(frozen=True)
class MetricField:
    """Block-diagonal metric ``g11, g12, g22, g33`` on a coordinate box.

    ``components(x1, x2, x3, xp=np)`` returns the four components broadcast to
    the input shape. ``christoffel(x1, x2, x3)`` is an optional analytic
    override returning an array of shape ``(3, 3, 3) + shape``.
    """
    components: Callable
    lo: tuple = (-np.inf, -np.inf, -np.inf)
    hi: tuple = (np.inf, np.inf, np.inf)
    christoffel: Optional[Callable] = None
    kind: str = "general"
    name: str = "custom"
    umbilic_lambda: Optional[float] = None
    expressions: Optional[tuple] = field(default=None, compare=False)

    @property
    def is_euclidean(self):
        return self.kind == "euclidean"

    def check_domain(self, x1, x2, x3):
        pts = np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in (x1, x2, x3)])
        for i, v in enumerate(pts):
            finite = np.isfinite(v)
            if np.any((v[finite] < self.lo[i]) | (v[finite] > self.hi[i])):
                raise DomainError(
                    f"coordinate x{i + 1} leaves [{self.lo[i]}, {self.hi[i]}] of metric {self.name!r}")

    def matrix(self, x1, x2, x3):
        """Full 3x3 metric with shape ``(3, 3) + shape``."""
        g11, g12, g22, g33 = self.components(x1, x2, x3)
        z = np.zeros_like(g11)
        return np.array([[g11, g12, z], [g12, g22, z], [z, z, g33]])


def metric_from_expressions(g11, g12, g22, g33, lo, hi, name="custom",
                            umbilic_lambda=None, check_points=5):
    """Build a metric from expression strings (or sympy expressions) in x1, x2, x3.

    Christoffel symbols are obtained by symbolic differentiation.
    """
    variables = ("x1", "x2", "x3")
    exprs = [e if isinstance(e, sp.Expr) else parse_expression(str(e), variables)
             for e in (g11, g12, g22, g33)]
    exprs = [sp.sympify(e) for e in exprs]
    comps = [CompiledExpression(e, variables) for e in exprs]

    def components(x1, x2, x3, xp=np):
        return tuple(c(x1, x2, x3, xp=xp) for c in comps)

    syms = [sp.Symbol(v, real=True) for v in variables]
    z = sp.Integer(0)
    gm = sp.Matrix([[exprs[0], exprs[1], z], [exprs[1], exprs[2], z], [z, z, exprs[3]]])
    ginv = gm.inv()
    gamma_exprs = []
    for k in range(3):
        for i in range(3):
            for j in range(3):
                gamma_exprs.append(sum(
                    ginv[k, l] * (sp.diff(gm[j, l], syms[i]) + sp.diff(gm[i, l], syms[j])
                                  - sp.diff(gm[i, j], syms[l])) for l in range(3)) / 2)
    gamma_fns = [CompiledExpression(e, variables) for e in gamma_exprs]

    def christoffel(x1, x2, x3):
        vals = [fn(x1, x2, x3) for fn in gamma_fns]
        return np.array(vals).reshape((3, 3, 3) + np.shape(vals[0]))

    metric = MetricField(components, tuple(float(v) for v in lo), tuple(float(v) for v in hi),
                         christoffel, "general", name, umbilic_lambda, tuple(exprs))
    # positive definiteness on a coarse lattice of the box
    grid = [np.linspace(max(l, -1e3), min(h, 1e3), check_points) for l, h in zip(metric.lo, metric.hi)]
    X = np.meshgrid(*grid, indexing="ij")
    c = metric.components(*X)
    if not (np.all(c[0] > 0) and np.all(c[0] * c[2] - c[1] ** 2 > 0) and np.all(c[3] > 0)):
        raise ValueError(f"metric {name!r} is not positive definite on its box")
    return metric


def euclidean_metric():
    def components(x1, x2, x3, xp=np):
        one = 1.0 + 0.0 * (x1 + x2 + x3) if xp is not np else \
            np.ones(np.broadcast_shapes(np.shape(x1), np.shape(x2), np.shape(x3)))
        zero = 0.0 * one
        return one, zero, one, one

    def christoffel(x1, x2, x3):
        shape = np.broadcast_shapes(np.shape(x1), np.shape(x2), np.shape(x3))
        return np.zeros((3, 3, 3) + shape)

    return MetricField(components, christoffel=christoffel, kind="euclidean",
                       name="euclidean", umbilic_lambda=0.0)


def spherical_metric(slant=0.0):
    """Spherical coordinates shifted so that the plane theta = pi/2 is x3 = 0.

    ``x1 = rho - 1``, ``x2 = phi - slant * x1``, ``x3 = theta - pi/2``. The
    plane x3 = 0 is totally geodesic (lambda = 0). A non-zero ``slant`` makes
    the coordinate lines of x1 oblique to the circles rho = const, which keeps
    the direction field alpha = 0 (the circles) away from the singular set.
    """
    b = sp.nsimplify(slant) if slant == int(slant) else sp.Float(slant)
    x1, x2, x3 = sp.symbols("x1 x2 x3", real=True)
    s2 = (1 + x1) ** 2 * sp.cos(x3) ** 2
    return metric_from_expressions(1 + b ** 2 * s2, b * s2, s2, (1 + x1) ** 2,
                                   lo=(-0.5, -1.5, -0.6), hi=(0.5, 1.5, 0.6),
                                   name="spherical" if slant == 0 else f"spherical(slant={slant})",
                                   umbilic_lambda=0.0)


def spherical_raw_metric():
    """Plain spherical coordinates ``(rho, phi, theta)``."""
    x1, x2, x3 = sp.symbols("x1 x2 x3", real=True)
    return metric_from_expressions(sp.Integer(1), sp.Integer(0), x1 ** 2 * sp.sin(x3) ** 2, x1 ** 2,
                                   lo=(0.2, -np.pi, 0.1), hi=(3.0, np.pi, np.pi - 0.1),
                                   name="spherical-raw")


def sphere_shell_metric():
    """Coordinates near the unit sphere: ``x1 = phi``, ``x2 = latitude``, ``x3 = rho - 1``.

    The plane x3 = 0 is the unit sphere, totally umbilical with lambda = -1
    for the outward normal.
    """
    x1, x2, x3 = sp.symbols("x1 x2 x3", real=True)
    return metric_from_expressions((1 + x3) ** 2 * sp.cos(x2) ** 2, sp.Integer(0), (1 + x3) ** 2,
                                   sp.Integer(1), lo=(-1.5, -1.0, -0.5), hi=(1.5, 1.0, 0.5),
                                   name="sphere-shell", umbilic_lambda=-1.0)


METRIC_PRESETS = {
    "euclidean": euclidean_metric,
    "spherical": spherical_metric,
    "spherical-raw": spherical_raw_metric,
    "sphere-shell": sphere_shell_metric,
}


def get_metric(spec):
    """Metric from a preset name, a ``MetricField`` or a dict.

    The dict form is ``{"preset": name, ...kwargs}`` or
    ``{"g11": expr, "g12": expr, "g22": expr, "g33": expr, "lo": [...], "hi": [...]}``.
    """
    if isinstance(spec, MetricField):
        return spec
    if isinstance(spec, str):
        if spec not in METRIC_PRESETS:
            raise ValueError(f"unknown metric preset {spec!r}; choose from {sorted(METRIC_PRESETS)}")
        return METRIC_PRESETS[spec]()
    spec = dict(spec)
    if "preset" in spec:
        name = spec.pop("preset")
        return METRIC_PRESETS[name](**spec)
    return metric_from_expressions(spec["g11"], spec.get("g12", "0"), spec["g22"], spec["g33"],
                                   spec.get("lo", (-1, -1, -1)), spec.get("hi", (1, 1, 1)),
                                   name=spec.get("name", "custom"),
                                   umbilic_lambda=spec.get("lambda"))


# ---------------------------------------------------------------------------
# Christoffel symbols


def christoffel_from_derivatives(ginv, dg, xp=np):
    """``Gamma[k, i, j]`` from the inverse metric and ``dg[a, b, c] = d_c g_ab``."""
    # S[i, j, l] = d_i g_jl + d_j g_il - d_l g_ij
    S = xp.swapaxes(xp.swapaxes(dg, 0, 2), 1, 2) + xp.swapaxes(dg, 1, 2) - dg
    return 0.5 * xp.einsum("kl...,ijl...->kij...", ginv, S)


def christoffels(metric, x1, x2, x3, method="auto"):
    """Christoffel symbols of the second kind, shape ``(3, 3, 3) + shape``.

    ``method="auto"`` uses the analytic override when the metric has one and
    central differences with step ``eps**(1/3) * max(1, |x|)`` otherwise.
    """
    x1, x2, x3 = np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in (x1, x2, x3)])
    metric.check_domain(x1, x2, x3)
    if method == "analytic" or (method == "auto" and metric.christoffel is not None):
        if metric.christoffel is None:
            raise ValueError(f"metric {metric.name!r} has no analytic Christoffel symbols")
        return np.asarray(metric.christoffel(x1, x2, x3), dtype=float)
    pts = [x1, x2, x3]
    g = metric.matrix(*pts)
    dg = np.empty((3, 3, 3) + x1.shape)
    for c in range(3):
        h = np.finfo(float).eps ** (1 / 3) * np.maximum(1.0, np.abs(pts[c]))
        up = list(pts)
        dn = list(pts)
        up[c] = pts[c] + h
        dn[c] = pts[c] - h
        dg[:, :, c] = (metric.matrix(*up) - metric.matrix(*dn)) / (2 * h)
    ginv = np.moveaxis(np.linalg.inv(np.moveaxis(g, (0, 1), (-2, -1))), (-2, -1), (0, 1))
    return christoffel_from_derivatives(ginv, dg)


# ---------------------------------------------------------------------------
# fundamental forms of a graph


@dataclass
class FundamentalForms:
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    L: np.ndarray
    M: np.ndarray
    N: np.ndarray
    delta: np.ndarray
    L1: np.ndarray
    M1: np.ndarray
    N1: np.ndarray
    normal: np.ndarray  # contravariant, shape (3,) + shape


def graph_first_form(g11, g12, g22, g33, p, q, xp=np):
    E = g11 + g33 * p * p
    F = g12 + g33 * p * q
    G = g22 + g33 * q * q
    det2 = g11 * g22 - g12 * g12
    delta = xp.sqrt((E * G - F * F) / (det2 * g33))
    return E, F, G, delta, det2


def graph_lower_terms(Gam, p, q):
    """Metric parts ``L1, M1, N1`` of ``delta * (L, M, N) - (fxx, fxy, fyy)``.

    With ``C = Gamma^3 - p Gamma^1 - q Gamma^2`` and tangent vectors
    ``X1 = (1, 0, p)``, ``X2 = (0, 1, q)`` these are ``C(X1, X1)``,
    ``C(X1, X2)`` and ``C(X2, X2)``.
    """
    def C(i, j):
        return Gam[2][i][j] - p * Gam[0][i][j] - q * Gam[1][i][j]
    L1 = C(0, 0) + 2 * p * C(0, 2) + p * p * C(2, 2)
    M1 = C(0, 1) + q * C(0, 2) + p * C(1, 2) + p * q * C(2, 2)
    N1 = C(1, 1) + 2 * q * C(1, 2) + q * q * C(2, 2)
    return L1, M1, N1


def fundamental_forms(metric, x1, x2, f, p, q, fxx, fxy, fyy, gamma=None):
    """First and second fundamental forms of the graph at ``(x1, x2, f)``.

    Raises :class:`SingularGraphError` when ``EG - F^2`` is not positive.
    """
    g11, g12, g22, g33 = metric.components(x1, x2, f)
    if gamma is None:
        gamma = christoffels(metric, x1, x2, f)
    E, F, G, delta, det2 = graph_first_form(g11, g12, g22, g33, np.asarray(p, float), np.asarray(q, float))
    D = E * G - F * F
    if np.any(~(D > 1e-14 * np.abs(E * G))):
        raise SingularGraphError("first fundamental form is degenerate (EG - F^2 <= 0)")
    L1, M1, N1 = graph_lower_terms(gamma, p, q)
    L = (fxx + L1) / delta
    M = (fxy + M1) / delta
    N = (fyy + N1) / delta
    n3 = 1.0 / (delta * g33)
    n1 = -(g22 * p - g12 * q) / (delta * det2)
    n2 = -(g11 * q - g12 * p) / (delta * det2)
    return FundamentalForms(E, F, G, L, M, N, delta, L1, M1, N1, np.array([n1, n2, n3]))


# ---------------------------------------------------------------------------
# principal curvatures


@dataclass
class PrincipalData:
    k1: np.ndarray
    k2: np.ndarray
    dir1: np.ndarray  # coordinate components, shape (2,) + shape
    dir2: np.ndarray
    alpha: np.ndarray  # slope dir1[0] / dir1[1]
    umbilic: np.ndarray


def first_form_inner(forms, u, v):
    return forms.E * u[0] * v[0] + forms.F * (u[0] * v[1] + u[1] * v[0]) + forms.G * u[1] * v[1]


def principal_curvatures(forms, alpha=None, umbilic_tol=UMBILIC_TOL):
    """Eigenpairs of the shape operator ``I^{-1} II``.

    Without ``alpha`` the pair is ordered ``k1 >= k2``. With ``alpha`` the
    first pair is the one whose direction makes the smaller angle (in the
    first fundamental form) with ``alpha * d/dx + d/dy``. At umbilic points
    ``dir1`` is that reference direction (or ``d/dx`` if none is given).
    """
    E, F, G, L, M, N = (np.asarray(v, float) for v in (forms.E, forms.F, forms.G, forms.L, forms.M, forms.N))
    D = E * G - F * F
    H = (E * N + G * L - 2 * F * M) / (2 * D)
    K = (L * N - M * M) / D
    disc = np.sqrt(np.maximum(H * H - K, 0.0))
    ka, kb = H + disc, H - disc
    umb = (ka - kb) <= umbilic_tol * np.maximum(1.0, np.abs(H))
    # null vector of the row of (II - k I) with the larger norm
    r1 = (L - ka * E, M - ka * F)
    r2 = (M - ka * F, N - ka * G)
    use1 = np.hypot(*r1) >= np.hypot(*r2)
    da = np.array([np.where(use1, -r1[1], -r2[1]), np.where(use1, r1[0], r2[0])])
    if alpha is not None:
        ref = np.array(np.broadcast_arrays(np.asarray(alpha, float), np.ones_like(E)))
    else:
        ref = np.array([np.ones_like(E), np.zeros_like(E)])
    da = np.where(umb, ref, da)
    db = np.array([-(F * da[0] + G * da[1]), E * da[0] + F * da[1]])
    k1, k2, d1, d2 = ka, kb, da, db
    if alpha is not None:
        def cos2(d):
            ip = first_form_inner(forms, d, ref)
            return ip * ip / (first_form_inner(forms, d, d) * first_form_inner(forms, ref, ref))
        swap = (cos2(db) > cos2(da)) & ~umb
        k1, k2 = np.where(swap, kb, ka), np.where(swap, ka, kb)
        d1, d2 = np.where(swap, db, da), np.where(swap, da, db)
        sgn = np.where(first_form_inner(forms, d1, ref) < 0, -1.0, 1.0)
        d1 = d1 * sgn
    k1 = np.where(umb, H, k1)
    k2 = np.where(umb, H, k2)
    d1 = d1 / np.hypot(d1[0], d1[1])
    d2 = d2 / np.hypot(d2[0], d2[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(d1[1] != 0, d1[0] / np.where(d1[1] != 0, d1[1], 1.0), np.inf)
    return PrincipalData(k1, k2, d1, d2, slope, umb)


def euler_normal_curvature(V, data, forms):
    """Normal curvature along the coordinate vector ``V`` from Euler's formula."""
    V = np.asarray(V, dtype=float)
    IVV = first_form_inner(forms, V, V)
    if np.any(IVV <= 0):
        raise ValueError("direction vector must be non-zero")
    c2 = first_form_inner(forms, V, data.dir1) ** 2 / (IVV * first_form_inner(forms, data.dir1, data.dir1))
    return c2 * data.k1 + (1 - c2) * data.k2


# ---------------------------------------------------------------------------
# H-coefficients and characteristic speeds


@dataclass
class HCoefficients:
    """``H_ij = h_ij_1 * k1 + h_ij_2 * k2 + h_ij_0``."""
    h11_1: np.ndarray
    h11_2: np.ndarray
    h12_1: np.ndarray
    h12_2: np.ndarray
    h22_1: np.ndarray
    h22_2: np.ndarray
    h11_0: np.ndarray
    h12_0: np.ndarray
    h22_0: np.ndarray

    # H_21 is H_12 by definition
    @property
    def h21_1(self):
        return self.h12_1

    @property
    def h21_2(self):
        return self.h12_2

    def values(self, k1, k2):
        return (self.h11_1 * k1 + self.h11_2 * k2 + self.h11_0,
                self.h12_1 * k1 + self.h12_2 * k2 + self.h12_0,
                self.h22_1 * k1 + self.h22_2 * k2 + self.h22_0)


def h_coefficients(E, F, G, delta, L1, M1, N1, alpha):
    a = alpha
    D = E * G - F * F
    I1 = a * a * E + 2 * a * F + G
    aEF = a * E + F
    aFG = a * F + G
    return HCoefficients(delta * aEF * aEF / I1, delta * D / I1,
                         delta * aEF * aFG / I1, -delta * a * D / I1,
                         delta * aFG * aFG / I1, delta * a * a * D / I1,
                         -L1, -M1, -N1)


def h_coefficients_general(forms, alpha):
    return h_coefficients(forms.E, forms.F, forms.G, forms.delta, forms.L1, forms.M1, forms.N1, alpha)


def h_values(metric, x1, x2, f, p, q, alpha, k1, k2, gamma=None):
    """``(H11, H12, H22)`` for any metric, evaluated with numpy."""
    g11, g12, g22, g33 = metric.components(x1, x2, f)
    if gamma is None:
        gamma = christoffels(metric, x1, x2, f)
    E, F, G, delta, _ = graph_first_form(g11, g12, g22, g33, np.asarray(p, float), np.asarray(q, float))
    L1, M1, N1 = graph_lower_terms(gamma, p, q)
    return h_coefficients(E, F, G, delta, L1, M1, N1, alpha).values(k1, k2)


def h_euclidean(p, q, alpha, k1, k2):
    """Closed-form ``(H11, H12, H22)`` for the Euclidean metric."""
    return h_coefficients_euclidean(p, q, alpha, k1, k2)[2]


def h_coefficients_euclidean(p, q, alpha, k1=None, k2=None):
    """Closed-form Euclidean coefficients in the slopes alone.

    Returns ``(HCoefficients, delta1)`` or, when ``k1, k2`` are given,
    ``(HCoefficients, delta1, (H11, H12, H22))``, where
    ``delta1 = (alpha p + q)^2 + alpha^2 + 1``.
    """
    p, q, a = (np.asarray(v, float) for v in (p, q, alpha))
    W2 = 1 + p * p + q * q
    W = np.sqrt(W2)
    aEF = a * (1 + p * p) + p * q
    aFG = a * p * q + 1 + q * q
    d1 = (a * p + q) ** 2 + a * a + 1
    z = np.zeros(np.broadcast(p, q, a).shape)
    hc = HCoefficients(W * aEF * aEF / d1, W * W2 / d1, W * aEF * aFG / d1, -a * W * W2 / d1,
                       W * aFG * aFG / d1, a * a * W * W2 / d1, z, z, z)
    if k1 is None:
        return hc, d1
    return hc, d1, hc.values(k1, k2)


def characteristic_speeds(E, F, G, alpha):
    """``(lambda1, lambda2) = (-(alpha F + G) / (alpha E + F), alpha)``."""
    return -(alpha * F + G) / (alpha * E + F), alpha + 0.0 * E


def singular_mask(E, F, alpha, tol=SINGULAR_TOL):
    """Nodes where ``alpha E + F`` is numerically zero."""
    return np.abs(alpha * E + F) < tol * (1 + np.abs(alpha) * E + np.abs(F))


@dataclass
class EuclideanSource:
    c1: np.ndarray
    c2: np.ndarray
    c3: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray
    lambda1: np.ndarray


def source_terms_euclidean(p, q, alpha, alpha_x, alpha_y, k1, k2, check=True):
    """Characteristic form ``k_i,y + lambda_i k_i,x = psi_i`` in Euclidean space.

    ``psi1 = -(c1 + c3 k1)(k2 - k1)`` and ``psi2 = -c2 (k2 - k1)`` with

    * ``c1 = -(1 + p^2 + q^2)(alpha alpha_x + alpha_y) / ((alpha E + F) delta1)``
    * ``c2 = ((alpha p q + q^2 + 1) alpha_x - (alpha E + F) alpha_y) / delta1``
    * ``c3 = W (alpha q - p) / (alpha E + F)``

    where ``E = 1 + p^2``, ``F = p q``, ``W^2 = 1 + p^2 + q^2`` and
    ``delta1 = (alpha p + q)^2 + alpha^2 + 1``.
    """
    a = alpha
    W2 = 1 + p * p + q * q
    W = np.sqrt(W2)
    E = 1 + p * p
    F = p * q
    aEF = a * E + F
    aFG = a * F + 1 + q * q
    if check and np.any(singular_mask(E, F, a)):
        raise SingularGraphError("alpha E + F vanishes: characteristic speed is unbounded")
    d1 = (a * p + q) * (a * p + q) + a * a + 1
    c1 = -W2 * (a * alpha_x + alpha_y) / (aEF * d1)
    c2 = (aFG * alpha_x - aEF * alpha_y) / d1
    c3 = W * (a * q - p) / aEF
    dk = k2 - k1
    return EuclideanSource(c1, c2, c3, -(c1 + c3 * k1) * dk, -c2 * dk, -aFG / aEF)


# ---------------------------------------------------------------------------
# totally umbilical coordinate plane


@dataclass
class UmbilicReport:
    gamma_residual: float
    quadratic_residual: float
    lam: float
    tol: float

    @property
    def passed(self):
        return max(self.gamma_residual, self.quadratic_residual) <= self.tol


def umbilical_identities(metric, lam=None, samples=None, n=9, tol=1e-8):
    """Check that ``x3 = 0`` is totally umbilical with constant curvature ``lam``.

    Two residuals are reported on sample points of the plane:

    * ``max |Gamma^3_ij - lam g_ij / sqrt(g33)|`` over ``i, j <= 2``;
    * how far ``lam`` is from being a double root of
      ``det2 k^2 - sqrt(g33) (g11 G22 + g22 G11 - 2 g12 G12) k + g33 (G11 G22 - G12^2)``
      with ``Gij = Gamma^3_ij``, measured as ``max(|q(lam)|, |q'(lam)|) / det2``.
    """
    if lam is None:
        lam = metric.umbilic_lambda
    if lam is None:
        raise ValueError("no umbilic constant given for this metric")
    if samples is None:
        lo = [max(metric.lo[i], -1.0) for i in range(2)]
        hi = [min(metric.hi[i], 1.0) for i in range(2)]
        X1, X2 = np.meshgrid(np.linspace(lo[0], hi[0], n), np.linspace(lo[1], hi[1], n), indexing="ij")
        samples = (X1.ravel(), X2.ravel())
    x1, x2 = (np.asarray(s, float) for s in samples)
    x3 = np.zeros_like(x1)
    g11, g12, g22, g33 = metric.components(x1, x2, x3)
    Gam = christoffels(metric, x1, x2, x3)
    rg = np.sqrt(g33)
    res = max(np.max(np.abs(Gam[2, 0, 0] - lam * g11 / rg)),
              np.max(np.abs(Gam[2, 0, 1] - lam * g12 / rg)),
              np.max(np.abs(Gam[2, 1, 1] - lam * g22 / rg)))
    det2 = g11 * g22 - g12 * g12
    bq = rg * (g11 * Gam[2, 1, 1] + g22 * Gam[2, 0, 0] - 2 * g12 * Gam[2, 0, 1])
    cq = g33 * (Gam[2, 0, 0] * Gam[2, 1, 1] - Gam[2, 0, 1] ** 2)
    qval = det2 * lam * lam - bq * lam + cq
    qder = 2 * det2 * lam - bq
    quad = float(np.max(np.maximum(np.abs(qval), np.abs(qder)) / det2))
    return UmbilicReport(float(res), quad, float(lam), tol)
