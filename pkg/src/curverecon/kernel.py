"""Compatibility-system kernel for general metrics.

The partial derivatives of ``H_ij(x, y, f, p, q, alpha; k1, k2)`` that enter
the compatibility vector ``b`` are taken by forward-mode automatic
differentiation (jax, double precision). The direction field enters as an
input variable so that its derivatives are applied by the chain rule.

Importing this module enables 64-bit floats in jax.
"""
from dataclasses import dataclass
import weakref

import numpy as np
import jax
import jax.numpy as jnp

from .geometry import (christoffel_from_derivatives, graph_first_form, graph_lower_terms,
                       h_coefficients, h_euclidean, source_terms_euclidean)

jax.config.update("jax_enable_x64", True)


@dataclass
class KernelOutput:
    """Per-node quantities needed by the marcher."""
    H11: np.ndarray
    H12: np.ndarray
    H22: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    b1: np.ndarray = None
    b2: np.ndarray = None


def _build(metric):
    comp = metric.components

    def gmat(x):
        g11, g12, g22, g33 = comp(x[0], x[1], x[2], xp=jnp)
        z = 0.0 * g11
        return jnp.stack([jnp.stack([g11, g12, z]), jnp.stack([g12, g22, z]), jnp.stack([z, z, g33])])

    def gamma(x):
        g = gmat(x)
        dg = jax.jacfwd(gmat)(x)
        return christoffel_from_derivatives(jnp.linalg.inv(g), dg, xp=jnp)

    def hvals(z, k1, k2):
        x1, x2, f, p, q, a = z[0], z[1], z[2], z[3], z[4], z[5]
        X = jnp.stack([x1, x2, f])
        g11, g12, g22, g33 = comp(x1, x2, f, xp=jnp)
        E, F, G, delta, _ = graph_first_form(g11, g12, g22, g33, p, q, xp=jnp)
        L1, M1, N1 = graph_lower_terms(gamma(X), p, q)
        hc = h_coefficients(E, F, G, delta, L1, M1, N1, a)
        H = jnp.stack(hc.values(k1, k2))
        A = jnp.stack([hc.h11_1, hc.h11_2, hc.h12_1, hc.h12_2])
        return H, (H, A, jnp.stack([E, F, G]))

    def node(x1, x2, f, p, q, a, ax, ay, k1, k2):
        z = jnp.stack([x1, x2, f, p, q, a])
        J, (H, A, EFG) = jax.jacfwd(hvals, has_aux=True)(z, k1, k2)
        H11, H12, H22 = H[0], H[1], H[2]
        dx = J[:, 0] + J[:, 5] * ax
        dy = J[:, 1] + J[:, 5] * ay
        df, dp, dq = J[:, 2], J[:, 3], J[:, 4]
        b1 = (dx[1] - dy[0] + dp[1] * H11 + dq[1] * H12 - dp[0] * H12 - dq[0] * H22
              + df[1] * p - df[0] * q)
        b2 = (dy[1] - dx[2] + dp[1] * H12 + dq[1] * H22 - dp[2] * H11 - dq[2] * H12
              + df[1] * q - df[2] * p)
        # A k_y + B k_x + b = 0 with A = [[-h11_1, -h11_2], [h12_1, h12_2]]
        a11, a12, a21, a22 = -A[0], -A[1], A[2], A[3]
        det = a11 * a22 - a12 * a21
        psi1 = -(a22 * b1 - a12 * b2) / det
        psi2 = -(-a21 * b1 + a11 * b2) / det
        E, F, G = EFG[0], EFG[1], EFG[2]
        lam1 = -(a * F + G) / (a * E + F)
        return jnp.stack([H11, H12, H22, lam1, a, psi1, psi2, E, F, G, b1, b2])

    def strip_rhs(x1, s, a, k1, k2):
        H, _ = hvals(jnp.stack([x1, 0.0 * x1, s[0], s[1], s[2], a]), k1, k2)
        return jnp.stack([s[1], H[0], H[1]])

    def strip_run(s0, x0, h, a, k1, k2):
        # a, k1, k2 have shape (n, 3): values at t, t + h/2, t + h of each step
        def step(carry, inp):
            s, t = carry
            aa, kk1, kk2 = inp
            r1 = strip_rhs(t, s, aa[0], kk1[0], kk2[0])
            r2 = strip_rhs(t + h / 2, s + h / 2 * r1, aa[1], kk1[1], kk2[1])
            r3 = strip_rhs(t + h / 2, s + h / 2 * r2, aa[1], kk1[1], kk2[1])
            r4 = strip_rhs(t + h, s + h * r3, aa[2], kk1[2], kk2[2])
            s = s + h / 6 * (r1 + 2 * r2 + 2 * r3 + r4)
            return (s, t + h), s
        _, path = jax.lax.scan(step, (s0, x0), (a, k1, k2))
        return path

    return jax.jit(jax.vmap(node)), jax.jit(strip_run)


_CACHE = weakref.WeakKeyDictionary()


def _compiled(metric):
    fns = _CACHE.get(metric)
    if fns is None:
        fns = _build(metric)
        _CACHE[metric] = fns
    return fns


def _kernel_for(metric):
    return _compiled(metric)[0]


def integrate_strip_general(metric, h, n, alpha0, kbar1, kbar2):
    """RK4 path of the strip system from ``x1 = 0`` with ``n`` steps of size ``h``.

    ``alpha0``, ``kbar1``, ``kbar2`` are callables of ``x1``. Returns an array
    of shape ``(n + 1, 3)``.
    """
    t = h * np.arange(n)
    st = np.stack([t, t + h / 2, t + h], axis=1)
    vals = [np.broadcast_to(np.asarray(fn(st), float), st.shape) for fn in (alpha0, kbar1, kbar2)]
    path = _compiled(metric)[1](jnp.zeros(3), 0.0, h, *[jnp.asarray(v) for v in vals])
    return np.concatenate([np.zeros((1, 3)), np.asarray(path)])


def evaluate_general(metric, x, y, f, p, q, alpha, alpha_x, alpha_y, k1, k2, pad=0):
    """Evaluate the AD kernel on 1-D arrays of nodes."""
    args = [np.atleast_1d(np.asarray(v, dtype=float)) for v in
            (x, y, f, p, q, alpha, alpha_x, alpha_y, k1, k2)]
    args = np.broadcast_arrays(*args)
    n = args[0].size
    # pad to a power of two so that jit compiles once per size bucket
    size = max(8, pad, 1 << (n - 1).bit_length())
    padded = [jnp.asarray(np.concatenate([a.ravel(), np.full(size - n, a.ravel()[-1])])) for a in args]
    out = np.asarray(_kernel_for(metric)(*padded))[:n]
    shape = args[0].shape
    return KernelOutput(*[out[:, i].reshape(shape) for i in range(12)])


def evaluate_euclidean(x, y, f, p, q, alpha, alpha_x, alpha_y, k1, k2, check=True):
    """Closed-form counterpart of :func:`evaluate_general` for the Euclidean metric."""
    H11, H12, H22 = h_euclidean(p, q, alpha, k1, k2)
    src = source_terms_euclidean(p, q, alpha, alpha_x, alpha_y, k1, k2, check=check)
    return KernelOutput(H11, H12, H22, src.lambda1, alpha + 0.0 * p, src.psi1, src.psi2,
                        1 + p * p, p * q, 1 + q * q)


def evaluate(metric, x, y, f, p, q, alpha, alpha_x, alpha_y, k1, k2, pad=0):
    if metric.is_euclidean:
        return evaluate_euclidean(x, y, f, p, q, alpha, alpha_x, alpha_y, k1, k2, check=False)
    return evaluate_general(metric, x, y, f, p, q, alpha, alpha_x, alpha_y, k1, k2, pad=pad)


def source_terms_general(metric, state, alpha_field):
    """``(psi1, psi2)`` for a state dict with keys x, y, f, p, q, k1, k2."""
    x, y = np.asarray(state["x"], float), np.asarray(state["y"], float)
    a = alpha_field(x, y)
    ax, ay = alpha_field.gradient(x, y)
    out = evaluate_general(metric, x, y, state["f"], state["p"], state["q"], a, ax, ay,
                           state["k1"], state["k2"])
    return out.psi1, out.psi2
