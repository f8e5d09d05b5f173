"""Fixed-step classical Runge-Kutta integration."""
import numpy as np


def rk4_path(rhs, t0, y0, h, n, guard=None):
    """Integrate ``y' = rhs(t, y)`` for ``n`` steps of size ``h`` (``h`` may be negative).

    Returns ``(t, y)`` with ``y`` of shape ``(n + 1,) + y0.shape``. ``guard(t, y)``
    may raise to abort the integration.
    """
    y = np.asarray(y0, dtype=float)
    ts = t0 + h * np.arange(n + 1)
    out = np.empty((n + 1,) + y.shape)
    out[0] = y
    for i in range(n):
        t = ts[i]
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = y
        if guard is not None:
            guard(ts[i + 1], y)
    return ts, out
