"""Direction fields and data along the initial curve."""
import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline, RectBivariateSpline

from .expressions import compile_expression


class AlphaField:
    """Slope ``alpha(x, y)`` of the prescribed direction ``alpha d/dx + d/dy``.

    Build with :meth:`constant`, :meth:`expression`, :meth:`grid` or
    :meth:`from_spec`. ``gradient`` returns ``(alpha_x, alpha_y)``.
    """

    def __init__(self, value, gradient, kind, description):
        self._value = value
        self._gradient = gradient
        self.kind = kind
        self.description = description

    def __call__(self, x, y):
        return self._value(np.asarray(x, float), np.asarray(y, float))

    def gradient(self, x, y):
        return self._gradient(np.asarray(x, float), np.asarray(y, float))

    @property
    def is_constant(self):
        return self.kind == "constant"

    def __repr__(self):
        return f"AlphaField({self.description})"

    @classmethod
    def constant(cls, c):
        c = float(c)

        def value(x, y):
            return np.full(np.broadcast_shapes(np.shape(x), np.shape(y)), c)

        def grad(x, y):
            z = np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y)))
            return z, z.copy()
        return cls(value, grad, "constant", repr(c))

    @classmethod
    def expression(cls, text):
        ex = compile_expression(text, ("x", "y"))
        if ex.is_constant:
            return cls.constant(float(ex.expr))
        dx, dy = ex.diff("x"), ex.diff("y")
        return cls(lambda x, y: ex(x, y), lambda x, y: (dx(x, y), dy(x, y)), "expression", text)

    @classmethod
    def grid(cls, xs, ys, values):
        """Bicubic spline through ``values[i, j] = alpha(xs[i], ys[j])``."""
        spl = RectBivariateSpline(np.asarray(xs, float), np.asarray(ys, float), np.asarray(values, float))

        def value(x, y):
            x, y = np.broadcast_arrays(x, y)
            return spl.ev(x, y)

        def grad(x, y):
            x, y = np.broadcast_arrays(x, y)
            return spl.ev(x, y, dx=1), spl.ev(x, y, dy=1)
        return cls(value, grad, "grid", f"grid {len(xs)}x{len(ys)}")

    @classmethod
    def from_csv(cls, path):
        """Long-format CSV with columns ``x, y, alpha`` on a tensor grid."""
        rows = _read_csv_columns(path, ("x", "y", "alpha"))
        xs = np.unique(rows["x"])
        ys = np.unique(rows["y"])
        if len(xs) * len(ys) != len(rows["x"]):
            raise ValueError(f"{path}: alpha samples do not form a tensor grid")
        vals = np.full((len(xs), len(ys)), np.nan)
        vals[np.searchsorted(xs, rows["x"]), np.searchsorted(ys, rows["y"])] = rows["alpha"]
        return cls.grid(xs, ys, vals)

    @classmethod
    def from_spec(cls, spec, base_dir=None):
        """Number, expression string, or ``{"csv": path}``."""
        if isinstance(spec, AlphaField):
            return spec
        if isinstance(spec, (int, float)) and not isinstance(spec, bool):
            return cls.constant(spec)
        if isinstance(spec, str):
            return cls.expression(spec)
        if isinstance(spec, dict) and "csv" in spec:
            return cls.from_csv(_resolve(spec["csv"], base_dir))
        raise ValueError(f"cannot build a direction field from {spec!r}")


class Function1D:
    """Scalar function of one variable with first and second derivatives."""

    def __init__(self, fn, d1, d2, description, is_constant=False):
        self.fn, self.d1, self.d2 = fn, d1, d2
        self.description = description
        self.is_constant = is_constant

    def __call__(self, x):
        return self.fn(np.asarray(x, float))

    def __repr__(self):
        return f"Function1D({self.description})"

    @classmethod
    def constant(cls, c):
        c = float(c)

        def fn(x):
            return np.full(np.shape(x), c) if np.ndim(x) else c

        def zero(x):
            return np.zeros(np.shape(x)) if np.ndim(x) else 0.0
        return cls(fn, zero, zero, repr(c), is_constant=True)

    @classmethod
    def expression(cls, text, variable="x"):
        ex = compile_expression(text, (variable,))
        if ex.is_constant:
            return cls.constant(float(ex.expr))
        e1 = ex.diff(variable)
        e2 = e1.diff(variable)
        return cls(lambda x: ex(x), lambda x: e1(x), lambda x: e2(x), text)

    @classmethod
    def samples(cls, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if np.all(y == y[0]):
            return cls.constant(y[0])
        cs = CubicSpline(x, y)
        return cls(lambda t: cs(t), cs.derivative(1), cs.derivative(2), f"spline({len(x)} samples)")

    @classmethod
    def from_callable(cls, fn, d1=None, d2=None, description="callable"):
        h = 1e-5
        if d1 is None:
            def d1(x):
                return (fn(x + h) - fn(x - h)) / (2 * h)
        if d2 is None:
            def d2(x):
                return (fn(x + h) - 2 * fn(x) + fn(x - h)) / (h * h)
        return cls(fn, d1, d2, description)

    @classmethod
    def from_spec(cls, spec, variable="x"):
        if isinstance(spec, Function1D):
            return spec
        if isinstance(spec, (int, float)) and not isinstance(spec, bool):
            return cls.constant(spec)
        if isinstance(spec, str):
            return cls.expression(spec, variable)
        if callable(spec):
            return cls.from_callable(spec)
        raise ValueError(f"cannot build a function from {spec!r}")


@dataclass
class BoundaryData:
    """Principal curvatures prescribed along ``gamma = {y = 0, |x| <= a1}``.

    ``alpha0`` is the direction slope on gamma (taken from the direction
    field when not given) and ``lam`` the umbilic constant of the plane.
    """
    kbar1: Function1D
    kbar2: Function1D
    a1: float
    lam: float = 0.0
    alpha0: Optional[Function1D] = None
    samples: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.kbar1 = Function1D.from_spec(self.kbar1)
        self.kbar2 = Function1D.from_spec(self.kbar2)
        if self.alpha0 is not None:
            self.alpha0 = Function1D.from_spec(self.alpha0)
        if not self.a1 > 0:
            raise ValueError("a1 must be positive")

    @property
    def k0bar(self):
        """``max |kbar_i - lam|`` over gamma."""
        x = self.samples if self.samples is not None else np.linspace(-self.a1, self.a1, 2049)
        return float(max(np.max(np.abs(self.kbar1(x) - self.lam)), np.max(np.abs(self.kbar2(x) - self.lam))))

    @classmethod
    def constant(cls, k1, k2, a1, lam=0.0):
        return cls(Function1D.constant(k1), Function1D.constant(k2), float(a1), float(lam))

    @classmethod
    def from_samples(cls, x, kbar1, kbar2, alpha0=None, lam=0.0):
        x = np.asarray(x, float)
        if np.any(np.diff(x) <= 0):
            raise ValueError("boundary samples must have strictly increasing x1")
        a1 = min(-x[0], x[-1])
        if not a1 > 0:
            raise ValueError("boundary samples must straddle x1 = 0")
        a0 = Function1D.samples(x, alpha0) if alpha0 is not None else None
        return cls(Function1D.samples(x, kbar1), Function1D.samples(x, kbar2), float(a1), float(lam), a0, x)

    @classmethod
    def from_csv(cls, path):
        """CSV with columns ``x1, kbar1, kbar2`` and optional ``alpha0``, ``lambda``."""
        rows = _read_csv_columns(path, ("x1", "kbar1", "kbar2"), optional=("alpha0", "lambda"))
        lam = 0.0
        if "lambda" in rows:
            lam_vals = rows["lambda"]
            if not np.all(lam_vals == lam_vals[0]):
                raise ValueError(f"{path}: lambda must be constant along gamma")
            lam = float(lam_vals[0])
        return cls.from_samples(rows["x1"], rows["kbar1"], rows["kbar2"], rows.get("alpha0"), lam)

    @classmethod
    def from_spec(cls, spec, base_dir=None):
        if isinstance(spec, BoundaryData):
            return spec
        spec = dict(spec)
        if "csv" in spec:
            return cls.from_csv(_resolve(spec["csv"], base_dir))
        return cls(Function1D.from_spec(spec["kbar1"]), Function1D.from_spec(spec["kbar2"]),
                   float(spec["a1"]), float(spec.get("lambda", 0.0)),
                   Function1D.from_spec(spec["alpha0"]) if "alpha0" in spec else None)


def _resolve(path, base_dir):
    import os
    if base_dir is not None and not os.path.isabs(path):
        return os.path.join(base_dir, path)
    return path


def _read_csv_columns(path, required, optional=()):
    with open(path, newline="") as fh:
        reader = csv.DictReader(row for row in fh if not row.lstrip().startswith("#"))
        names = [n.strip() for n in (reader.fieldnames or [])]
        missing = [c for c in required if c not in names]
        if missing:
            raise ValueError(f"{path}: missing column(s) {missing}")
        cols = {c: [] for c in list(required) + [c for c in optional if c in names]}
        for lineno, row in enumerate(reader, start=2):
            row = {k.strip(): v for k, v in row.items() if k is not None}
            for c in cols:
                try:
                    cols[c].append(float(row[c]))
                except (TypeError, ValueError):
                    raise ValueError(f"{path}:{lineno}: bad value {row.get(c)!r} in column {c}") from None
    return {c: np.asarray(v) for c, v in cols.items()}
