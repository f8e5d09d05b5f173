"""Closed-form fixtures and named problem presets."""
from dataclasses import dataclass
import math

import numpy as np


@dataclass(frozen=True)
class Cylinder:
    """Cylinder ``f = R - sqrt(R^2 - s^2)``, ``s = (alpha x + y) / sqrt(alpha^2 + 1)``.

    Its rulings are orthogonal to ``(alpha, 1)``, so along ``alpha d/dx + d/dy``
    the normal curvature is ``c = 1/R`` (upward normal) and 0 across.
    """
    c: float
    alpha: float = 1.0

    def s(self, x, y):
        return (self.alpha * x + y) / math.sqrt(self.alpha ** 2 + 1)

    def f(self, x, y):
        return c_sag(self.c, self.s(x, y))

    def pq(self, x, y):
        s = self.s(x, y)
        ds = self.c * s / np.sqrt(1 - (self.c * s) ** 2)
        n = math.sqrt(self.alpha ** 2 + 1)
        return ds * self.alpha / n, ds / n


@dataclass(frozen=True)
class Sphere:
    """Lower cap ``f = R - sqrt(R^2 - x^2 - y^2)``; umbilic with curvature ``1/R``."""
    R: float

    def f(self, x, y):
        return self.R - np.sqrt(self.R ** 2 - x * x - y * y)

    def pq(self, x, y):
        r = np.sqrt(self.R ** 2 - x * x - y * y)
        return x / r, y / r


def c_sag(c, s):
    """``(1 - sqrt(1 - c^2 s^2)) / c`` written without cancellation."""
    cs2 = (c * s) ** 2
    return c * s * s / (1 + np.sqrt(1 - cs2))


# Named problems used by the CLI and the demos. Values are plain JSON-like
# dicts so that they can be merged with user configs.
PRESETS = {
    "plane": {
        "mode": "march", "metric": "euclidean", "alpha": 1.0, "a1": 1.0,
        "boundary": {"kbar1": 0.0, "kbar2": 0.0}, "dx": 1 / 64,
    },
    "cylinder": {
        "mode": "march", "metric": "euclidean", "alpha": 1.0, "a1": 1.0,
        "boundary": {"kbar1": 0.1, "kbar2": 0.0}, "dx": 1 / 128,
        "exact": {"kind": "cylinder", "c": 0.1},
    },
    "sphere": {
        "mode": "march", "metric": "euclidean", "alpha": "1+0.1*x", "a1": 1.0,
        "boundary": {"kbar1": 0.25, "kbar2": 0.25}, "dx": 1 / 64, "K": 3.0,
        "exact": {"kind": "sphere", "R": 4.0},
        # the oracle resolves k1 - k2 only to about 1e-6 here, so umbilic
        # detection needs a looser threshold than the default
        "tolerances": {"umbilic": 1e-4},
    },
    "spherical": {
        "mode": "march", "metric": {"preset": "spherical", "slant": 1.0}, "alpha": 0.0,
        "a1": 0.4, "boundary": {"kbar1": 0.05, "kbar2": 0.02}, "dx": 0.4 / 64,
    },
    "pc": {
        "mode": "pc-fixed-point", "alpha": 1.0, "a1": 1.0, "a": 0.8,
        "boundary": {"kbar1": 0.05, "kbar2": 0.02}, "dx": 1 / 128,
    },
}
