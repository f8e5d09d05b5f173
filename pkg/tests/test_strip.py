import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curverecon.fields import AlphaField, BoundaryData
from curverecon.geometry import euclidean_metric, spherical_metric
from curverecon.presets import Cylinder, Sphere
from curverecon.strip import (StripError, ThresholdWarning, gronwall_bound, smallness_threshold,
                              solve_initial_strip)


def test_zero_data_gives_zero_strip():
    sol = solve_initial_strip(BoundaryData.constant(0, 0, 1.0), euclidean_metric(), AlphaField.constant(1.0))
    assert np.max(np.abs(sol.f0)) == 0 and np.max(np.abs(sol.p0)) == 0 and np.max(np.abs(sol.q0)) == 0
    assert sol.within_threshold and not sol.warnings


def test_cylinder_strip_is_exact():
    with pytest.warns(ThresholdWarning):
        sol = solve_initial_strip(BoundaryData.constant(0.1, 0.0, 1.0), euclidean_metric(),
                                  AlphaField.constant(1.0))
    cyl = Cylinder(0.1, 1.0)
    p, q = cyl.pq(sol.x, 0 * sol.x)
    assert np.max(np.abs(sol.f0 - cyl.f(sol.x, 0 * sol.x))) <= 1e-14
    assert np.max(np.abs(sol.p0 - p)) <= 1e-13 and np.max(np.abs(sol.q0 - q)) <= 1e-13
    assert not sol.within_threshold and sol.threshold < 0.1


def test_sphere_strip_is_exact():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ThresholdWarning)
        sol = solve_initial_strip(BoundaryData.constant(0.25, 0.25, 1.0), euclidean_metric(),
                                  AlphaField.constant(2.0))
    s = Sphere(4.0)
    assert np.max(np.abs(sol.f0 - s.f(sol.x, 0 * sol.x))) <= 1e-14


def test_strict_mode_raises():
    with pytest.raises(StripError):
        solve_initial_strip(BoundaryData.constant(0.1, 0.0, 1.0), euclidean_metric(),
                            AlphaField.constant(1.0), strict=True)


def test_threshold_formula():
    assert smallness_threshold(1.0, 2.0, 0.5, 1.0) == pytest.approx(1 / 8 * math.exp(-0.5))
    assert smallness_threshold(0.1, 1e-9, 1e-3, 1.0) == 0.1
    with pytest.raises(ValueError):
        smallness_threshold(0.1, 1.0, 0.0, 1.0)


def test_general_metric_strip_small_data():
    m = spherical_metric(slant=1.0)
    sol = solve_initial_strip(BoundaryData.constant(1e-4, 5e-5, 0.4), m, AlphaField.constant(0.0))
    assert sol.within_threshold and sol.norm < sol.r
    # with zero data the strip stays on the plane
    z = solve_initial_strip(BoundaryData.constant(0.0, 0.0, 0.4), m, AlphaField.constant(0.0))
    assert np.max(np.abs(z.f0)) <= 1e-15


@settings(max_examples=25)
@given(st.integers(0, 10_000))
def test_gronwall_bound_linear_pairs(seed):
    rng = np.random.default_rng(seed)
    M = rng.uniform(-1, 1, (3, 3))
    c, e = rng.uniform(-1, 1, 3), rng.uniform(-0.2, 0.2, 3)
    y0, z0 = rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3)
    Lbar = np.max(np.sum(np.abs(M), axis=1))
    res = gronwall_bound(lambda t, y: M @ y + c, lambda t, z: M @ z + c + e, y0, z0, 0.8, Lbar,
                         float(np.max(np.abs(e))), n_steps=400)
    assert res.verdict
