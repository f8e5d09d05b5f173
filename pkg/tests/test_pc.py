import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curverecon.fields import Function1D
from curverecon.pc import (PCConfig, PCError, fixed_point_solve, in_region, invert_projection,
                           pc_curvatures, reconstruct_given_gamma1, smallness_report, to_graph)
from curverecon.presets import Cylinder, c_sag
from curverecon.verification import fd_shape_operator, reduced_ode_oracle


@pytest.fixture(scope="module")
def pc_solution():
    return fixed_point_solve(PCConfig(1.0, 1.0, 0.8, 0.05, 0.02))


def _lattice(a, alpha=1.0, h=1 / 64):
    n = int(a * max(1, 1 / alpha) / h)
    t = h * np.arange(-n, n + 1)
    return np.meshgrid(t, t)


def test_config_validation():
    with pytest.raises(ValueError):
        PCConfig(1.0, 1.0, 1.2, 0, 0)
    with pytest.raises(ValueError):
        PCConfig(-1.0, 1.0, 0.5, 0, 0)
    assert PCConfig(1.0, 1.0, 0.6, 0, 0).a_solve == pytest.approx(0.8)


def test_plane_from_given_base_curve():
    sol = reconstruct_given_gamma1(0.0, 0.0, PCConfig(1.0, 1.0, 0.8, 0.0, 0.0))
    X, Y = _lattice(0.8)
    assert np.nanmax(np.abs(to_graph(sol, X, Y, outside="nan"))) == 0


@pytest.mark.parametrize("alpha", [1.0, 0.6])
def test_cylinder_from_given_base_curve(alpha):
    c = 0.1
    sol = reconstruct_given_gamma1(c, 0.0, PCConfig(alpha, 1.0, 0.8, c, 0.0))
    X, Y = _lattice(0.8, alpha)
    f = to_graph(sol, X, Y, outside="nan")
    assert np.nanmax(np.abs(f - Cylinder(c, alpha).f(X, Y))) <= 1e-8
    u = np.linspace(-0.5, 0.5, 7)
    k1, k2 = pc_curvatures(sol, u, 0.1 * u)
    assert np.allclose(k1, c, atol=1e-12) and np.allclose(k2, 0, atol=1e-12)


def test_cylinder_across_gamma_from_profile():
    """kbar2 alone gives the cylinder ruled along (alpha, 1)."""
    c, alpha = 0.2, 1.0
    sol = reconstruct_given_gamma1(0.0, c, PCConfig(alpha, 1.0, 0.8, 0.0, c))
    h = 1 / 256
    x = h * np.arange(-128, 129)
    y = h * np.arange(-3, 4)
    X, Y = np.meshgrid(x, y)
    f = to_graph(sol, X, Y, outside="nan")
    s = math.sqrt(alpha ** 2 + 1)
    assert np.nanmax(np.abs(f - c_sag(c, (X - alpha * Y) / s))) <= 1e-10
    pd, _ = fd_shape_operator(f, x, y, alpha=alpha)
    assert np.nanmax(np.abs(pd.k1[3])) <= 1e-6
    assert np.nanmax(np.abs(pd.k2[3] - c)) <= 1e-4


def test_zero_data_fixed_point_is_immediate():
    sol = fixed_point_solve(PCConfig(1.5, 1.0, 0.8, 0.0, 0.0))
    assert sol.iters == 0
    s = math.sqrt(1.5 ** 2 + 1)
    assert np.max(np.abs(sol.X - s / 1.5 * sol.u)) <= 1e-15 and np.all(sol.w == 0)


def test_fixed_point_solution_invariants(pc_solution):
    sol = pc_solution
    assert sol.iters <= 50
    assert sol.contraction_factor < 0.9
    d = sol.distances
    assert all(b < a for a, b in zip(d, d[1:]))
    assert sol.residual_X <= 1e-12 and sol.residual_w <= 1e-12
    assert np.max(np.abs(sol.X)) <= sol.a1 and np.max(np.abs(sol.w)) <= 1
    assert all(v["ok"] for v in sol.thresholds.values())
    assert sol.dT_sup < 1
    # lower bound of the denominator rho k1 + Phi
    s = sol.s
    den = sol.profile.rho_at(sol.X / s) * 0.05 + sol.profile.phi_at(sol.X / s)
    assert np.min(den) >= 1 / math.sqrt(2)
    # a'priori window for w
    kbar = 0.05
    win = math.sqrt(2) * kbar * np.abs(sol.u) / np.sqrt(1 - 2 * kbar ** 2 * sol.u ** 2)
    assert np.all(np.abs(sol.w) <= win + 1e-15)


def test_fixed_point_matches_reduced_ode(pc_solution):
    sol = pc_solution
    u = sol.u[::64]
    wo = reduced_ode_oracle(Function1D.constant(0.05), Function1D.constant(0.02), 1.0, 1.0, u)
    assert np.max(np.abs(wo - sol.w[::64])) <= 1e-8


def test_fixed_point_with_varying_data():
    cfg = PCConfig(0.8, 1.0, 0.8, "0.05+0.02*x", "0.02-0.01*x^2")
    sol = fixed_point_solve(cfg)
    u = sol.u[::50]
    assert np.max(np.abs(reduced_ode_oracle(cfg.kbar1, cfg.kbar2, 0.8, 1.0, u) - sol.w[::50])) <= 1e-8
    # k2 is constant along the base-curve direction
    h = np.linspace(-0.3, 0.3, 5)
    k2a = pc_curvatures(sol, 0.2, h)[1]
    k2b = pc_curvatures(sol, -0.4, h)[1]
    assert np.array_equal(k2a, k2b)


def test_resampled_graph_curvatures_on_gamma(pc_solution):
    h = 1 / 512
    x = h * np.arange(-256, 257)
    y = h * np.arange(-3, 4)
    X, Y = np.meshgrid(x, y)
    f = to_graph(pc_solution, X, Y)
    pd, _ = fd_shape_operator(f, x, y, alpha=1.0)
    ok = np.isfinite(pd.k1[3])
    assert np.max(np.abs(pd.k1[3][ok] - 0.05)) <= 0.005 * 0.05
    assert np.max(np.abs(pd.k2[3][ok] - 0.02)) <= 0.005 * 0.02


def test_param_and_projection_round_trip(pc_solution):
    sol = pc_solution
    X, Y = _lattice(0.8, h=1 / 16)
    m = in_region(sol.alpha, 0.8, X, Y)
    X, Y = X[m], Y[m]
    u, h = invert_projection(sol, X, Y)
    x2, y2, _ = sol.param(u, h)
    assert np.max(np.abs(x2 - X)) <= 1e-13 and np.max(np.abs(y2 - Y)) <= 1e-13


def test_outside_region(pc_solution):
    with pytest.raises(PCError):
        to_graph(pc_solution, np.array([0.9]), np.array([0.9]))
    f = to_graph(pc_solution, np.array([0.0, 0.9]), np.array([0.0, 0.9]), outside="nan")
    assert f[0] == 0 and np.isnan(f[1])
    assert in_region(1.0, 0.8, 0.0, 0.0) and not in_region(1.0, 0.8, 0.9, 0.9)


def test_homothety():
    s = 2.0
    a = fixed_point_solve(PCConfig(1.0, 1.0, 0.8, 0.05, 0.02))
    b = fixed_point_solve(PCConfig(1.0, s, s * 0.8, 0.05 / s, 0.02 / s))
    X, Y = _lattice(0.4, h=0.1)
    m = in_region(1.0, 0.8, X, Y)
    X, Y = X[m], Y[m]
    assert np.max(np.abs(to_graph(b, s * X, s * Y) - s * to_graph(a, X, Y))) <= 1e-12


def test_large_data_is_gated():
    with pytest.raises(PCError, match="smallness"):
        fixed_point_solve(PCConfig(1.0, 1.0, 0.8, 0.9, 0.5))
    with pytest.warns(Warning):
        sol = fixed_point_solve(PCConfig(1.0, 1.0, 0.8, 0.9, 0.5, force=True))
    assert sol.warnings


def test_focal_point_rejected():
    sol = reconstruct_given_gamma1(0.05, 0.0, PCConfig(1.0, 1.0, 0.8, 0.05, 0.0))
    sol.profile.rho_at = lambda h: 25.0 + 0 * np.asarray(h)
    with pytest.raises(PCError):
        pc_curvatures(sol, 0.0, 0.0)


@settings(max_examples=20)
@given(st.floats(0.3, 3.0), st.floats(0.0, 0.2), st.floats(1.0, 3.0))
def test_smallness_report_monotone(alpha, kbar, a1):
    rep = smallness_report(alpha, a1, 0.5 * a1, kbar)
    assert all(np.isfinite(v["limit"]) and v["limit"] > 0 for v in rep.values())
    if not all(v["ok"] for v in rep.values()):
        rep2 = smallness_report(alpha, a1, 0.5 * a1, 2 * kbar)
        assert not all(v["ok"] for v in rep2.values())
