import math

import numpy as np
import pytest

from curverecon.fields import Function1D
from curverecon.presets import Cylinder, Sphere
from curverecon.verification import (OracleError, convergence_study, direction_projection_check,
                                     fd_derivatives, fd_shape_operator, observed_orders,
                                     reduced_ode_oracle, trace_projected_k1_line)


def _grid(h, n, m=None):
    x = h * np.arange(-n, n + 1)
    y = h * np.arange(-(m or n), (m or n) + 1)
    return x, y, *np.meshgrid(x, y)


def test_fd_derivatives_exact_on_quadratics():
    x, y, X, Y = _grid(0.1, 5)
    f = 1 + 2 * X - Y + 0.5 * X * X + 3 * X * Y - Y * Y
    p, q, fxx, fxy, fyy = fd_derivatives(f, 0.1, 0.1, onesided_y=True)
    assert np.nanmax(np.abs(p[1:-1] - (2 + X + 3 * Y)[1:-1])) <= 1e-12
    assert np.nanmax(np.abs(q[:-1] - (-1 + 3 * X - 2 * Y)[:-1])) <= 1e-12
    assert np.nanmax(np.abs(fxx - 1)) <= 1e-10 and np.nanmax(np.abs(fyy[:-1] + 2)) <= 1e-10
    assert np.nanmax(np.abs(fxy[:-1] - 3)) <= 1e-10
    assert np.isnan(p[:, 0]).all() and np.isfinite(q[0, 1:-1]).all()


def test_plane_has_zero_curvature():
    x, y, X, Y = _grid(0.05, 10)
    pd, _ = fd_shape_operator(0.3 * X - 0.2 * Y + 1, x, y)
    assert np.nanmax(np.abs(pd.k1)) <= 1e-12 and np.nanmax(np.abs(pd.k2)) <= 1e-12


def test_sphere_curvatures():
    x, y, X, Y = _grid(1e-3, 20)
    pd, _ = fd_shape_operator(Sphere(2.0).f(X, Y), x, y)
    assert np.nanmax(np.abs(pd.k1 - 0.5)) <= 1e-5 and np.nanmax(np.abs(pd.k2 - 0.5)) <= 1e-5


@pytest.mark.parametrize("alpha", [1.0, 0.5])
def test_cylinder_curvatures_and_direction(alpha):
    x, y, X, Y = _grid(1 / 256, 128, 32)
    f = Cylinder(0.1, alpha).f(X, Y)
    pd, _ = fd_shape_operator(f, x, y, alpha=alpha)
    assert np.nanmax(np.abs(pd.k1 - 0.1)) <= 1e-6 and np.nanmax(np.abs(pd.k2)) <= 1e-6
    chk = direction_projection_check(f, x, y, alpha)
    assert not chk.vacuous and chk.max_angle <= 1e-6
    # the check is sensitive to a wrong alpha
    assert direction_projection_check(f, x, y, alpha + 0.1).max_angle > 1e-2


def test_direction_check_vacuous_on_sphere():
    x, y, X, Y = _grid(1e-2, 20)
    chk = direction_projection_check(Sphere(2.0).f(X, Y), x, y, 1.0, umbilic_skip=1e-3)
    assert chk.vacuous and chk.n_umbilic > 0 and math.isnan(chk.max_angle)


def test_traced_lines_follow_cylinder_rulings():
    x, y, X, Y = _grid(1 / 128, 64, 16)
    alpha = 0.5
    f = Cylinder(0.1, alpha).f(X, Y)
    tr = trace_projected_k1_line(f, x, y, alpha, 0.0)
    # the top row has no centred y-differences
    assert len(tr) == len(y) - 1
    assert np.max(np.abs(tr - alpha * (y[:-1] - y[0]))) <= 1e-7


def test_shape_operator_input_validation():
    with pytest.raises(OracleError):
        fd_shape_operator(np.zeros((3, 3)), np.arange(4.0), np.arange(3.0))
    with pytest.raises(OracleError):
        fd_shape_operator(np.zeros((3, 4)), np.array([0, 1, 2, 4.0]), np.arange(3.0))


def test_reduced_ode_oracle_zero_and_circle():
    u = np.linspace(-0.5, 0.5, 11)
    assert np.all(reduced_ode_oracle(0.0, 0.0, 1.0, 1.0, u) == 0)
    # kbar2 = 0: the base curve is the circle of curvature kbar1
    k = 0.1
    w = reduced_ode_oracle(Function1D.constant(k), 0.0, 1.0, 1.0, u)
    assert np.max(np.abs(w - k * u / np.sqrt(1 - k * k * u * u))) <= 1e-10


def test_observed_orders():
    hs = [0.1, 0.05, 0.025]
    o = observed_orders(hs, [h ** 2 for h in hs])
    assert [r["order"] for r in o] == pytest.approx([2, 2])


def test_convergence_study_cylinder():
    rep = convergence_study("cylinder-march", [1 / 32, 1 / 64, 1 / 128], workers=2)
    assert rep.verdict["converges"]
    assert 1.7 <= rep.convergence_orders[-1]["order"] <= 2.3
    assert set(rep.to_dict()) >= {"problem", "grids", "errors", "convergence_orders", "verdict"}


def test_convergence_study_zero_data_skips_fit():
    rep = convergence_study("zero-march", [1 / 16, 1 / 32, 1 / 64])
    assert rep.verdict["converges"] and rep.notes and not rep.convergence_orders


def test_convergence_study_pc_fourth_order():
    rep = convergence_study("cylinder-pc", [1 / 4, 1 / 8, 1 / 16])
    assert rep.verdict["converges"]


@pytest.mark.parametrize("grids,match", [([0.1, 0.05], "three"), ([0.1, 0.05, 0.03], "geometric"),
                                         ([0.1, 0.2, 0.4], "geometric")])
def test_convergence_study_grid_validation(grids, match):
    with pytest.raises(ValueError, match=match):
        convergence_study("cylinder-march", grids)
    with pytest.raises(ValueError, match="unknown"):
        convergence_study("nope", [0.1, 0.05, 0.025])
