import math

import numpy as np
import pytest

from conftest import quiet_march
from curverecon.fields import AlphaField, BoundaryData
from curverecon.geometry import euclidean_metric, spherical_metric
from curverecon.march import TrapezoidGrid, compatibility_residual, state_from_function
from curverecon.presets import Cylinder, Sphere


def _err(state, exact):
    X, Y = np.meshgrid(state.x, state.y)
    return float(np.nanmax(np.abs(state.f - exact(X, Y))))


def test_trapezoid_geometry():
    g = TrapezoidGrid(1.0, 2.0, 0.25, 0.1, 4, 3)
    assert g.span(2) == (2, 6)
    assert g.cfl == pytest.approx(0.8)
    m = g.mask()
    assert m.sum() == 9 + 7 + 5 + 3


def test_zero_data_stays_zero():
    st = quiet_march(BoundaryData.constant(0, 0, 1.0), euclidean_metric(), AlphaField.constant(1.0), 1 / 32)
    assert st.completed
    for v in st.fields().values():
        assert np.nanmax(np.abs(v)) <= 1e-12


def test_cylinder_second_order(cylinder_runs):
    cyl = Cylinder(0.1, 1.0)
    errs = [_err(cylinder_runs[n], cyl.f) for n in (64, 128, 256)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert all(1.7 <= o <= 2.3 for o in orders)
    st = cylinder_runs[256]
    assert st.completed and st.eps_achieved == pytest.approx(st.grid.eps)
    assert np.nanmax(np.abs(st.k2)) <= 1e-8 and np.nanmax(np.abs(st.k1 - 0.1)) <= 1e-8


def test_nan_outside_trapezoid(cylinder_runs):
    st = cylinder_runs[64]
    assert np.all(np.isfinite(st.f[st.mask])) and np.all(np.isnan(st.f[~st.mask]))
    nodes = st.nodes()
    assert set(nodes) == {"x", "y", "f", "p", "q", "k1", "k2"} and len(nodes["x"]) == st.mask.sum()


@pytest.mark.parametrize("scheme", ["cir", "pc2"])
def test_schemes_agree_on_sphere(scheme):
    st = quiet_march(BoundaryData.constant(0.25, 0.25, 1.0), euclidean_metric(),
                     AlphaField.from_spec("1+0.1*x"), 1 / 64, K=3.0, scheme=scheme)
    assert _err(st, Sphere(4.0).f) <= 1e-7


def test_sphere_alpha_invariance():
    data = BoundaryData.constant(0.25, 0.25, 1.0)
    sols = [quiet_march(data, euclidean_metric(), AlphaField.from_spec(a), 1 / 64, K=3.0)
            for a in (1.0, 2.0, "1+0.1*x")]
    for s in sols[1:]:
        assert np.nanmax(np.abs(s.f - sols[0].f)) <= 1e-12


def test_norm_breach_stops_march():
    from curverecon.strip import solve_initial_strip
    data = BoundaryData.constant(1.0, 1.0, 0.5)
    with pytest.warns(Warning):
        strip = solve_initial_strip(data, euclidean_metric(), AlphaField.constant(0.5), nodes=np.arange(-32, 33) / 64)
    # only |q| counts towards the norm; it grows away from gamma
    st = quiet_march(data, euclidean_metric(), AlphaField.constant(0.5), 1 / 64, strip=strip, r=0.1,
                     norm_weights=(0, 0, 1))
    assert st.stop_reason.startswith("norm")
    assert 0 < st.levels_done < st.grid.levels
    assert np.all(np.isnan(st.f[st.levels_done + 1:]))
    assert any("stopped early" in m for m in st.warnings)


def test_speed_growth_stops_march_at_stencil_limit():
    data = BoundaryData.constant(1.0, 1.0, 0.5)
    st = quiet_march(data, euclidean_metric(), AlphaField.constant(0.5), 1 / 64, K=2.02, cfl=1.0)
    assert st.stop_reason.startswith("cfl")
    assert st.K_observed > 2.02


def test_strict_march_raises_on_early_stop():
    from curverecon.march import MarchError, march_cauchy
    from curverecon.strip import solve_initial_strip
    data = BoundaryData.constant(1.0, 1.0, 0.5)
    x = np.arange(-32, 33) / 64
    with pytest.warns(Warning):
        strip = solve_initial_strip(data, euclidean_metric(), AlphaField.constant(0.5), nodes=x)
    with pytest.raises(MarchError):
        march_cauchy(data, euclidean_metric(), AlphaField.constant(0.5), 1 / 64, strip=strip, r=0.1,
                     norm_weights=(0, 0, 1), strict=True)


def test_general_metric_march_runs():
    st = quiet_march(BoundaryData.constant(0.05, 0.02, 0.4), spherical_metric(slant=1.0), AlphaField.constant(0.0),
                     0.4 / 32)
    assert st.completed and np.isfinite(st.K_observed)
    assert compatibility_residual(st).max < 1e-2


def test_compatibility_residual_second_order_on_exact_sphere():
    S = Sphere(4.0)

    def fields(X, Y):
        p, q = S.pq(X, Y)
        return dict(f=S.f(X, Y), p=p, q=q, k1=0.25, k2=0.25)
    res = [compatibility_residual(state_from_function(fields, 1.0, 1 / n, 0.5 / n, n // 2, "1+0.1*x",
                                                      euclidean_metric())).max for n in (32, 64, 128)]
    orders = [math.log2(a / b) for a, b in zip(res, res[1:])]
    assert all(1.8 <= o <= 2.2 for o in orders)
