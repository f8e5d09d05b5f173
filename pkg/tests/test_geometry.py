import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from curverecon import geometry as g
from curverecon.kernel import evaluate_general

floats = lambda lo, hi: st.floats(lo, hi, allow_nan=False, allow_infinity=False)


def forms_for(metric, x1, x2, f, p, q, fxx, fxy, fyy):
    return g.fundamental_forms(metric, x1, x2, f, p, q, fxx, fxy, fyy)


# --- metrics and Christoffel symbols -----------------------------------------

def test_euclidean_christoffels_vanish():
    Gam = g.christoffels(g.euclidean_metric(), 0.3, -0.2, 0.1)
    assert np.all(Gam == 0)


def test_spherical_christoffel_value():
    m = g.spherical_raw_metric()
    Gam = g.christoffels(m, 1.0, 0.0, math.pi / 2)
    # Gamma^rho_{phi phi} = -rho sin^2 theta
    assert Gam[0, 1, 1] == pytest.approx(-1.0, abs=1e-14)


def test_spherical_christoffels_against_symbolic():
    rho, phi, th = sp.symbols("rho phi theta", positive=True)
    gm = sp.diag(1, rho ** 2 * sp.sin(th) ** 2, rho ** 2)
    X = (rho, phi, th)
    ginv = gm.inv()
    sym = [[[sp.simplify(sum(ginv[k, l] * (sp.diff(gm[j, l], X[i]) + sp.diff(gm[i, l], X[j])
                                          - sp.diff(gm[i, j], X[l])) for l in range(3)) / 2)
             for j in range(3)] for i in range(3)] for k in range(3)]
    fn = sp.lambdify(X, sym, "numpy")
    rng = np.random.default_rng(5)
    m = g.spherical_raw_metric()
    for _ in range(100):
        pt = (rng.uniform(0.6, 1.4), rng.uniform(-1, 1), rng.uniform(1.0, 2.1))
        want = np.array(fn(*pt), float)
        num = g.christoffels(m, *pt, method="fd")
        ana = g.christoffels(m, *pt)
        assert np.max(np.abs(num - want)) <= 1e-8
        assert np.max(np.abs(ana - want)) <= 1e-12


def test_christoffels_symmetric_in_lower_indices():
    m = g.spherical_metric(slant=0.7)
    Gam = g.christoffels(m, 0.1, 0.2, 0.05, method="fd")
    assert np.allclose(Gam, np.swapaxes(Gam, 1, 2), atol=1e-12)


def test_domain_check():
    m = g.spherical_metric()
    with pytest.raises(g.DomainError):
        g.christoffels(m, 0.0, 0.0, 5.0)


def test_metric_must_be_positive_definite():
    with pytest.raises(ValueError):
        g.metric_from_expressions("1", "2", "1", "1", (-1, -1, -1), (1, 1, 1))


# --- fundamental forms -------------------------------------------------------

def test_flat_plane_forms():
    F = forms_for(g.euclidean_metric(), 0, 0, 0, 0, 0, 0, 0, 0)
    assert (F.E, F.F, F.G, F.L, F.M, F.N) == (1, 0, 1, 0, 0, 0)
    assert np.allclose(np.ravel(F.normal), [0, 0, 1])


def test_first_form_substitution():
    F = forms_for(g.euclidean_metric(), 0, 0, 0, 1.0, 2.0, 0, 0, 0)
    assert (F.E, F.F, F.G) == (2.0, 2.0, 5.0)
    assert F.delta == pytest.approx(math.sqrt(6))


def test_sphere_second_form_at_origin():
    F = forms_for(g.euclidean_metric(), 0, 0, 0, 0, 0, 0.5, 0, 0.5)
    assert (F.L, F.M, F.N) == (0.5, 0.0, 0.5)


@given(floats(-0.4, 0.4), floats(-1, 1), floats(-0.3, 0.3), floats(-2, 2), floats(-2, 2))
def test_form_invariants_general_metric(x1, x2, f, p, q):
    m = g.spherical_metric(slant=0.8)
    F = forms_for(m, x1, x2, f, p, q, 0.3, -0.1, 0.2)
    g11, g12, g22, g33 = m.components(x1, x2, f)
    assert F.E * F.G - F.F ** 2 >= (g11 * g22 - g12 ** 2) * (1 - 1e-12)
    assert F.delta >= 1 / math.sqrt(g33) * (1 - 1e-12)
    n = np.asarray(F.normal, float).ravel()
    G = np.array([[g11, g12, 0], [g12, g22, 0], [0, 0, g33]])
    assert n @ G @ n == pytest.approx(1.0, rel=1e-12)
    assert n[2] > 0
    # the normal is orthogonal to the tangent vectors (1, 0, p) and (0, 1, q)
    assert np.array([1, 0, p]) @ G @ n == pytest.approx(0, abs=1e-12)
    assert np.array([0, 1, q]) @ G @ n == pytest.approx(0, abs=1e-12)


def test_plane_forms_on_umbilic_base():
    # on x3 = 0 the forms reduce to g and Gamma^3 sqrt(g33)
    m = g.spherical_metric(slant=0.6)
    F = forms_for(m, 0.2, 0.3, 0, 0, 0, 0, 0, 0)
    g11, g12, g22, g33 = m.components(0.2, 0.3, 0.0)
    Gam = g.christoffels(m, 0.2, 0.3, 0.0)
    assert (F.E, F.F, F.G) == pytest.approx((g11, g12, g22))
    assert (F.L, F.M, F.N) == pytest.approx(tuple(Gam[2, i, j] * math.sqrt(g33) for i, j in ((0, 0), (0, 1), (1, 1))),
                                            abs=1e-14)


# --- principal curvatures and Euler's formula --------------------------------

def test_sphere_is_umbilic():
    F = forms_for(g.euclidean_metric(), 0, 0, 0, 0, 0, 0.5, 0, 0.5)
    pd = g.principal_curvatures(F)
    assert pd.k1 == pytest.approx(0.5) and pd.k2 == pytest.approx(0.5) and bool(pd.umbilic)


def test_cylinder_curvatures():
    F = forms_for(g.euclidean_metric(), 0, 0, 0, 0, 0, 0.25, 0, 0)
    pd = g.principal_curvatures(F)
    assert (float(pd.k1), float(pd.k2)) == pytest.approx((0.25, 0.0))


def test_shape_operator_eigenvalues():
    F = g.FundamentalForms(E=2.0, F=0.0, G=1.0, L=3.0, M=1.0, N=1.0, delta=1.0, L1=0, M1=0, N1=0,
                           normal=None)
    pd = g.principal_curvatures(F)
    assert (float(pd.k1), float(pd.k2)) == pytest.approx((2.0, 0.5))


@given(floats(-1.5, 1.5), floats(-1.5, 1.5), floats(-1, 1), floats(-1, 1), floats(-1, 1), floats(-3, 3))
def test_principal_directions(p, q, a, b, c, alpha):
    F = forms_for(g.euclidean_metric(), 0, 0, 0, p, q, a, b, c)
    pd = g.principal_curvatures(F, alpha=alpha)
    Iv = lambda u, v: g.first_form_inner(F, u, v)
    if not pd.umbilic:
        assert abs(Iv(pd.dir1, pd.dir2)) <= 1e-9 * math.sqrt(Iv(pd.dir1, pd.dir1) * Iv(pd.dir2, pd.dir2))
        # eigenvector equation II d = k I d
        for k, d in ((pd.k1, pd.dir1), (pd.k2, pd.dir2)):
            r = (F.L * d[0] + F.M * d[1] - k * (F.E * d[0] + F.F * d[1]),
                 F.M * d[0] + F.N * d[1] - k * (F.F * d[0] + F.G * d[1]))
            assert max(map(abs, r)) <= 1e-9 * (1 + abs(k))
    # Euler's formula returns the principal values on the principal directions
    assert g.euler_normal_curvature(pd.dir1, pd, F) == pytest.approx(pd.k1, abs=1e-12)
    assert g.euler_normal_curvature(pd.dir2, pd, F) == pytest.approx(pd.k2, abs=1e-12)


def test_euler_formula_angle():
    F = forms_for(g.euclidean_metric(), 0, 0, 0, 0, 0, 2.0, 0, 0)
    pd = g.principal_curvatures(F)
    assert g.euler_normal_curvature(np.array([1.0, 1.0]), pd, F) == pytest.approx(1.0)


def test_euler_formula_on_sphere_any_direction(rng):
    R = 3.0
    x, y = 0.4, -0.7
    r = math.sqrt(R * R - x * x - y * y)
    p, q = x / r, y / r
    fxx, fxy, fyy = (R * R - y * y) / r ** 3, x * y / r ** 3, (R * R - x * x) / r ** 3
    F = forms_for(g.euclidean_metric(), x, y, 0, p, q, fxx, fxy, fyy)
    pd = g.principal_curvatures(F)
    for V in rng.normal(size=(20, 2)):
        assert g.euler_normal_curvature(V, pd, F) == pytest.approx(1 / R, rel=1e-12)


def test_euler_rejects_zero_vector():
    F = forms_for(g.euclidean_metric(), 0, 0, 0, 0, 0, 1, 0, 0)
    with pytest.raises(ValueError):
        g.euler_normal_curvature(np.zeros(2), g.principal_curvatures(F), F)


# --- umbilical identities ----------------------------------------------------

def test_umbilical_identities_presets():
    assert g.umbilical_identities(g.euclidean_metric(), 0.0).gamma_residual == 0
    rep = g.umbilical_identities(g.spherical_metric(slant=0.5), 0.0)
    assert rep.passed and rep.gamma_residual <= 1e-14
    rep = g.umbilical_identities(g.sphere_shell_metric())
    assert rep.passed


def test_umbilical_identities_detect_wrong_lambda():
    rep = g.umbilical_identities(g.euclidean_metric(), 0.1)
    assert rep.gamma_residual == pytest.approx(0.1)
    assert not rep.passed


# --- H coefficients ----------------------------------------------------------

def test_h_euclidean_at_flat_state():
    hc, d1 = g.h_coefficients_euclidean(0.0, 0.0, 1.0)
    assert d1 == 2
    assert (hc.h11_1, hc.h11_2, hc.h12_1, hc.h12_2, hc.h22_1, hc.h22_2) == (0.5, 0.5, 0.5, -0.5, 0.5, 0.5)


@given(floats(-5, 5))
def test_h_euclidean_at_flat_state_general_alpha(a):
    hc, _ = g.h_coefficients_euclidean(0.0, 0.0, a)
    assert hc.h11_1 == pytest.approx(a * a / (a * a + 1))
    assert hc.h11_2 == pytest.approx(1 / (a * a + 1))


def test_h_general_matches_closed_form_on_random_states(rng):
    n = 1000
    p, q, a, k1, k2 = rng.uniform(-2, 2, (5, n))
    F = forms_for(g.euclidean_metric(), 0 * p, 0 * p, 0 * p, p, q, 0 * p, 0 * p, 0 * p)
    gen = g.h_coefficients_general(F, a)
    ref, d1 = g.h_coefficients_euclidean(p, q, a)
    for name in ("h11_1", "h11_2", "h12_1", "h12_2", "h22_1", "h22_2"):
        assert np.max(np.abs(getattr(gen, name) - getattr(ref, name))) <= 1e-12
    for name in ("h11_0", "h12_0", "h22_0"):
        assert np.all(getattr(gen, name) == 0)
    assert np.all(ref.h21_1 == ref.h12_1) and np.all(ref.h21_2 == ref.h12_2)
    assert np.all(d1 >= 1)


def test_h_on_umbilic_plane_matches_explicit_formulas():
    m = g.spherical_metric(slant=0.9)
    x1, x2, alpha = 0.15, -0.4, 0.7
    F = forms_for(m, x1, x2, 0, 0, 0, 0, 0, 0)
    hc = g.h_coefficients_general(F, alpha)
    g11, g12, g22, g33 = m.components(x1, x2, 0.0)
    Gam = g.christoffels(m, x1, x2, 0.0)
    d = 1 / math.sqrt(g33)
    den = alpha ** 2 * g11 + 2 * alpha * g12 + g22
    D = g11 * g22 - g12 ** 2
    want = {"h11_1": d * (alpha * g11 + g12) ** 2 / den, "h11_2": d * D / den,
            "h12_1": d * (alpha * g11 + g12) * (alpha * g12 + g22) / den, "h12_2": -d * alpha * D / den,
            "h22_1": d * (alpha * g12 + g22) ** 2 / den, "h22_2": d * alpha ** 2 * D / den,
            "h11_0": -Gam[2, 0, 0] * math.sqrt(g33), "h12_0": -Gam[2, 0, 1] * math.sqrt(g33),
            "h22_0": -Gam[2, 1, 1] * math.sqrt(g33)}
    for k, v in want.items():
        assert getattr(hc, k) == pytest.approx(v, rel=1e-12, abs=1e-14), k


def test_umbilic_data_on_umbilic_plane_gives_zero_H():
    m = g.sphere_shell_metric()
    lam = m.umbilic_lambda
    for alpha in (0.3, 1.0, -2.0):
        F = forms_for(m, 0.2, 0.1, 0, 0, 0, 0, 0, 0)
        H = g.h_coefficients_general(F, alpha).values(lam, lam)
        assert max(abs(float(v)) for v in H) <= 1e-13


def test_characteristic_speeds_and_singular_mask():
    l1, l2 = g.characteristic_speeds(1.0, 0.0, 1.0, 2.0)
    assert (l1, l2) == (-0.5, 2.0)
    assert g.singular_mask(np.array([1.0, 1.0]), np.array([-1.0, 0.0]), 1.0).tolist() == [True, False]


# --- source terms ------------------------------------------------------------

@given(floats(-1, 1), floats(-1, 1), floats(0.2, 3), floats(-1, 1), floats(-1, 1))
def test_constant_alpha_has_no_transport_source(p, q, a, k1, k2):
    s = g.source_terms_euclidean(p, q, a, 0.0, 0.0, k1, k2)
    assert s.c1 == 0 and s.c2 == 0


def test_source_at_flat_state():
    a, ax, ay = 1.3, 0.4, -0.2
    s = g.source_terms_euclidean(0.0, 0.0, a, ax, ay, 0.1, 0.3)
    assert s.c3 == 0
    # the sign is opposite to the one printed in the reference derivation; see notes
    assert s.c1 == pytest.approx(-(a * ax + ay) / ((a * a + 1) * a))


def test_source_singular_denominator():
    with pytest.raises(g.SingularGraphError):
        g.source_terms_euclidean(1.0, -2.0, 1.0, 0.0, 0.0, 0.1, 0.2)  # alpha E + F = 2 - 2


def test_general_source_matches_euclidean_closed_form(rng):
    n = 100
    x, y = rng.uniform(-1, 1, (2, n))
    f = rng.uniform(-0.5, 0.5, n)
    p, q = rng.uniform(-1, 1, (2, n))
    a = rng.uniform(0.3, 2, n)
    ax, ay = rng.uniform(-0.5, 0.5, (2, n))
    k1, k2 = rng.uniform(-1, 1, (2, n))
    out = evaluate_general(g.euclidean_metric(), x, y, f, p, q, a, ax, ay, k1, k2)
    ref = g.source_terms_euclidean(p, q, a, ax, ay, k1, k2)
    assert np.max(np.abs(out.psi1 - ref.psi1)) <= 1e-10
    assert np.max(np.abs(out.psi2 - ref.psi2)) <= 1e-10
    assert np.max(np.abs(out.lambda1 - ref.lambda1)) <= 1e-12


def test_general_source_zero_state():
    m = g.euclidean_metric()
    out = evaluate_general(m, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0)
    assert np.all(out.psi1 == 0) and np.all(out.psi2 == 0)


def test_general_source_umbilic_state_on_space_form():
    # k1 = k2 = lambda on the umbilic plane: every term of b carries k2 - k1
    m = g.sphere_shell_metric()
    lam = m.umbilic_lambda
    out = evaluate_general(m, [0.1, -0.3], [0.2, 0.0], 0.0, 0.0, 0.0, [0.5, 1.5], [0.1, 0.0], [0.0, -0.2],
                           lam, lam)
    assert np.max(np.abs(out.psi1)) <= 1e-12 and np.max(np.abs(out.psi2)) <= 1e-12


@pytest.mark.parametrize("order", [0, 1])
def test_peterson_codazzi_reduction(order, rng, fermi_metric):
    """With F = M = 0 and alpha = 0 the compatibility rows are the Peterson-Codazzi formulas.

    Rows ``-delta E k2_y + b1 = 0`` and ``-delta G k1_x + b2 = 0`` must give
    ``k2_y = (k1 - k2) E_y / (2E)`` and ``k1_x = (k2 - k1) G_x / (2G)``, where
    ``k2`` is the curvature along ``d/dx`` (alpha = 0 puts ``k1`` along ``d/dy``).
    """
    m, d11, d22 = fermi_metric(order)
    n = 100
    lo, hi = np.array(m.lo), np.array(m.hi)
    X = rng.uniform(0.8 * lo[0], 0.8 * hi[0], n)
    Y = rng.uniform(0.8 * lo[1], 0.8 * hi[1], n)
    f = rng.uniform(-0.15, 0.15, n)
    k1, k2 = rng.uniform(-1, 1, (2, n))
    z = np.zeros(n)
    out = evaluate_general(m, X, Y, f, z, z, z, z, z, k1, k2)
    g11, g12, g22, g33 = m.components(X, Y, f)
    assert np.all(g12 == 0) and np.max(np.abs(out.F)) == 0
    delta = 1 / np.sqrt(g33)
    Ey = d11(X, Y, f) + 0 * X
    Gx = d22(X, Y, f) + 0 * X
    r1 = out.b1 / (delta * g11) - (k1 - k2) * Ey / (2 * g11)
    r2 = out.b2 / (delta * g22) - (k2 - k1) * Gx / (2 * g22)
    assert max(np.max(np.abs(r1)), np.max(np.abs(r2))) <= 1e-8
    assert max(np.max(np.abs(Ey)), np.max(np.abs(Gx))) > 0.01  # the identity is not vacuous
