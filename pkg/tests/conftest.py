import warnings

import numpy as np
import pytest
import sympy as sp
from hypothesis import HealthCheck, settings

from curverecon.fields import AlphaField, BoundaryData
from curverecon.geometry import euclidean_metric, metric_from_expressions
from curverecon.march import march_cauchy
from curverecon.strip import ThresholdWarning

settings.register_profile("repo", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def quiet_march(*args, **kwargs):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ThresholdWarning)
        return march_cauchy(*args, **kwargs)


@pytest.fixture(scope="session")
def cylinder_runs():
    """March solutions of the c = 0.1, alpha = 1 cylinder on three grids."""
    data = BoundaryData.constant(0.1, 0.0, 1.0)
    return {n: quiet_march(data, euclidean_metric(), AlphaField.constant(1.0), 1 / n)
            for n in (64, 128, 256)}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def _fermi(order):
    """Euclidean space in Fermi coordinates about a surface of revolution."""
    x1, x2, x3 = sp.symbols("x1 x2 x3", real=True)
    u = x1 if order == 0 else x2
    phi = 2 + sp.Rational(3, 10) * u + sp.Rational(1, 10) * u ** 2
    psi = u + sp.Rational(1, 5) * u ** 3
    ph1, ps1 = sp.diff(phi, u), sp.diff(psi, u)
    E0 = ph1 ** 2 + ps1 ** 2
    ku = (ph1 * sp.diff(psi, u, 2) - sp.diff(phi, u, 2) * ps1) / E0 ** sp.Rational(3, 2)
    kv = ps1 / (phi * sp.sqrt(E0))
    gu, gv = E0 * (1 - x3 * ku) ** 2, phi ** 2 * (1 - x3 * kv) ** 2
    g11, g22 = (gu, gv) if order == 0 else (gv, gu)
    lo, hi = ((-0.5, -1, -0.2), (0.5, 1, 0.2)) if order == 0 else ((-1, -0.5, -0.2), (1, 0.5, 0.2))
    m = metric_from_expressions(g11, 0, g22, 1, lo, hi, name=f"fermi{order}")
    d11 = sp.lambdify((x1, x2, x3), sp.diff(g11, x2))
    d22 = sp.lambdify((x1, x2, x3), sp.diff(g22, x1))
    return m, d11, d22


@pytest.fixture(scope="session")
def fermi_metric():
    """Builder ``order -> (metric, dE/dx2, dG/dx1)`` with F = 0 by construction."""
    return _fermi
