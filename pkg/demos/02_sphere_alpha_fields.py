"""Umbilic data do not care which direction field they are marched along.

On a sphere every direction is principal, so k1 = k2 = 1/4 with three
different alpha fields must all give back the same sphere of radius 4.
"""
import warnings

import numpy as np

from curverecon.fields import AlphaField, BoundaryData
from curverecon.geometry import euclidean_metric
from curverecon.march import march_cauchy
from curverecon.presets import Sphere
from curverecon.strip import ThresholdWarning

data = BoundaryData.constant(0.25, 0.25, 1.0)
sphere = Sphere(4.0)
graphs = {}
for spec in (1.0, 2.0, "1+0.1*x"):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ThresholdWarning)
        # K = 3 leaves room for the steeper characteristics of alpha = 2
        st = march_cauchy(data, euclidean_metric(), AlphaField.from_spec(spec), 1 / 64, K=3.0)
    X, Y = np.meshgrid(st.x, st.y)
    graphs[spec] = st.f
    print(f"alpha = {spec!s:8}  max|f - sphere| = {np.nanmax(np.abs(st.f - sphere.f(X, Y))):.3e}")

base = graphs[1.0]
for spec, f in graphs.items():
    print(f"alpha = {spec!s:8}  max|f - f(alpha=1)| = {np.nanmax(np.abs(f - base)):.1e}")
