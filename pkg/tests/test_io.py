import json
import math

import numpy as np
import pytest

from curverecon import io
from curverecon.curves import curve_from_curvature
from curverecon.presets import Cylinder


def test_obj_of_single_cell(tmp_path):
    path = io.export_mesh([0.0, 1.0], [0.0, 1.0], np.zeros((2, 2)), tmp_path / "m.obj")
    v, f = io.read_obj(path)
    assert v.shape == (4, 3) and f.shape == (2, 3)


def test_obj_nan_nodes_dropped():
    f = np.zeros((3, 3))
    f[1, 1] = np.nan
    v, faces = io.mesh_from_grid([0, 1, 2.0], [0, 1, 2.0], f)
    assert len(v) == 8 and len(faces) == 0
    with pytest.raises(ValueError):
        io.mesh_from_grid([0, 1.0], [0, 1.0], np.zeros((3, 2)))


def test_obj_cylinder_round_trip_is_exact(tmp_path):
    x = np.linspace(-0.5, 0.5, 17)
    y = np.linspace(0, 0.25, 9)
    X, Y = np.meshgrid(x, y)
    z = Cylinder(0.1, 1.0).f(X, Y)
    meta = {"config_hash": "abc", "eps": 0.1}
    p1 = io.export_mesh(x, y, z, tmp_path / "a.obj", meta)
    p2 = io.export_mesh(x, y, z, tmp_path / "b.obj", meta)
    assert p1.read_bytes() == p2.read_bytes()
    v, f = io.read_obj(p1)
    assert np.array_equal(v[:, 2], z.ravel())
    assert len(f) == 2 * 16 * 8
    assert p1.read_text().startswith("# config_hash")


def test_shorter_diagonal_split():
    # the cell is folded along the main diagonal; that diagonal is shorter
    v, f = io.mesh_from_grid([0, 1.0], [0, 1.0], np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert sorted(map(sorted, f.tolist())) == [[0, 1, 3], [0, 2, 3]]


def test_csv_round_trip(tmp_path):
    cols = {"a": np.array([0.1, 1 / 3, -2e-17]), "b": np.array([1.0, np.nan, 3.0])}
    p = io.write_csv(tmp_path / "c.csv", cols, {"config_hash": "x"})
    back = io.read_csv(p)
    assert np.array_equal(back["a"], cols["a"])
    assert np.isnan(back["b"][1])


def test_curve_csv_round_trip(tmp_path):
    c = curve_from_curvature(0.2, 0.5, steps_per_unit=64)
    back = io.read_curve_csv(io.write_curve_csv(c, tmp_path / "c.csv"))
    assert np.array_equal(back.w, c.w) and np.array_equal(back.kappa, c.kappa)


def test_report_json(tmp_path):
    p = io.write_report(tmp_path / "r.json", "march", {"x": math.nan, "arr": np.arange(3)}, {"a": 1})
    doc = json.loads(p.read_text())
    assert doc["schema_version"] == io.REPORT_SCHEMA_VERSION
    assert doc["x"] is None and doc["arr"] == [0, 1, 2]
    assert doc["config_hash"] == io.config_hash({"a": 1})


def test_config_hash_is_canonical():
    assert io.config_hash({"a": 1, "b": [1, 2]}) == io.config_hash({"b": [1, 2], "a": 1})
    assert io.config_hash({"a": 1}) != io.config_hash({"a": 2})
    assert len(io.config_hash({})) == 16
