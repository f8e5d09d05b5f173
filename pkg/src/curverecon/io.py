"""CSV, OBJ and JSON artifacts.

Every artifact carries a short provenance header: the config hash and the
achieved quantities passed in ``meta``. Output is deterministic: floats are
written with ``repr`` and nodes in row-major order.
"""
import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

REPORT_SCHEMA_VERSION = "1.0"


def config_hash(config):
    """SHA-256 of the canonical JSON form of ``config`` (first 16 hex digits)."""
    text = json.dumps(to_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def to_jsonable(obj):
    """Plain JSON types; NaN and infinities become ``None``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _header_lines(meta):
    return [f"# {k}: {json.dumps(to_jsonable(v), sort_keys=True)}" for k, v in (meta or {}).items()]


def _fmt(v):
    return repr(float(v))


def write_csv(path, columns, meta=None):
    """Write equally long 1-D ``columns`` (a dict name -> array) with ``#`` header lines."""
    names = list(columns)
    cols = [np.asarray(columns[n], float).ravel() for n in names]
    path = Path(path)
    with path.open("w", newline="") as fh:
        for line in _header_lines(meta):
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path):
    """Columns of a CSV written by ``write_csv`` (comment lines skipped)."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.lstrip().startswith("#")) if r]
    names = [n.strip() for n in rows[0]]
    data = np.array([[float(v) for v in r] for r in rows[1:]], float).reshape(-1, len(names))
    return {n: data[:, i] for i, n in enumerate(names)}


def write_state_csv(state, path, meta=None):
    """Valid trapezoid nodes as ``x, y, f, p, q, k1, k2``."""
    return write_csv(path, state.nodes(), meta)


def write_curve_csv(curve, path, meta=None):
    return write_csv(path, {"u": curve.u, "v": curve.v, "w": curve.w, "kappa": curve.kappa}, meta)


def read_curve_csv(path):
    from .curves import PlanarCurveGraph
    c = read_csv(path)
    return PlanarCurveGraph(c["u"], c["v"], c["w"], c["kappa"])


def write_uh_csv(sol, path, n_u=65, n_h=65, meta=None):
    """PC surface on a ``(u, h)`` lattice: ``u, h, x, y, z, k1, k2``."""
    from .pc import pc_curvatures
    U, H = np.meshgrid(np.linspace(-sol.u_max, sol.u_max, n_u), np.linspace(-sol.h_max, sol.h_max, n_h))
    x, y, z = sol.param(U, H)
    k1, k2 = pc_curvatures(sol, U, H)
    return write_csv(path, {"u": U, "h": H, "x": x, "y": y, "z": z, "k1": k1, "k2": k2}, meta)


def mesh_from_grid(x, y, f):
    """Vertices and triangles of the graph sampled as ``f[j, i] = f(x_i, y_j)``.

    Nodes with non-finite ``f`` are dropped together with the cells touching
    them. Each cell is split along its shorter diagonal (ties: the diagonal
    through its lower-left corner).
    """
    x, y, f = np.asarray(x, float), np.asarray(y, float), np.asarray(f, float)
    if f.shape != (len(y), len(x)) or f.size == 0:
        raise ValueError("f must have shape (len(y), len(x)) and be nonempty")
    X, Y = np.meshgrid(x, y)
    ok = np.isfinite(f)
    index = -np.ones(f.shape, int)
    index[ok] = np.arange(ok.sum())
    verts = np.column_stack([X[ok], Y[ok], f[ok]])
    P = np.stack([X, Y, f], axis=-1)
    faces = []
    for j in range(len(y) - 1):
        for i in range(len(x) - 1):
            a, b, c, d = index[j, i], index[j, i + 1], index[j + 1, i], index[j + 1, i + 1]
            if min(a, b, c, d) < 0:
                continue
            main = np.sum((P[j + 1, i + 1] - P[j, i]) ** 2)
            anti = np.sum((P[j + 1, i] - P[j, i + 1]) ** 2)
            if main <= anti:
                faces += [(a, b, d), (a, d, c)]
            else:
                faces += [(a, b, c), (b, d, c)]
    return verts, np.array(faces, int).reshape(-1, 3)


def export_mesh(x, y, f, path, meta=None):
    """Write the sampled graph as a Wavefront OBJ triangle mesh."""
    verts, faces = mesh_from_grid(x, y, f)
    lines = _header_lines(meta)
    lines += [f"v {_fmt(a)} {_fmt(b)} {_fmt(c)}" for a, b, c in verts]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in faces]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_obj(path):
    verts, faces = [], []
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(v) for v in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(v.split("/")[0]) - 1 for v in parts[1:4]])
    return np.array(verts).reshape(-1, 3), np.array(faces, int).reshape(-1, 3)


def write_report(path, kind, body, config=None):
    """JSON report ``{"schema_version", "kind", "config_hash", ...body}``."""
    doc = {"schema_version": REPORT_SCHEMA_VERSION, "kind": kind,
           "config_hash": config_hash(config) if config is not None else None}
    doc.update(body)
    path = Path(path)
    path.write_text(json.dumps(to_jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n")
    return path
