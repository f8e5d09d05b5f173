"""Command line entry point.

    curverecon <mode> --config <file> [--out <dir>] [--force] [--workers N]

Exit codes: 0 pass, 2 threshold warnings, 1 solver or verification failure,
64 invalid configuration, 74 file I/O failure.
"""
import argparse
import json
import math
import os
from pathlib import Path
import sys
import warnings

import jsonschema
import numpy as np

from . import io
from .curves import CurveError
from .fields import AlphaField, BoundaryData, Function1D
from .geometry import DomainError, SingularGraphError, get_metric
from .march import MarchError, compatibility_residual, march_cauchy
from .pc import PCConfig, PCError, fixed_point_solve, reconstruct_given_gamma1, to_graph
from .presets import PRESETS, Cylinder, Sphere
from .schema import CONFIG_SCHEMA
from .strip import StripError, ThresholdWarning
from .verification import (convergence_study, direction_projection_check, fd_shape_operator,
                           trace_projected_k1_line)

MODES = ("march", "pc", "pc-fixed-point", "verify", "converge", "demo")
EXIT_OK, EXIT_FAIL, EXIT_WARN, EXIT_USAGE, EXIT_IO = 0, 1, 2, 64, 74
SOLVER_ERRORS = (MarchError, StripError, PCError, CurveError, DomainError, SingularGraphError,
                 FloatingPointError, np.linalg.LinAlgError)
DEFAULT_TOL = {"k_rel": 0.02, "angle": 1e-4, "exact": 1e-6, "umbilic": 1e-6}


class ConfigError(ValueError):
    pass


def load_config(path, mode):
    """Read, merge with a preset when one is named, and validate."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    _validate(cfg, path)
    if "preset" in cfg:
        if cfg["preset"] not in PRESETS:
            raise ConfigError(f"unknown preset {cfg['preset']!r}; choose from {sorted(PRESETS)}")
        merged = dict(PRESETS[cfg["preset"]])
        merged.update(cfg)
        cfg = merged
    if "mode" in cfg and mode not in ("verify", "demo", "converge") and cfg["mode"] != mode:
        raise ConfigError(f"config is for mode {cfg['mode']!r}, not {mode!r}")
    cfg["_base_dir"] = str(Path(path).resolve().parent)
    _check_required(cfg, mode)
    return cfg


def _validate(cfg, where):
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {loc}: {exc.message}") from None


def _check_required(cfg, mode):
    solver = _solver(cfg, mode)
    need = {"march": ("boundary", "a1", "dx"), "pc": ("ktilde", "boundary", "a1", "a", "alpha"),
            "pc-fixed-point": ("boundary", "a1", "a", "alpha"), "converge": ("problem", "grids")}
    key = "converge" if mode == "converge" else solver
    missing = [k for k in need.get(key, ()) if k not in cfg]
    if mode == "demo" and "preset" not in cfg:
        missing.append("preset")
    if missing:
        raise ConfigError(f"mode {mode!r} needs config fields: {', '.join(missing)}")
    if solver in ("pc", "pc-fixed-point") and not cfg["a"] < cfg["a1"]:
        raise ConfigError("need a < a1")


def _solver(cfg, mode):
    if mode in ("march", "pc", "pc-fixed-point"):
        return mode
    return cfg.get("solver", cfg.get("mode") if cfg.get("mode") in ("march", "pc", "pc-fixed-point") else "march")


def _boundary(cfg):
    spec = dict(cfg["boundary"])
    if "csv" not in spec:
        spec["a1"] = cfg["a1"]
        return BoundaryData.from_spec(spec)
    data = BoundaryData.from_spec(spec, cfg["_base_dir"])
    if "a1" in cfg:
        if cfg["a1"] > data.a1 * (1 + 1e-12):
            raise ConfigError(f"a1 = {cfg['a1']} exceeds the boundary samples' half-width {data.a1}")
        data.a1 = float(cfg["a1"])
    return data


def _alpha(cfg, default=1.0):
    return AlphaField.from_spec(cfg.get("alpha", default), cfg["_base_dir"])


class Run:
    """Outcome of one solver run with what the exporters and the oracle need."""

    def __init__(self, kind, obj, x, y, f, alpha, metric, body, warnings_=()):
        self.kind, self.obj = kind, obj
        self.x, self.y, self.f = x, y, f
        self.alpha, self.metric = alpha, metric
        self.body = body
        self.warnings = list(warnings_)


def _collect_warnings(fn, *args, **kwargs):
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always", ThresholdWarning)
        out = fn(*args, **kwargs)
    return out, [str(w.message) for w in rec if issubclass(w.category, ThresholdWarning)]


def solve_march(cfg, force):
    data = _boundary(cfg)
    metric = get_metric(cfg.get("metric", "euclidean"))
    alpha = _alpha(cfg)
    state, warns = _collect_warnings(
        march_cauchy, data, metric, alpha, cfg["dx"], eps=cfg.get("eps"), K=cfg.get("K"),
        cfl=cfg.get("cfl", 0.9), r=cfg.get("r", 1.0), scheme=cfg.get("scheme", "cir"),
        strip_step=cfg.get("strip_step"))
    res = compatibility_residual(state) if state.levels_done >= 2 else None
    strip = state.strip
    body = {
        "stop_reason": state.stop_reason, "levels": state.levels_done,
        "eps_target": state.grid.eps, "eps_achieved": state.eps_achieved,
        "K_used": state.grid.K, "K_observed": state.K_observed, "dx": state.grid.dx, "dy": state.grid.dy,
        "scheme": state.scheme, "metric": metric.name,
        "strip": {"threshold": strip.threshold, "k0bar": strip.k0bar, "C": strip.C, "Lbar": strip.Lbar,
                  "within_threshold": strip.within_threshold, "step": strip.step},
        "compatibility_residual": None if res is None else {"max": res.max, "mean": res.mean},
        "max_abs": {k: float(np.nanmax(np.abs(v))) for k, v in state.fields().items()},
    }
    warns = sorted(set(warns) | set(state.warnings))
    return Run("march", state, state.x, state.y, state.f, alpha, metric, body, warns)


def _pc_lattice(sol, dx):
    n = int(math.floor(sol.a * max(1.0, 1.0 / sol.alpha) * (1 + 1e-12) / dx))
    t = dx * np.arange(-n, n + 1)
    return t, t


def _finish_pc(sol, cfg, dx):
    x, y = _pc_lattice(sol, dx)
    X, Y = np.meshgrid(x, y)
    f = to_graph(sol, X, Y, outside="nan")
    body = {"alpha": sol.alpha, "a1": sol.a1, "a": sol.a, "iterations": sol.iters,
            "contraction_factor": sol.contraction_factor, "distances": sol.distances,
            "residual_X": sol.residual_X, "residual_w": sol.residual_w, "T_weight": sol.T_weight,
            "thresholds": sol.thresholds, "dT_sup": sol.dT_sup,
            "max_abs_w": float(np.max(np.abs(sol.base.w)))}
    return Run("pc", sol, x, y, f, AlphaField.constant(sol.alpha), get_metric("euclidean"), body,
               sol.warnings)


def _pc_config(cfg, force, kbar1=None):
    data = _boundary(cfg)
    return PCConfig(float(cfg["alpha"]), data.a1, float(cfg["a"]),
                    data.kbar1 if kbar1 is None else kbar1, data.kbar2,
                    T_weight=cfg.get("T_weight"), tol=cfg.get("tol", 1e-12),
                    max_iters=cfg.get("max_iters", 200),
                    steps_per_unit=cfg.get("steps_per_unit", 4096), force=force)


def solve_pc(cfg, force):
    pcfg = _pc_config(cfg, force)
    sol, warns = _collect_warnings(reconstruct_given_gamma1, Function1D.from_spec(cfg["ktilde"], "u"),
                                   pcfg.kbar2, pcfg)
    run = _finish_pc(sol, cfg, cfg.get("dx", 1 / 128))
    run.warnings = sorted(set(run.warnings) | set(warns))
    run.body["given"] = "ktilde"
    return run


def solve_pc_fixed_point(cfg, force):
    pcfg = _pc_config(cfg, force)
    sol, warns = _collect_warnings(fixed_point_solve, pcfg)
    run = _finish_pc(sol, cfg, cfg.get("dx", 1 / 128))
    run.warnings = sorted(set(run.warnings) | set(warns))
    run.body["kbar1"], run.body["kbar2"] = repr(pcfg.kbar1), repr(pcfg.kbar2)
    return run


SOLVERS = {"march": solve_march, "pc": solve_pc, "pc-fixed-point": solve_pc_fixed_point}


def oracle_checks(run, cfg):
    """Finite-difference checks of the emitted graph; returns ``(checks, passed)``."""
    tol = dict(DEFAULT_TOL, **cfg.get("tolerances", {}))
    checks = {}
    march = run.kind == "march"
    # march output starts at y = 0; PC graphs are sampled on both sides of it
    row0 = 0 if march else int(np.argmin(np.abs(run.y)))
    if len(run.y) < 4 or not np.isfinite(run.f).any():
        return {"graph": {"pass": False, "reason": "too few rows for the oracle"}}, False
    pd, _ = fd_shape_operator(run.f, run.x, run.y, run.metric, run.alpha, onesided_y=march)

    data = _boundary(cfg)
    xs = run.x
    ok = np.isfinite(pd.k1[row0]) & (np.abs(xs) <= data.a1)
    if ok.any():
        k1b = np.broadcast_to(data.kbar1(xs), xs.shape)
        k2b = np.broadcast_to(data.kbar2(xs), xs.shape)
        scale = float(max(np.max(np.abs(k1b)), np.max(np.abs(k2b)), 1e-12))
        limit = tol["k_rel"] * scale + 1e-10
        e2 = float(np.max(np.abs(pd.k2[row0][ok] - k2b[ok])))
        chk = {"max_k2_err": e2, "limit": limit, "nodes": int(ok.sum())}
        # with the base curve given directly, k1 on gamma is not prescribed
        if run.body.get("given") != "ktilde":
            chk["max_k1_err"] = float(np.max(np.abs(pd.k1[row0][ok] - k1b[ok])))
        chk["pass"] = max(e2, chk.get("max_k1_err", 0.0)) <= limit
        checks["curvatures_on_gamma"] = chk

    if run.metric.is_euclidean:
        d = direction_projection_check(run.f, run.x, run.y, run.alpha, run.metric, onesided_y=march,
                                       umbilic_skip=tol["umbilic"])
        checks["direction"] = {"max_angle": d.max_angle, "tested": d.n_tested,
                               "umbilic_skipped": d.n_umbilic, "vacuous": d.vacuous,
                               "limit": tol["angle"], "pass": d.vacuous or d.max_angle <= tol["angle"]}
    elif run.alpha.is_constant:
        # projected k1-lines are the straight lines of slope alpha in the base
        # coordinates; traced lines must stay within one grid cell of them
        a = float(run.alpha(0.0, 0.0))
        dx = float(run.x[1] - run.x[0])
        n = len(run.x)
        dev = []
        for x0 in run.x[n // 4: 3 * n // 4 + 1: max(1, n // 16)]:
            tr = trace_projected_k1_line(run.f, run.x, run.y, run.alpha, x0, run.metric)
            dev.append(float(np.max(np.abs(tr - x0 - a * (run.y[: len(tr)] - run.y[0])))))
        checks["k1_line_tracing"] = {"max_deviation": max(dev), "cell": dx, "lines": len(dev),
                                     "pass": max(dev) <= dx}

    if "exact" in cfg:
        ex = cfg["exact"]
        exact = Cylinder(ex["c"], float(run.alpha(0.0, 0.0))) if ex["kind"] == "cylinder" else Sphere(ex["R"])
        X, Y = np.meshgrid(run.x, run.y)
        err = float(np.nanmax(np.abs(run.f - exact.f(X, Y))))
        checks["exact"] = {"max_abs_err": err, "limit": tol["exact"], "pass": err <= tol["exact"]}
    return checks, all(c["pass"] for c in checks.values())


def _meta(cfg_hash, run):
    meta = {"config_hash": cfg_hash, "kind": run.kind}
    if run.kind == "march":
        meta.update(eps_achieved=run.body["eps_achieved"], K_used=run.body["K_used"],
                    strip_threshold=run.body["strip"]["threshold"])
    else:
        meta.update(iterations=run.body["iterations"], dT_sup=run.body["dT_sup"],
                    thresholds_ok=all(v["ok"] for v in run.body["thresholds"].values()))
    return meta


def write_artifacts(run, out, cfg_hash):
    out.mkdir(parents=True, exist_ok=True)
    meta = _meta(cfg_hash, run)
    paths = [io.export_mesh(run.x, run.y, run.f, out / "surface.obj", meta)]
    if run.kind == "march":
        paths.append(io.write_state_csv(run.obj, out / "state.csv", meta))
    else:
        paths.append(io.write_curve_csv(run.obj.base, out / "base_curve.csv", meta))
        paths.append(io.write_uh_csv(run.obj, out / "uh_grid.csv", meta=meta))
    return [str(p) for p in paths]


def _user_config(cfg):
    return {k: v for k, v in cfg.items() if not k.startswith("_")}


def run(mode, cfg, out, force=False, workers=1):
    """Execute ``mode``; returns ``(exit_code, report_dict)``."""
    out = Path(out)
    cfg_hash = io.config_hash(_user_config(cfg))
    if mode == "converge":
        rep = convergence_study(cfg["problem"], cfg["grids"], workers=workers)
        out.mkdir(parents=True, exist_ok=True)
        io.write_csv(out / "errors.csv", {"h": rep.grids, "error": rep.errors}, {"config_hash": cfg_hash})
        body = rep.to_dict()
        io.write_report(out / "report.json", "convergence", body, _user_config(cfg))
        return (EXIT_OK if rep.verdict.get("converges") else EXIT_FAIL), body
    solver = _solver(cfg, mode)
    if mode == "demo":
        solver = PRESETS[cfg["preset"]]["mode"] if cfg.get("solver") is None else cfg["solver"]
    result = SOLVERS[solver](cfg, force)
    body = {"mode": mode, "solver": solver, "result": result.body, "warnings": result.warnings}
    passed = True
    if mode in ("verify", "demo"):
        checks, passed = oracle_checks(result, cfg)
        body["oracle"] = checks
    body["artifacts"] = write_artifacts(result, out, cfg_hash)
    io.write_report(out / "report.json", mode, body, _user_config(cfg))
    body["artifacts"].append(str(out / "report.json"))
    if not passed:
        return EXIT_FAIL, body
    return (EXIT_WARN if result.warnings else EXIT_OK), body


def _summary(mode, code, body, out=None):
    out = sys.stdout if out is None else out
    p = lambda *a: print(*a, file=out)
    p(f"curverecon {mode}: {['pass', 'FAIL', 'pass with threshold warnings'][code] if code in (0, 1, 2) else code}")
    res = body.get("result", {})
    if "eps_achieved" in res:
        p(f"  march: {res['levels']} levels, eps achieved {res['eps_achieved']:.6g} of {res['eps_target']:.6g}"
          f" ({res['stop_reason']}), K used {res['K_used']:.4g}, observed {res['K_observed']:.4g}")
        if res.get("compatibility_residual"):
            p(f"  compatibility residual max {res['compatibility_residual']['max']:.3e}")
    if "iterations" in res:
        p(f"  pc: {res['iterations']} iterations, contraction factor {res['contraction_factor']:.3g},"
          f" sup|dT| {res['dT_sup']:.3g}, residuals X {res['residual_X']:.2e} w {res['residual_w']:.2e}")
    for name, chk in body.get("oracle", {}).items():
        vals = ", ".join(f"{k}={v:.3e}" if isinstance(v, float) else f"{k}={v}"
                         for k, v in chk.items() if k != "pass")
        p(f"  [{'ok' if chk['pass'] else 'FAIL'}] {name}: {vals}")
    if "convergence_orders" in body:
        p(f"  errors: {', '.join(f'{e:.3e}' for e in body['errors'])}")
        for o in body["convergence_orders"]:
            p(f"  order {o['order']:.3f} between h={o['h'][0]:g} and h={o['h'][1]:g}")
        for n in body.get("notes", []):
            p(f"  note: {n}")
    for w in body.get("warnings", []):
        p(f"  warning: {w}")
    for a in body.get("artifacts", []):
        p(f"  wrote {a}")


def _workers(arg, cfg):
    env = os.environ.get("CURVERECON_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"CURVERECON_WORKERS must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError("CURVERECON_WORKERS must be >= 1")
        return n
    return arg if arg is not None else cfg.get("workers", 1)


def build_parser():
    ap = argparse.ArgumentParser(prog="curverecon", description="Surfaces with prescribed principal curvatures.")
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", default=None, help="output directory (default: config 'out' or ./out)")
    ap.add_argument("--force", action="store_true", help="proceed when sufficient smallness conditions fail")
    ap.add_argument("--workers", type=int, default=None, help="worker threads for convergence studies")
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config, args.mode)
        workers = _workers(args.workers, cfg)
        if workers < 1:
            raise ConfigError("--workers must be >= 1")
        out = args.out or cfg.get("out", "out")
        code, body = run(args.mode, cfg, out, args.force, workers)
    except ConfigError as exc:
        print(f"curverecon: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"curverecon: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"curverecon: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SOLVER_ERRORS + (RuntimeError,) as exc:
        print(f"curverecon: solver failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _summary(args.mode, code, body)
    return code


if __name__ == "__main__":
    sys.exit(main())
