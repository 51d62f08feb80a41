"""Experiment runner: executes an ExperimentConfig and writes its artifacts.

Every run owns one output directory containing meta.json (config echo,
versions, wall time, outcome), delimited data (CSV/JSON), and rendered
figures.  Reruns of the same config produce byte-identical CSVs.
"""

from __future__ import annotations

import json
import math
import os
import time

import numpy as np
import scipy

from . import __version__
from .evolution import EvolveConfig, evolve
from .fields import FourierField, load_field, save_field
from .galerkin import GalerkinSystem, GalerkinTrajectory, integrate_galerkin
from .hunt import BisectionResult, FamilySpec, HeatFateConfig, bisect_manifold, sweep_nls
from .manifold import (
    detect_resonances,
    evaluate_W,
    save_model,
    solve_cohomological,
    solve_sigma_for_constraints,
)
from .recipes import ExperimentConfig, parse_initial, parse_range, parse_theta
from .selfsim import fit_blowup_rate, rescale_frame, track_blowup_points
from . import report

__all__ = ["run", "output_root", "RunError"]

ENV_OUTPUT_ROOT = "QNLSLAB_OUT"


class RunError(RuntimeError):
    """Invalid configuration, with the offending fields spelled out."""


def output_root() -> str:
    return os.environ.get(ENV_OUTPUT_ROOT, "runs")


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _require(params: dict, kind: str, *names):
    missing = [n for n in names if n not in params]
    if missing:
        raise RunError(f"{kind} config is missing fields: {', '.join(missing)}")


def _series_rows(times, sup_times, sup_norms, energies, n_max=8):
    idx = np.searchsorted(sup_times, times)
    idx = np.clip(idx, 0, len(sup_norms) - 1)
    rows = []
    for j, t in enumerate(times):
        e = energies[j]
        rows.append([t, sup_norms[idx[j]]] + [e[n] if n < len(e) else 0.0
                                              for n in range(n_max + 1)])
    return rows


def _series_header(n_max=8):
    return ["t", "sup_norm"] + [f"E_{n}" for n in range(n_max + 1)]


def _galerkin_series(traj: GalerkinTrajectory, dt: float, n_max=8):
    rows = []
    for t, a in zip(traj.times, traj.states):
        total = abs(a[0]) ** 2 + 2 * float(np.sum(np.abs(a[1:]) ** 2))
        e = np.zeros(n_max + 1)
        if total > 0:
            e[0] = abs(a[0]) ** 2 / total
            for n in range(1, min(len(a) - 1, n_max) + 1):
                e[n] = 2 * abs(a[n]) ** 2 / total
        i = min(int(round(t / dt)), len(traj.sup_norms) - 1)
        rows.append([t, traj.sup_norms[i]] + list(e))
    return rows


# ---------------------------------------------------------------------------
# per-kind pipelines
# ---------------------------------------------------------------------------

def _run_simulate(cfg: ExperimentConfig, out: str) -> dict:
    p = cfg.params
    _require(p, "simulate", "initial", "modes", "dt", "t_end")
    modes = int(p["modes"])
    period = float(p.get("period", 1.0))
    ev = EvolveConfig(
        theta=parse_theta(p.get("theta", 0.0)),
        dt=float(p["dt"]),
        t_end=float(p["t_end"]),
        n_modes=modes,
        period=period,
        blowup_threshold=float(p.get("blowup_threshold", 1e8)),
        record_stride=int(p.get("record_stride", 100)),
        snapshot_stride=int(p["snapshot_stride"]) if "snapshot_stride" in p else None,
        trapping_check=bool(p.get("trapping", False)),
        stop_on_trapping=bool(p.get("stop_on_trapping", False)),
    )
    u0 = parse_initial(p["initial"], modes, period)
    rec = evolve(u0, ev)
    _write_csv(os.path.join(out, "series.csv"), _series_header(),
               _series_rows(rec.times, rec.sup_times, rec.sup_norms,
                            rec.energy_fractions))
    snap_dir = os.path.join(out, "snapshots")
    os.makedirs(snap_dir, exist_ok=True)
    for i, (t, f) in enumerate(zip(rec.snapshot_times, rec.snapshots)):
        save_field(f, os.path.join(snap_dir, f"snap_{i:06d}"), time=t)
    report.plot_norm_series(rec.sup_times, rec.sup_norms,
                            os.path.join(out, "inverse_norm.png"),
                            title=cfg.name or "simulate")
    report.plot_energy_fractions(rec.times, rec.energy_fractions,
                                 os.path.join(out, "energy_fractions.png"),
                                 title=cfg.name or "simulate")
    summary = {"outcome": {"kind": rec.outcome.kind, "t": rec.outcome.t},
               "max_sup_norm": float(np.nanmax(rec.sup_norms)),
               "snapshots": len(rec.snapshots)}
    if cfg.post:
        summary["post"] = _run_post(cfg, out, rec)
    return summary


def _run_post(cfg: ExperimentConfig, out: str, rec) -> dict:
    """Optional fit + self-similar frames after a simulate run."""
    post = cfg.post
    result: dict = {}
    try:
        series = np.column_stack([rec.sup_times, rec.sup_norms])
        fit = fit_blowup_rate(series, tuple(post["fit_window"]))
        result["fit"] = _fit_dict(fit)
        with open(os.path.join(out, "fit.json"), "w") as fh:
            json.dump(result["fit"], fh, indent=1)
            fh.write("\n")
        alpha = float(post.get("alpha", fit.alpha))
        beta = float(post.get("beta", alpha / 2.0))
        paths, _events = track_blowup_points(rec)
        longest = max(paths, key=lambda p: len(p.times))
        frames = []
        frame_dir = os.path.join(out, "frames")
        os.makedirs(frame_dir, exist_ok=True)
        for t, snap in zip(rec.snapshot_times, rec.snapshots):
            if not (t < fit.T):
                continue
            times, locs = longest.as_arrays()
            xi = float(locs[np.argmin(np.abs(times - t))])
            fr = rescale_frame(snap, t, fit, beta, xi, alpha=alpha)
            frames.append(fr)
        for i, fr in enumerate(frames):
            _write_csv(os.path.join(frame_dir, f"frame_{i:04d}.csv"),
                       ["y", "re_U", "im_U"],
                       [[y, u.real, u.imag]
                        for y, u in zip(fr.y_grid, fr.U_values)])
        if frames:
            report.plot_frames_heatmap(frames, out, title=cfg.name)
        result["frames"] = len(frames)
    except Exception as exc:
        result["error"] = f"{type(exc).__name__}: {exc}"
    return result


def _fit_dict(fit) -> dict:
    return {"T": fit.T, "alpha": fit.alpha, "C0": fit.C0,
            "r_squared": fit.r_squared, "window": list(fit.window),
            "residual_normality": fit.residual_normality_flag,
            "half_fits": [_fit_dict(h) for h in fit.half_fits]}


def _run_sweep(cfg: ExperimentConfig, out: str) -> dict:
    p = cfg.params
    _require(p, "sweep", "family", "A", "modes", "dt", "t_end")
    modes = int(p["modes"])
    period = float(p.get("period", 1.0))
    g = parse_initial(p["family"], modes, period)
    A_values = parse_range(p["A"])
    fam = FamilySpec(g=g, A_range=(float(A_values.min()), float(A_values.max())),
                     description=p["family"])
    ev = EvolveConfig(
        theta=parse_theta(p.get("theta", math.pi / 2)),
        dt=float(p["dt"]), t_end=float(p["t_end"]), n_modes=modes,
        period=period, record_stride=int(p.get("record_stride", 10)),
        trapping_check=True,
    )
    rows = sweep_nls(fam, A_values, ev)
    _write_csv(os.path.join(out, "sweep.csv"),
               ["A", "outcome", "trap_time", "max_norm"],
               [[r.A, r.outcome,
                 r.trap_time if r.trap_time is not None else "",
                 r.max_norm] for r in rows])
    report.plot_sweep(rows, os.path.join(out, "sweep.png"),
                      title=cfg.name or "sweep")
    n_err = sum(1 for r in rows if r.outcome == "error")
    return {"points": len(rows), "errors": n_err}


def _run_bisect(cfg: ExperimentConfig, out: str) -> dict:
    p = cfg.params
    _require(p, "bisect", "family", "range", "tol")
    modes = int(p.get("modes", 256))
    period = float(p.get("period", 1.0))
    g = parse_initial(p["family"], modes, period)
    rng = parse_range(p["range"])
    fam = FamilySpec(g=g, A_range=(float(rng[0]), float(rng[-1])),
                     description=p["family"])
    hc = HeatFateConfig(
        n_modes=modes, dt=float(p.get("dt", 1e-4)),
        t_max=float(p.get("t_max", 5.0)),
        max_doublings=int(p.get("doublings", 4)), period=period,
    )
    res: BisectionResult = bisect_manifold(fam, float(p["tol"]), hc)
    doc = {"a_star": res.a_star, "bracket": list(res.bracket),
           "history": [{"A": A, "fate": fate, "t": t, "certificate": c}
                       for A, fate, t, c in res.history]}
    with open(os.path.join(out, "bisect.json"), "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    report.plot_bisection(res.history, os.path.join(out, "bisect.png"),
                          title=cfg.name or "bisect")
    return {"a_star": res.a_star, "probes": len(res.history)}


def _galerkin_initial(p: dict, N: int):
    init = str(p.get("init", ""))
    if init.startswith("sigma:"):
        sigma = [complex(x) for x in init[6:].split(",")]
        model = solve_cohomological(GalerkinSystem(N), int(p.get("order", 20)))
        return np.asarray(evaluate_W(model, sigma))
    if init.startswith("values:"):
        return np.array([complex(x) for x in init[7:].split(",")])
    raise RunError("galerkin init must be 'values:a0,a1,...' or 'sigma:s1,...'")


def _run_galerkin(cfg: ExperimentConfig, out: str) -> dict:
    p = cfg.params
    _require(p, "galerkin", "N", "init", "dt", "t_end")
    N = int(p["N"])
    sys_ = GalerkinSystem(n_modes=N, theta=parse_theta(p.get("theta", 0.0)))
    a0 = _galerkin_initial(p, N)
    dt = float(p["dt"])
    traj = integrate_galerkin(a0, sys_, dt=dt, t_end=float(p["t_end"]),
                              record_stride=int(p.get("record_stride", 10)))
    _write_csv(os.path.join(out, "series.csv"), _series_header(),
               _galerkin_series(traj, dt))
    sup_times = np.arange(len(traj.sup_norms)) * dt
    report.plot_norm_series(sup_times, traj.sup_norms,
                            os.path.join(out, "inverse_norm.png"),
                            title=cfg.name or "galerkin")
    rows = _galerkin_series(traj, dt)
    fr = np.array([r[2:] for r in rows])
    report.plot_energy_fractions(traj.times, fr,
                                 os.path.join(out, "energy_fractions.png"),
                                 title=cfg.name or "galerkin")
    i_peak = int(np.argmax(traj.sup_norms))
    return {"outcome": {"kind": traj.outcome.kind, "t": traj.outcome.t},
            "peak_sup_norm": float(traj.sup_norms[i_peak]),
            "peak_time": float(i_peak * dt)}


def _run_manifold(cfg: ExperimentConfig, out: str) -> dict:
    p = cfg.params
    _require(p, "manifold", "N", "order")
    N, K = int(p["N"]), int(p["order"])
    model = solve_cohomological(GalerkinSystem(N), K)
    model_path = os.path.join(out, "model.json")
    save_model(model, model_path)
    res = detect_resonances([-(j * j) for j in range(1, N + 1)], K)
    _write_csv(os.path.join(out, "resonances.csv"),
               ["multi_index", "target"],
               [[" ".join(map(str, k)), i] for k, i in res.entries])
    summary = {"model": model_path, "resonances": len(res.entries)}
    if "sigma" in p:
        sigma = [complex(x) for x in str(p["sigma"]).split(",")]
        w = evaluate_W(model, sigma)
        summary["W"] = [[v.real, v.imag] for v in w]
    if "targets" in p:
        targets = [complex(x) for x in str(p["targets"]).split(",")]
        sigma = solve_sigma_for_constraints(model, targets)
        summary["sigma"] = [[v.real, v.imag] for v in sigma]
    return summary


def _load_snapshots(run_dir: str):
    """Snapshots written by a simulate run, as (times, fields)."""
    snap_dir = os.path.join(run_dir, "snapshots")
    bases = sorted(f[:-5] for f in os.listdir(snap_dir) if f.endswith(".json"))
    times, fields = [], []
    for b in bases:
        f, t = load_field(os.path.join(snap_dir, b))
        times.append(t)
        fields.append(f)
    return times, fields


def _run_selfsim(cfg: ExperimentConfig, out: str) -> dict:
    p = cfg.params
    _require(p, "selfsim", "window")
    if "run" in p:
        series_path = os.path.join(p["run"], "series.csv")
    elif "series" in p:
        series_path = p["series"]
    else:
        raise RunError("selfsim config needs 'series' (csv) or 'run' (directory)")
    series = np.loadtxt(series_path, delimiter=",", skiprows=1, usecols=(0, 1))
    w = p["window"]
    window = tuple(float(x) for x in (w.split(":") if isinstance(w, str) else w))
    fit = fit_blowup_rate(series, window)
    doc = _fit_dict(fit)
    with open(os.path.join(out, "fit.json"), "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    summary: dict = {"fit": doc}
    if "run" in p and "alpha" in p:
        alpha = float(p["alpha"])
        beta = float(p.get("beta", alpha / 2.0))
        times, fields = _load_snapshots(p["run"])
        frame_dir = os.path.join(out, "frames")
        os.makedirs(frame_dir, exist_ok=True)
        frames = []
        xi = float(p.get("xi", 0.0))
        for t, f in zip(times, fields):
            if t is None or not t < fit.T:
                continue
            frames.append(rescale_frame(f, t, fit, beta, xi, alpha=alpha))
        for i, fr in enumerate(frames):
            _write_csv(os.path.join(frame_dir, f"frame_{i:04d}.csv"),
                       ["y", "re_U", "im_U"],
                       [[y, u.real, u.imag]
                        for y, u in zip(fr.y_grid, fr.U_values)])
        if frames:
            report.plot_frames_heatmap(frames, out, title=cfg.name)
        summary["frames"] = len(frames)
    return summary


_PIPELINES = {
    "simulate": _run_simulate,
    "sweep": _run_sweep,
    "bisect": _run_bisect,
    "galerkin": _run_galerkin,
    "manifold": _run_manifold,
    "selfsim": _run_selfsim,
}


def run(cfg: ExperimentConfig) -> dict:
    """Execute the configured pipeline; returns the meta.json document."""
    out = cfg.output_dir or os.path.join(output_root(), cfg.name or cfg.kind)
    os.makedirs(out, exist_ok=True)
    t0 = time.perf_counter()
    summary = _PIPELINES[cfg.kind](cfg, out)
    meta = {
        "config": cfg.to_dict(),
        "summary": summary,
        "versions": {"qnlslab": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__},
        "wall_time_s": time.perf_counter() - t0,
        "output_dir": out,
    }
    with open(os.path.join(out, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=1)
        fh.write("\n")
    return meta
