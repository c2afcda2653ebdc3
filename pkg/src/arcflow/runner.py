"""Experiment orchestration: single runs, sweeps, persistence, SVG frames."""

from __future__ import annotations

import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import flow as flow_mod
from .config import (ExperimentConfig, build_initial_state, build_support,
                     config_from_dict)
from .curve import curve_to_json
from .diagnostics import CSV_COLUMNS, DensityProbe, gaussian_density
from .errors import InvalidInputError
from .flow import AREA_PRESERVING, check_admissibility, run as flow_run
from .rescaling import (classify_singularity, fit_circular_arc, hamilton_rescale,
                        parabolic_rescale)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))  # shortest round-trip form, byte-stable
    return str(x)


def write_csv(path: Path, header: list[str], rows: list[list], config_hash: str) -> None:
    with open(path, "w") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _resolve_probes(config: ExperimentConfig, initial_state, sigma, t_final: float):
    probes = []
    for spec in config.probes:
        s_raw = spec.get("x0_param_on_sigma", 0.0)
        if s_raw == "endpoint-a":
            s = initial_state.lift.a
        elif s_raw == "endpoint-b":
            s = initial_state.lift.b
        else:
            s = float(s_raw)
        T_raw = spec.get("T_probe", "2x-converged")
        T = 2.0 * t_final if T_raw == "2x-converged" else float(T_raw)
        probes.append(DensityProbe(x0=sigma.point(s), T_probe=T))
    return probes


def _offline_density_traces(result, probes, sigma):
    """Evaluate probe densities at snapshot times from the stored run.

    The weight exp(-1/2 int kappa_bar^2) is rebuilt from the per-step
    series by trapezoid, so the traces match online accumulation.
    """
    ts = result.series.get("t", np.array([]))
    if len(ts) == 0:
        # zero-step run: no accumulated weight, evaluate with f = 1
        t_grid = np.array([0.0, 1.0])
        integral = np.zeros(2)
    else:
        dts = result.series["dt"]
        k2 = result.series["kappa_bar"] ** 2
        k2_next = np.append(k2[1:], k2[-1])
        integral = np.concatenate([[0.0], np.cumsum(0.5 * (k2 + k2_next) * dts)])
        t_grid = np.append(ts, ts[-1] + dts[-1])
    traces = []
    for probe in probes:
        vals = []
        for state in result.states:
            if state.t >= probe.T_probe:
                vals.append(np.nan)
                continue
            f_acc = float(np.exp(-0.5 * np.interp(state.t, t_grid, integral)))
            p = DensityProbe(x0=probe.x0, T_probe=probe.T_probe, f_accumulator=f_acc)
            vals.append(gaussian_density(state.curve, p, state.t))
        traces.append(np.asarray(vals))
    return traces


def write_svg(path: Path, state, sigma, config_hash: str) -> None:
    """One frame: curve in black, support in gray, endpoint chord dashed."""
    pts = state.curve.nodes
    sig = sigma.point(np.linspace(0, sigma.total_length, 512))
    allpts = np.vstack([pts, sig])
    lo = allpts.min(axis=0) - 0.1
    hi = allpts.max(axis=0) + 0.1
    span = (hi - lo).max()
    scale = 600.0 / span

    def xy(p):
        return ((p[0] - lo[0]) * scale, (hi[1] - p[1]) * scale)

    def path_of(nodes, close=False):
        coords = " L ".join(f"{x:.2f} {y:.2f}" for x, y in (xy(p) for p in nodes))
        return f"M {coords}" + (" Z" if close else "")

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="600" height="600" '
        f'viewBox="0 0 {(hi[0]-lo[0])*scale:.1f} {(hi[1]-lo[1])*scale:.1f}">',
        f"<!-- config_hash={config_hash} t={state.t} -->",
        f'<path d="{path_of(sig, close=True)}" fill="none" stroke="#999" stroke-width="1.5"/>',
        f'<path d="{path_of(pts, close=state.curve.closed)}" fill="none" stroke="#000" stroke-width="2"/>',
    ]
    if not state.curve.closed:
        (x1, y1), (x2, y2) = xy(pts[0]), xy(pts[-1])
        parts.append(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
                     f'stroke="#555" stroke-width="1" stroke-dasharray="6 4"/>')
    parts.append("</svg>")
    path.write_text("\n".join(parts))


def run_experiment(config: ExperimentConfig, out_dir, frames: bool = False,
                   quiet: bool = False) -> dict:
    """Run one experiment and write all artifact files into out_dir.

    Writes diagnostics.csv, trajectory.jsonl, admissibility.json,
    summary.json, probes.csv (when probes are configured) and optional SVG
    frames.  Returns the summary dictionary.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    chash = config.config_hash()
    sigma = build_support(config)
    state = build_initial_state(config, sigma)

    admissibility = None
    if state.attached:
        report = check_admissibility(state.curve, sigma, state.lift)
        admissibility = asdict(report)
        admissibility["admissible"] = report.admissible
        with open(out / "admissibility.json", "w") as fh:
            json.dump({"config_hash": chash, "seed": config.seed, **admissibility},
                      fh, indent=2, default=float)

    result = flow_run(state, sigma, config.flow, mode=config.mode,
                      snapshot_every=config.snapshot_every)

    probes = _resolve_probes(config, state, sigma, result.final.t)
    traces = _offline_density_traces(result, probes, sigma)

    rows = []
    for i, (st, rec) in enumerate(zip(result.states, result.records)):
        density = traces[0][i] if traces and len(traces[0]) else rec.density
        row = rec.csv_row()
        row[CSV_COLUMNS.index("density")] = density
        rows.append(row)
    write_csv(out / "diagnostics.csv", list(CSV_COLUMNS), rows, chash)

    if probes:
        header = ["t"] + [f"density_{i}" for i in range(len(probes))]
        prow = [[st.t] + [tr[i] for tr in traces]
                for i, st in enumerate(result.states)]
        write_csv(out / "probes.csv", header, prow, chash)

    with open(out / "trajectory.jsonl", "w") as fh:
        fh.write(json.dumps({"config_hash": chash, "seed": config.seed,
                             "termination": result.termination}) + "\n")
        for st in result.states:
            rec = {"t": st.t, "step": st.step_index,
                   "curve": curve_to_json(st.curve)}
            if st.lift is not None:
                rec["lift"] = {"a": st.lift.a, "b": st.lift.b}
            fh.write(json.dumps(rec) + "\n")

    if frames:
        fdir = out / "frames"
        fdir.mkdir(exist_ok=True)
        for i, st in enumerate(result.states):
            write_svg(fdir / f"frame_{i:05d}.svg", st, sigma, chash)

    violations = 0
    for rec in result.records:
        violations += sum(1 for v in rec.flags.values() if v is False)

    final_fit = None
    if not result.final.curve.closed:
        fit = fit_circular_arc(result.final.curve)
        if not fit.is_line:
            final_fit = {"radius": fit.radius, "rms_error": fit.rms_error,
                         "center": fit.center.tolist(),
                         "contact_angles_deg": [np.degrees(a) for a in fit.contact_angles]}

    summary = {
        "config_hash": chash,
        "seed": config.seed,
        "name": config.name,
        "termination": result.termination,
        "t_final": result.final.t,
        "steps": result.final.step_index,
        "final_fit": final_fit,
        "invariant_violation_count": violations,
        "admissible": admissibility["admissible"] if admissibility else None,
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, default=float)
    if not quiet:
        print(f"[{config.name}] {result.termination} after {summary['steps']} steps "
              f"(t={summary['t_final']:.6g}), violations={violations}")
    return summary


def _set_by_path(obj: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    for p in parts[:-1]:
        obj = obj.setdefault(p, {})
    obj[parts[-1]] = value


def _sweep_one(args):
    base, overrides, out_dir, idx = args
    doc = json.loads(json.dumps(base))
    for key, val in overrides.items():
        _set_by_path(doc, key, val)
    row = {"run": idx, **{k: v for k, v in overrides.items()}}
    try:
        cfg = config_from_dict(doc)
        summary = run_experiment(cfg, Path(out_dir) / f"run_{idx:03d}", quiet=True)
        row.update(status="ok", termination=summary["termination"],
                   admissible=summary["admissible"],
                   violations=summary["invariant_violation_count"])
    except Exception as exc:  # individual failures recorded, sweep continues
        row.update(status=f"error: {exc}", termination="", admissible="", violations="")
    return row


def sweep(base_config: dict, grid: dict, out_dir, workers: int | None = None) -> list[dict]:
    """Run the cartesian product of the grid over the base config.

    grid maps dotted config paths to value lists, e.g.
    {"initial.rho": [0.02, 0.03], "initial.amplitude": [0.0, 0.05]}.
    One CSV row per run; failures are recorded and do not stop the sweep.
    """
    if not grid:
        raise InvalidInputError("sweep grid must be non-empty")
    keys = sorted(grid)
    combos = list(itertools.product(*(grid[k] for k in keys)))
    if not combos:
        raise InvalidInputError("sweep grid must be non-empty")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if workers is None:
        workers = int(os.environ.get("ARCFLOW_THREADS", "0")) or min(4, os.cpu_count() or 1)
    tasks = [(base_config, dict(zip(keys, combo)), str(out), i)
             for i, combo in enumerate(combos)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_one, tasks))
    else:
        rows = [_sweep_one(t) for t in tasks]
    header = ["run"] + keys + ["status", "termination", "admissible", "violations"]
    csv_rows = [[r.get(h, "") for h in header] for r in rows]
    chash = "sweep"
    write_csv(out / "sweep.csv", header, csv_rows, chash)
    return rows


def rescale_lab(trajectory_path, out_dir) -> dict:
    """Hamilton/parabolic analysis of a stored trajectory file."""
    from .curve import curve_from_json
    from .flow import FlowState

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    states = []
    meta = {}
    with open(trajectory_path) as fh:
        for line in fh:
            obj = json.loads(line)
            if "curve" not in obj:
                meta = obj
                continue
            states.append(FlowState(curve=curve_from_json(obj["curve"]),
                                    t=float(obj["t"]), step_index=int(obj["step"])))
    if not states:
        raise InvalidInputError(f"no snapshots in {trajectory_path}")

    from .curve import curvature
    times = np.array([s.t for s in states])
    kmax = np.array([np.abs(curvature(s.curve).values).max() for s in states])
    report = classify_singularity(times, kmax) if len(states) >= 2 else None

    frames = hamilton_rescale(states, T_est=report.T_est if report else None)
    fdir = out / "hamilton_frames"
    fdir.mkdir(exist_ok=True)
    for i, fr in enumerate(frames):
        with open(fdir / f"frame_{i:04d}.json", "w") as fh:
            json.dump({"curve": curve_to_json(fr.curve),
                       "sidecar": {"Q": fr.Q, "tau": fr.tau,
                                   "origin": fr.origin.tolist(), "j": fr.j}},
                      fh)
    summary = {
        "config_hash": meta.get("config_hash", ""),
        "n_snapshots": len(states),
        "n_frames": len(frames),
        "classification": asdict(report) if report else None,
    }
    with open(out / "rescale_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, default=float)
    return summary
