"""CSV and JSON serialization of trajectories, fixed points and reports.

Floats are written with 17 significant digits so every value round-trips
exactly. CSV files use a comma delimiter, a header row and LF line endings.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from .core import ModelParams
from .simulator import (DiagnosticsConfig, Event, SolverOptions, Trajectory,
                        compute_diagnostics, default_reference)

__all__ = [
    "fmt",
    "write_csv",
    "read_csv",
    "trajectory_columns",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "run_summary",
    "write_json",
    "read_json",
    "load_trajectory",
    "params_to_dict",
    "params_from_dict",
    "options_to_dict",
]


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [[float(v) for v in row] for row in r if row]
    arr = np.array(data, dtype=float).reshape(len(data), len(header))
    return header, arr


def trajectory_columns(traj: Trajectory) -> list[str]:
    cfg = traj.diagnostics_config
    cols = ["t"] + [f"a_{j}" for j in range(traj.params.size)] + ["E"]
    cols += [f"Hs:{float(s)!r}" for s in cfg.sobolev_exponents]
    cols += [f"flux:{int(J)}" for J in cfg.flux_shells]
    cols.append("dist_fp")
    return cols


def write_trajectory_csv(traj: Trajectory, path) -> None:
    cols = trajectory_columns(traj)
    diag_cols = cols[traj.params.size + 1:]
    table = np.column_stack(
        [traj.t, traj.states] + [traj.diagnostics[c] for c in diag_cols])
    write_csv(path, cols, table)


def read_trajectory_csv(path) -> tuple[np.ndarray, np.ndarray, dict]:
    """``(t, states, diagnostic_columns)`` from a trajectory CSV."""
    header, arr = read_csv(path)
    if not header or header[0] != "t":
        raise ValueError(f"{path}: first column must be 't'")
    a_cols = [i for i, h in enumerate(header) if h.startswith("a_")]
    t = arr[:, 0]
    states = arr[:, a_cols]
    diag = {h: arr[:, i] for i, h in enumerate(header) if i and not h.startswith("a_")}
    return t, states, diag


def params_to_dict(params: ModelParams) -> dict:
    nz = np.flatnonzero(params.forcing)
    return {
        "lambda": params.lam,
        "n_shells": params.n_shells,
        "forcing": {str(int(j)): float(params.forcing[j]) for j in nz},
        "closure": params.closure,
    }


def params_from_dict(d: dict) -> ModelParams:
    n = int(d["n_shells"])
    f = np.zeros(n + 1)
    for k, v in d.get("forcing", {}).items():
        f[int(k)] = float(v)
    return ModelParams(n, f, float(d.get("lambda", 2.0 ** 2.5)), d.get("closure", "zero"))


def options_to_dict(opts: SolverOptions) -> dict:
    d = dataclasses.asdict(opts)
    return {k: (fmt(v) if isinstance(v, float) and not math.isfinite(v) else v)
            for k, v in d.items()}


def _options_from_dict(d: dict) -> SolverOptions:
    d = dict(d)
    for k in ("max_step",):
        if isinstance(d.get(k), str):
            d[k] = float(d[k])
    return SolverOptions(**d)


def run_summary(traj: Trajectory, *, initial=None, crossing=None, extra=None) -> dict:
    a0 = traj.states[0] if initial is None else np.asarray(initial, dtype=float)
    drift = np.linalg.norm(traj.states - a0, axis=1)
    out = {
        "params": params_to_dict(traj.params),
        "options": options_to_dict(traj.options),
        "diagnostics": {
            "sobolev_exponents": [float(s) for s in traj.diagnostics_config.sobolev_exponents],
            "flux_shells": [int(J) for J in traj.diagnostics_config.flux_shells],
            "box_shells": [int(J) for J in traj.diagnostics_config.box_shells],
            "fixed_point_reference": traj.diagnostics_config.fixed_point_reference,
        },
        "t_start": float(traj.t[0]),
        "t_final": float(traj.t[-1]),
        "n_samples": len(traj),
        "n_steps": traj.n_steps,
        "n_rejected": traj.n_rejected,
        "events": [{"kind": e.kind, "time": float(e.time), "detail": e.detail}
                   for e in traj.events],
        "truncated": traj.truncated,
        "energy_initial": float(traj.diagnostics["E"][0]),
        "energy_final": float(traj.diagnostics["E"][-1]),
        "max_drift_from_initial": float(drift.max()),
        "min_component": float(traj.states.min()),
        "wall_clock_seconds": traj.wall_time,
    }
    if crossing is not None:
        out["crossing"] = {
            "s": crossing.s,
            "threshold": crossing.threshold,
            "crossing_time": crossing.crossing_time,
            "attained_max": crossing.attained_max,
        }
    if extra:
        out.update(extra)
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path, obj) -> None:
    # json emits repr(float), which is the shortest exact round-trip form
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_trajectory(csv_path, summary_path=None, params: ModelParams = None) -> Trajectory:
    """Rebuild a :class:`Trajectory` from a CSV and its run summary.

    Diagnostics are recomputed from the states; the CSV's diagnostic columns
    are not trusted.
    """
    csv_path = Path(csv_path)
    if summary_path is None:
        cand = csv_path.with_name("summary.json")
        summary_path = cand if cand.exists() else None
    summary = read_json(summary_path) if summary_path is not None else {}
    if params is None:
        if "params" not in summary:
            raise ValueError("model parameters are needed: pass params or a summary.json")
        params = params_from_dict(summary["params"])
    t, states, _ = read_trajectory_csv(csv_path)
    if states.shape[1] != params.size:
        raise ValueError(f"{csv_path}: {states.shape[1]} shell columns, expected {params.size}")
    opts = _options_from_dict(summary["options"]) if "options" in summary else SolverOptions()
    dsum = summary.get("diagnostics")
    cfg = DiagnosticsConfig(
        tuple(dsum["sobolev_exponents"]), tuple(dsum["flux_shells"]),
        tuple(dsum["box_shells"]), dsum["fixed_point_reference"]) if dsum else DiagnosticsConfig()
    ref = default_reference(params) if cfg.fixed_point_reference else None
    events = tuple(Event(e["kind"], e["time"], e.get("detail", ""))
                   for e in summary.get("events", []))
    return Trajectory(t, states, params, opts, cfg, ref,
                      compute_diagnostics(params, states, cfg, ref), events,
                      summary.get("wall_clock_seconds", 0.0),
                      summary.get("n_steps", 0), summary.get("n_rejected", 0))
