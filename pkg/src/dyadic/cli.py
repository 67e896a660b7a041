"""Command-line front end.

Subcommands: ``simulate``, ``fixed-point``, ``spectrum``, ``analyze`` and
``sweep``. Exit codes: 0 success, 1 usage or configuration error, 2
numerical failure (partial artifacts are still written).

``simulate`` and ``sweep`` read an optional JSON config (``--config`` or the
``DYADIC_CONFIG`` environment variable); command-line flags override it.
Config layout, all sections optional::

    {
      "model": {"lambda": 5.656854, "n_shells": 20,
                "forcing": {"0": 1.0}, "closure": "zero"},
      "initial": {"kind": "zero" | "fixed-point" | "power" | "values",
                  "ratio": 5.656854, "amplitude": 1.0, "values": [...]},
      "solver": {"rel_tol": 1e-8, "abs_tol": 1e-12, "scheme": "implicit",
                 "record_every": 0.01, ...},
      "diagnostics": {"sobolev_exponents": [0, 0.8333333333333334, 1],
                      "flux_shells": [1], "box_shells": [1],
                      "fixed_point_reference": true},
      "surrogate": {"s": 0.8333333333333334, "threshold": null,
                    "threshold_factor": null, "stop": false},
      "t_end": 5.0,
      "output": {"directory": "run", "formats": ["csv", "json"]}
    }

``power`` initial data is ``a_j = amplitude * ratio**(-j)``. The
linearization used by ``spectrum`` is in the frame ``f_0 = lam**(-1/3)``;
for another ``f_0`` multiply eigenvalues by ``sqrt(f_0 lam**(1/3))``, the
factor by which time is rescaled.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from . import analysis, io
from .core import DEFAULT_LAMBDA, ConfigurationError, ModelParams, sobolev_norm
from .equilibrium import (ForcingSpec, InfeasibleFixedPoint, fixed_point_general,
                          residual)
from .simulator import (BlowupSurrogate, DiagnosticsConfig, IntegrationError,
                        SolverOptions, default_reference, detect_crossing,
                        integrate, trajectory_divergence)
from .spectral import (CfConfig, ContinuedFractionPole, ConvergenceFailure,
                       characteristic_X, eigenvector, find_eigenvalues,
                       functional_identity_residual)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

_SCHEMA = {
    "model": {"lambda", "n_shells", "forcing", "closure"},
    "initial": {"kind", "ratio", "amplitude", "values"},
    "solver": {f.name for f in fields(SolverOptions)},
    "diagnostics": {f.name for f in fields(DiagnosticsConfig)},
    "surrogate": {"s", "threshold", "threshold_factor", "stop"},
    "t_end": None,
    "output": {"directory", "formats"},
}

DEFAULT_CONFIG = {
    "model": {"lambda": DEFAULT_LAMBDA, "n_shells": 20, "forcing": {}, "closure": "zero"},
    "initial": {"kind": "zero"},
    "solver": {},
    "diagnostics": {},
    "surrogate": {"s": 5.0 / 6.0, "threshold": None, "threshold_factor": None, "stop": False},
    "t_end": 5.0,
    "output": {"directory": "run", "formats": ["csv", "json"]},
}


class UsageError(Exception):
    pass


def _fail(msg):
    raise UsageError(msg)


def validate_config(cfg: dict, source: str = "config") -> None:
    if not isinstance(cfg, dict):
        _fail(f"{source}: top level must be a JSON object")
    for key, val in cfg.items():
        if key not in _SCHEMA:
            _fail(f"{source}: unknown key '{key}'")
        allowed = _SCHEMA[key]
        if allowed is None:
            continue
        if not isinstance(val, dict):
            _fail(f"{source}: '{key}' must be an object")
        for sub in val:
            if sub not in allowed:
                _fail(f"{source}: unknown key '{key}.{sub}'")


def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(f"cannot read config {path}: {exc.strerror}")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        _fail(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}")
    validate_config(cfg, str(path))
    return cfg


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def parse_forcing(text: str) -> dict:
    """``"0:1.0,3:0.5"``, a JSON map/list, or a path to a JSON file."""
    p = Path(text)
    if p.suffix == ".json" or p.exists():
        try:
            data = json.loads(p.read_text(encoding="utf-8"))
        except OSError as exc:
            _fail(f"cannot read forcing file {text}: {exc.strerror}")
        except json.JSONDecodeError as exc:
            _fail(f"{text}:{exc.lineno}:{exc.colno}: {exc.msg}")
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError:
            data = {}
            for item in text.split(","):
                if not item.strip():
                    continue
                try:
                    j, v = item.split(":")
                    data[str(int(j))] = float(v)
                except ValueError:
                    _fail(f"forcing entry '{item}' is not of the form j:value")
    if isinstance(data, dict) and "forcing" in data and isinstance(data["forcing"], (dict, list)):
        data = data["forcing"]
    if isinstance(data, list):
        data = {str(j): v for j, v in enumerate(data)}
    if not isinstance(data, dict):
        _fail("forcing must be a map of shell index to value")
    out = {}
    for k, v in data.items():
        try:
            out[str(int(k))] = float(v)
        except (TypeError, ValueError):
            _fail(f"forcing entry {k!r}: {v!r} is not numeric")
    return out


# ---------------------------------------------------------------- simulate

def _add_run_flags(p):
    p.add_argument("--config", help="JSON config file (default: $DYADIC_CONFIG)")
    p.add_argument("--shells", type=int, help="truncation index N")
    p.add_argument("--lambda", dest="lam", type=float, help="scaling base (default 2**2.5)")
    p.add_argument("--f0", type=float, help="single-mode forcing on shell 0")
    p.add_argument("--forcing", help="sparse forcing 'j:v,...', JSON, or JSON file")
    p.add_argument("--closure", choices=("zero", "geometric"))
    p.add_argument("--init", choices=("zero", "fixed-point", "power", "values"))
    p.add_argument("--init-ratio", type=float, help="ratio for --init power (default lambda)")
    p.add_argument("--init-amplitude", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--scheme", choices=("adaptive-embedded-pair", "integrating-factor", "implicit"))
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--abs-tol", type=float)
    p.add_argument("--record-every", type=float)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--s", dest="sur_s", type=float, help="surrogate Sobolev exponent")
    p.add_argument("--threshold", type=float, help="surrogate threshold")
    p.add_argument("--threshold-factor", type=float,
                   help="surrogate threshold as a multiple of the initial norm")
    p.add_argument("--stop-at-crossing", action="store_true")
    p.add_argument("--sobolev", help="comma-separated Sobolev exponents to record")
    p.add_argument("--flux-shells", help="comma-separated flux shells to record")
    p.add_argument("--box-shells", help="comma-separated box shells to record")
    p.add_argument("--out", help="output directory")


def _csv_list(text, conv):
    try:
        return [conv(x) for x in text.split(",") if x.strip()]
    except ValueError:
        _fail(f"cannot parse list '{text}'")


def build_config(args) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    path = args.config or os.environ.get("DYADIC_CONFIG")
    if path:
        cfg = _merge(cfg, load_config(path))
    m, s, i, d, sur = (cfg["model"], cfg["solver"], cfg["initial"],
                       cfg["diagnostics"], cfg["surrogate"])
    if args.shells is not None:
        m["n_shells"] = args.shells
    if args.lam is not None:
        m["lambda"] = args.lam
    if args.forcing is not None:
        m["forcing"] = parse_forcing(args.forcing)
    if args.f0 is not None:
        m["forcing"] = dict(m.get("forcing") or {})
        m["forcing"]["0"] = args.f0
    if args.closure:
        m["closure"] = args.closure
    if args.init:
        i["kind"] = args.init
    if args.init_ratio is not None:
        i["ratio"] = args.init_ratio
    if args.init_amplitude is not None:
        i["amplitude"] = args.init_amplitude
    if args.t_end is not None:
        cfg["t_end"] = args.t_end
    for flag, key in (("scheme", "scheme"), ("rel_tol", "rel_tol"), ("abs_tol", "abs_tol"),
                      ("record_every", "record_every"), ("max_steps", "max_steps")):
        v = getattr(args, flag)
        if v is not None:
            s[key] = v
    if args.sur_s is not None:
        sur["s"] = args.sur_s
    if args.threshold is not None:
        sur["threshold"] = args.threshold
    if args.threshold_factor is not None:
        sur["threshold_factor"] = args.threshold_factor
    if args.stop_at_crossing:
        sur["stop"] = True
    if args.sobolev:
        d["sobolev_exponents"] = _csv_list(args.sobolev, float)
    if args.flux_shells:
        d["flux_shells"] = _csv_list(args.flux_shells, int)
    if args.box_shells:
        d["box_shells"] = _csv_list(args.box_shells, int)
    if args.out:
        cfg["output"]["directory"] = args.out
    validate_config(cfg, "effective config")
    return cfg


def _model(cfg) -> ModelParams:
    m = cfg["model"]
    n = m.get("n_shells")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        _fail(f"model.n_shells must be an integer >= 1, got {n!r}")
    forcing = m.get("forcing") or {}
    if isinstance(forcing, list):
        forcing = {str(j): v for j, v in enumerate(forcing)}
    f = np.zeros(n + 1)
    for k, v in forcing.items():
        j = int(k)
        if not 0 <= j <= n:
            _fail(f"model.forcing: shell {j} outside 0..{n}")
        f[j] = float(v)
    try:
        return ModelParams(n, f, float(m.get("lambda", DEFAULT_LAMBDA)), m.get("closure", "zero"))
    except ConfigurationError as exc:
        _fail(f"model: {exc}")


def _initial(cfg, params: ModelParams) -> np.ndarray:
    i = cfg["initial"]
    kind = i.get("kind", "zero")
    j = np.arange(params.size, dtype=float)
    if kind == "zero":
        return np.zeros(params.size)
    if kind == "fixed-point":
        ref = default_reference(params)
        if ref is None:
            try:
                fp = fixed_point_general(ForcingSpec(tuple(params.forcing)), params)
            except InfeasibleFixedPoint as exc:
                _fail(f"initial.kind=fixed-point: {exc}")
            return fp.state
        return ref
    if kind == "power":
        ratio = float(i.get("ratio", params.lam))
        amp = float(i.get("amplitude", 1.0))
        if not ratio > 0:
            _fail("initial.ratio must be positive")
        return amp * ratio ** (-j)
    if kind == "values":
        v = np.asarray(i.get("values", []), dtype=float)
        if v.shape != (params.size,):
            _fail(f"initial.values has {v.size} entries, expected {params.size}")
        return v
    _fail(f"initial.kind must be zero, fixed-point, power or values, got {kind!r}")


def _solver(cfg) -> SolverOptions:
    try:
        return SolverOptions(**cfg["solver"])
    except (ConfigurationError, TypeError) as exc:
        _fail(f"solver: {exc}")


def _diagnostics(cfg, params) -> DiagnosticsConfig:
    d = dict(cfg["diagnostics"])
    for key in ("sobolev_exponents", "flux_shells", "box_shells"):
        if key in d:
            d[key] = tuple(d[key])
    dc = DiagnosticsConfig(**d)
    for J in dc.flux_shells:
        if not 1 <= J <= params.n_shells:
            _fail(f"diagnostics.flux_shells: {J} outside 1..{params.n_shells}")
    for J in dc.box_shells:
        if not 0 <= J <= params.n_shells:
            _fail(f"diagnostics.box_shells: {J} outside 0..{params.n_shells}")
    return dc


def _surrogate(cfg, a0) -> BlowupSurrogate | None:
    sur = cfg["surrogate"]
    s = float(sur.get("s", 5.0 / 6.0))
    th = sur.get("threshold")
    fac = sur.get("threshold_factor")
    if th is None and fac is not None:
        base = sobolev_norm(a0, s)
        if base == 0:
            _fail("surrogate.threshold_factor needs a nonzero initial norm")
        th = float(fac) * base
    if th is None:
        return None
    try:
        return BlowupSurrogate(float(th), s)
    except ConfigurationError as exc:
        _fail(f"surrogate: {exc}")


def run_simulation(cfg: dict, out_dir) -> int:
    """Run one configured simulation and write its artifacts to ``out_dir``."""
    params = _model(cfg)
    a0 = _initial(cfg, params)
    opts = _solver(cfg)
    diag = _diagnostics(cfg, params)
    sur = _surrogate(cfg, a0)
    t_end = cfg.get("t_end")
    if not isinstance(t_end, (int, float)) or not t_end > 0:
        _fail(f"t_end must be positive, got {t_end!r}")
    if opts.positivity_guard and np.any(a0 < 0):
        _fail("initial state must be nonnegative with solver.positivity_guard")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stop = sur if (sur is not None and cfg["surrogate"].get("stop")) else None
    code = EXIT_OK
    failure = None
    try:
        traj = integrate(params, a0, float(t_end), opts, diagnostics=diag, stop_when=stop)
    except IntegrationError as exc:
        traj = exc.trajectory
        failure = str(exc)
        code = EXIT_NUMERIC
        if traj is None:
            io.write_json(out / "summary.json", {"error": failure})
            return code
    if traj.truncated:
        code = EXIT_NUMERIC
    crossing = detect_crossing(traj, sur) if sur is not None else None
    io.write_trajectory_csv(traj, out / "trajectory.csv")
    extra = {"config": cfg, "initial": a0, "exit_code": code}
    if failure:
        extra["error"] = failure
    io.write_json(out / "summary.json", io.run_summary(traj, initial=a0, crossing=crossing,
                                                       extra=extra))
    return code


def cmd_simulate(args) -> int:
    cfg = build_config(args)
    code = run_simulation(cfg, cfg["output"]["directory"])
    print(f"wrote {Path(cfg['output']['directory']) / 'trajectory.csv'} (exit {code})")
    return code


# ---------------------------------------------------------------- fixed-point

def cmd_fixed_point(args) -> int:
    if (args.f0 is None) == (args.forcing is None):
        _fail("give exactly one of --f0 or --forcing")
    if args.f0 is not None:
        if not args.f0 > 0:
            _fail(f"--f0 must be positive, got {args.f0}")
        fmap = {"0": args.f0}
    else:
        fmap = parse_forcing(args.forcing)
    try:
        spec = ForcingSpec.from_mapping(fmap)
    except ConfigurationError as exc:
        _fail(f"forcing: {exc}")
    if spec.support_end > args.shells:
        _fail(f"forcing support ends at shell {spec.support_end} > --shells {args.shells}")
    try:
        params = ModelParams(args.shells, spec.values, args.lam)
    except ConfigurationError as exc:
        _fail(str(exc))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        fp = fixed_point_general(spec, params)
    except InfeasibleFixedPoint as exc:
        io.write_json(out / "fixed_point.json", {"error": str(exc)})
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    io.write_csv(out / "fixed_point.csv", ["j", "a_j"],
                 [(j, a) for j, a in enumerate(fp.state)])
    io.write_json(out / "fixed_point.json", {
        "C": fp.tail_constant,
        "tail_start": fp.tail_start,
        "residual": residual(params, fp.state),
        "residual_relative": residual(params, fp.state, relative=True),
        "params": io.params_to_dict(params),
    })
    print(f"a_0 = {float(fp.state[0])!r}, C = {float(fp.tail_constant)!r}")
    return EXIT_OK


# ---------------------------------------------------------------- spectrum

def cmd_spectrum(args) -> int:
    if not args.mu_min < args.mu_max:
        _fail("--mu-min must be below --mu-max")
    try:
        cf = CfConfig(depth=args.depth)
    except ConfigurationError as exc:
        _fail(str(exc))
    lam = args.lam
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid = np.linspace(args.mu_min, args.mu_max, args.grid)
    rows = []
    for mu in grid:
        try:
            x = characteristic_X(mu, cf, lam)
        except ContinuedFractionPole:
            x = math.nan
        except ConvergenceFailure:
            x = math.nan
        rows.append((mu, x))
    io.write_csv(out / "x_grid.csv", ["mu", "X"], rows)
    try:
        roots = find_eigenvalues((args.mu_min, args.mu_max), args.grid, cf, lam)
        entries = []
        for k, mu in enumerate(roots):
            ev = eigenvector(mu, args.shells, cf, lam)
            io.write_csv(out / f"eigenvector_{k}.csv", ["j", "c_j"], list(enumerate(ev.c)))
            entries.append({
                "mu": float(mu),
                "eigen_residual": ev.residual,
                "functional_identity_residual": functional_identity_residual(mu, cf, lam),
                "X": ev.characteristic,
                "cf_depth": ev.cf_depth_used,
                "eigenvector_file": f"eigenvector_{k}.csv",
            })
    except (ConvergenceFailure, ContinuedFractionPole) as exc:
        io.write_json(out / "roots.json", {"error": str(exc)})
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    io.write_json(out / "roots.json", {
        "interval": [args.mu_min, args.mu_max],
        "grid_points": args.grid,
        "lambda": lam,
        "n_shells": args.shells,
        "eigenvalues": entries,
    })
    print("eigenvalues:", ", ".join(f"{e['mu']:.12g}" for e in entries) or "none")
    return EXIT_OK


# ---------------------------------------------------------------- analyze

def _parse_range(text):
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError:
        _fail(f"--fit-range must look like J0:J1, got '{text}'")


def cmd_analyze(args) -> int:
    src = Path(args.trajectory)
    csv_path = src / "trajectory.csv" if src.is_dir() else src
    if not csv_path.exists():
        _fail(f"trajectory file {csv_path} not found")
    summary_path = Path(args.summary) if args.summary else None
    try:
        traj = io.load_trajectory(csv_path, summary_path)
    except (ValueError, KeyError) as exc:
        _fail(f"cannot load {csv_path}: {exc}")
    params = traj.params
    out = Path(args.out) if args.out else csv_path.parent
    out.mkdir(parents=True, exist_ok=True)

    j0, j1 = _parse_range(args.fit_range)
    if not 0 <= j0 < j1 <= params.n_shells:
        _fail(f"--fit-range {j0}:{j1} outside shells 0..{params.n_shells}")
    if args.average_from is not None:
        energies = analysis.time_averaged_shell_energies(traj, args.average_from)
    else:
        energies = traj.final_state ** 2
    try:
        fit = analysis.spectrum_fit(energies, (j0, j1), energies=True)
    except ConfigurationError as exc:
        _fail(f"--fit-range {j0}:{j1}: {exc}")
    io.write_csv(out / "fit.csv", ["j", "log2_shell_energy", "fitted", "residual"],
                 analysis.fit_table(fit, energies, energies=True))

    report = {"fit": {"slope": fit.slope, "intercept": fit.intercept,
                      "residual_rms": fit.residual_rms, "j_range": list(fit.j_range)}}
    ref = default_reference(params)
    s = args.s
    summary = io.read_json(csv_path.with_name("summary.json")) if (
        summary_path is None and csv_path.with_name("summary.json").exists()) else (
        io.read_json(summary_path) if summary_path else {})
    threshold = args.regularity_threshold
    if threshold is None:
        threshold = (summary.get("crossing") or {}).get("threshold")
    if threshold is None:
        threshold = 50.0 * sobolev_norm(traj.states[0], s)

    if ref is not None:
        dec = analysis.decay_check(traj, ref, args.windows, threshold, slack=args.slack, s=s)
        decay = {"rate": dec.rate, "slack": dec.slack, "regularity_threshold": threshold,
                 "pass_fraction": dec.pass_fraction,
                 "windows": [{"T1": w.T1, "T2": w.T2, "measured_decrement": w.measured_decrement,
                              "bound_decrement": w.bound_decrement, "passed": w.passed}
                             for w in dec.windows]}
        b0 = float(np.linalg.norm(traj.states[0] - ref))
        bound = analysis.blowup_bound(b0, params.lam, params.f0)
        sur = detect_crossing(traj, BlowupSurrogate(threshold, s), refine=False)
        blow = {"b0_l2": b0, "bound": bound, "threshold": threshold, "s": s,
                "crossing_time": sur.crossing_time, "attained_max": sur.attained_max,
                "crossing_within_bound": (None if sur.crossing_time is None
                                          else sur.crossing_time <= bound)}
    else:
        decay = {"skipped": "forcing is not single-mode; no fixed-point reference"}
        blow = {"skipped": "forcing is not single-mode; no fixed-point reference"}
    defects = analysis.energy_balance_defects(traj)
    elapsed = float(traj.t[-1] - traj.t[0])
    balance = {"closure": params.closure, "max_defect": float(np.max(np.abs(defects))), "elapsed": elapsed,
               "defect_per_time": float(np.max(np.abs(defects))) / elapsed if elapsed else None,
               "final_defect": float(defects[-1])}
    if params.f0 > 0:
        k = analysis.kolmogorov_constants(params.f0, params.lam)
        report["kolmogorov"] = {"epsilon": k.epsilon, "c0": k.c0, "prefactor": k.prefactor}
    io.write_json(out / "decay.json", decay)
    io.write_json(out / "balance.json", balance)
    io.write_json(out / "blowup.json", blow)
    io.write_json(out / "analysis.json", report)
    print(f"slope {fit.slope:.12g} over {j0}:{j1}; balance defect {balance['max_defect']:.3g}"
          f" ({params.closure} closure)")
    return EXIT_OK


# ---------------------------------------------------------------- sweep

def _sweep_one(job):
    cfg, out_dir = job
    try:
        return run_simulation(cfg, out_dir)
    except UsageError as exc:
        return (EXIT_CONFIG, str(exc))


def cmd_sweep(args) -> int:
    cfg = build_config(args)
    shells = _csv_list(args.shells_list, int)
    if not shells or any(b < a for a, b in zip(shells, shells[1:])):
        _fail("--shells-list must be a nonempty ascending list")
    root = Path(cfg["output"]["directory"])
    jobs = []
    for n in shells:
        c = copy.deepcopy(cfg)
        c["model"]["n_shells"] = n
        _model(c)
        jobs.append((c, root / f"N{n}"))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(_sweep_one, jobs))
    else:
        codes = [_sweep_one(j) for j in jobs]
    rows = []
    prev = None
    worst = EXIT_OK
    for n, (c, d), code in zip(shells, jobs, codes):
        if isinstance(code, tuple):
            rows.append({"n_shells": n, "exit_code": code[0], "error": code[1]})
            worst = max(worst, code[0])
            prev = None
            continue
        worst = max(worst, code)
        traj = io.load_trajectory(d / "trajectory.csv")
        summ = io.read_json(d / "summary.json")
        row = {"n_shells": n, "exit_code": code,
               "crossing_time": (summ.get("crossing") or {}).get("crossing_time"),
               "directory": str(d)}
        if prev is not None:
            row["divergence"] = trajectory_divergence(prev, traj)
        rows.append(row)
        prev = traj
    io.write_json(root / "sweep.json", {"runs": rows})
    print(f"wrote {root / 'sweep.json'}")
    return worst


# ---------------------------------------------------------------- entry

class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for numerical failure here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dyadic", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="integrate the truncated system")
    _add_run_flags(sp)
    sp.set_defaults(func=cmd_simulate)

    fp = sub.add_parser("fixed-point", help="fixed point for a finitely supported force")
    fp.add_argument("--f0", type=float)
    fp.add_argument("--forcing", help="sparse forcing 'j:v,...', JSON, or JSON file")
    fp.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
    fp.add_argument("--shells", type=int, default=40)
    fp.add_argument("--out", default="fixed_point")
    fp.set_defaults(func=cmd_fixed_point)

    sp2 = sub.add_parser("spectrum", help="characteristic function and real eigenvalues")
    sp2.add_argument("--mu-min", type=float, default=-8.0)
    sp2.add_argument("--mu-max", type=float, default=-0.05)
    sp2.add_argument("--grid", type=int, default=400)
    sp2.add_argument("--depth", type=int, default=100)
    sp2.add_argument("--shells", type=int, default=40)
    sp2.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
    sp2.add_argument("--out", default="spectrum")
    sp2.set_defaults(func=cmd_spectrum)

    an = sub.add_parser("analyze", help="fits, decay and balance reports for a run")
    an.add_argument("trajectory", help="trajectory CSV or run directory")
    an.add_argument("--summary", help="run summary JSON (default: next to the CSV)")
    an.add_argument("--fit-range", default="3:16")
    an.add_argument("--average-from", type=float,
                    help="fit the time average of a_j**2 over t >= this (default: final state)")
    an.add_argument("--windows", type=float, default=0.5, help="decay window width")
    an.add_argument("--slack", type=float, default=0.1)
    an.add_argument("--regularity-threshold", type=float)
    an.add_argument("--s", type=float, default=5.0 / 6.0)
    an.add_argument("--out")
    an.set_defaults(func=cmd_analyze)

    sw = sub.add_parser("sweep", help="the same run at several truncations")
    _add_run_flags(sw)
    sw.add_argument("--shells-list", required=True, help="ascending list, e.g. 16,20,24")
    sw.add_argument("--jobs", type=int, default=1)
    sw.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
