"""Time integration of the truncated system with diagnostics and a blow-up
surrogate.

Three schemes share one driver loop:

``adaptive-embedded-pair``
    Dormand-Prince 5(4) with an elementary step controller. Non-stiff; fine
    until energy reaches the top shells.
``integrating-factor``
    Second-order exponential time differencing. The loss rate
    ``k_j = lam**j a_{j+1}`` is frozen at the start of each step and the
    ``-k_j a_j`` term is integrated exactly, which keeps every stage
    nonnegative and handles the slaving of a shell drained by a large
    neighbour. The gain term ``lam**(j-1) a_{j-1}**2`` stays explicit, so
    once the upper shells carry O(1) amplitudes the step is still limited
    by ``lam**N``-sized rates. The embedded first-order solution gives the
    error estimate.
``implicit`` (default)
    scipy's Radau IIA with the analytic tridiagonal Jacobian. The only
    scheme that stays cheap once the cascade has reached the boundary shell,
    which for ``lam = 2**2.5`` happens within a fraction of a time unit.

With ``positivity_guard`` the first two schemes reject any step producing
a component below ``-abs_tol`` and clamp smaller negatives to zero. The
implicit scheme cannot reject steps, so it clamps and records a
``positivity`` event when a component falls below ``-abs_tol``.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import Radau

from .core import (ConfigurationError, ModelParams, closure_value, jacobian, rhs,
                   sobolev_norm)

__all__ = [
    "SCHEMES",
    "IntegrationError",
    "SolverOptions",
    "DiagnosticsConfig",
    "Event",
    "Trajectory",
    "BlowupSurrogate",
    "compute_diagnostics",
    "integrate",
    "detect_crossing",
    "galerkin_study",
    "GalerkinRow",
]

SCHEMES = ("adaptive-embedded-pair", "integrating-factor", "implicit")


class IntegrationError(RuntimeError):
    """Non-finite state encountered; carries the last good state and the
    partial trajectory."""

    def __init__(self, message, t, state, trajectory=None):
        super().__init__(message)
        self.t = t
        self.state = state
        self.trajectory = trajectory


@dataclass(frozen=True)
class SolverOptions:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_step: float = math.inf
    initial_step: float = 1e-4
    positivity_guard: bool = True
    scheme: str = "implicit"
    record_every: float = 0.01
    max_steps: int = 2_000_000
    min_step: float = 1e-300

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "initial_step", "record_every", "min_step"):
            v = getattr(self, name)
            if not v > 0:
                raise ConfigurationError(f"{name} must be positive, got {v!r}")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.max_steps < 1:
            raise ConfigurationError("max_steps must be >= 1")


@dataclass(frozen=True)
class DiagnosticsConfig:
    sobolev_exponents: tuple = (0.0, 5.0 / 6.0, 1.0)
    flux_shells: tuple = (1,)
    box_shells: tuple = (1,)
    fixed_point_reference: bool = True


@dataclass(frozen=True)
class Event:
    kind: str
    time: float
    detail: str = ""


@dataclass(frozen=True)
class BlowupSurrogate:
    """First time the ``H^s`` norm reaches ``threshold``."""

    threshold: float
    s: float = 5.0 / 6.0
    crossing_time: float | None = None
    attained_max: float = 0.0

    def __post_init__(self):
        if not self.threshold > 0:
            raise ConfigurationError("threshold must be positive")

    @property
    def crossed(self) -> bool:
        return self.crossing_time is not None


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded samples of one run. Treat as read-only."""

    t: np.ndarray
    states: np.ndarray
    params: ModelParams
    options: SolverOptions
    diagnostics_config: DiagnosticsConfig
    reference: np.ndarray | None
    diagnostics: dict = field(default_factory=dict)
    events: tuple = ()
    wall_time: float = 0.0
    n_steps: int = 0
    n_rejected: int = 0

    def __len__(self):
        return self.t.size

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def truncated(self) -> bool:
        return any(e.kind == "truncated" for e in self.events)

    def column(self, name: str) -> np.ndarray:
        return self.diagnostics[name]

    def hs_key(self, s: float) -> str:
        return f"Hs:{float(s)!r}"

    def norm_series(self, s: float) -> np.ndarray:
        key = self.hs_key(s)
        if key in self.diagnostics:
            return self.diagnostics[key]
        return np.array([sobolev_norm(a, s) for a in self.states])


def default_reference(params: ModelParams) -> np.ndarray | None:
    """Single-mode fixed point when the forcing is ``(f_0, 0, ...)``, f_0 > 0."""
    f = params.forcing
    if f[0] > 0 and not np.any(f[1:]):
        j = np.arange(params.size, dtype=float)
        return params.lam ** (1.0 / 6.0 - j / 3.0) * math.sqrt(f[0])
    return None


def compute_diagnostics(params: ModelParams, states: np.ndarray,
                        config: DiagnosticsConfig, reference=None) -> dict:
    states = np.atleast_2d(np.asarray(states, dtype=float))
    out = {"E": 0.5 * np.einsum("ij,ij->i", states, states)}
    j = np.arange(params.size)
    for s in config.sobolev_exponents:
        w = 2.0 ** (float(s) * j)
        out[f"Hs:{float(s)!r}"] = np.linalg.norm(states * w, axis=1)
    for J in config.box_shells:
        if not 0 <= J <= params.n_shells:
            raise ConfigurationError(f"box shell {J} outside 0..{params.n_shells}")
        out[f"box:{int(J)}"] = 0.5 * np.einsum("ij,ij->i", states[:, J:], states[:, J:])
    for J in config.flux_shells:
        if not 1 <= J <= params.n_shells:
            raise ConfigurationError(f"flux shell {J} outside 1..{params.n_shells}")
        out[f"flux:{int(J)}"] = params.lam ** (J - 1) * states[:, J - 1] ** 2 * states[:, J]
    if reference is not None:
        out["dist_fp"] = np.linalg.norm(states - reference, axis=1)
    else:
        out["dist_fp"] = np.full(states.shape[0], np.nan)
    return out


# Dormand-Prince 5(4)
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = _B - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                    -92097 / 339200, 187 / 2100, 1 / 40])


class _DormandPrince:
    order = 5

    def __init__(self, params):
        self.f = lambda y: rhs(params, y)
        self.k0 = None

    def step(self, y, h):
        k = [self.k0 if self.k0 is not None else self.f(y)]
        for i in range(1, 7):
            yi = y + h * sum(a * kk for a, kk in zip(_A[i], k) if a)
            k.append(self.f(yi))
        y_new = yi  # row 6 of A equals B
        err = h * sum(e * kk for e, kk in zip(_E, k) if e)
        return y_new, err, k[6]

    def accept(self, k_last):
        self.k0 = k_last

    def reset(self):
        self.k0 = None


def _phi1(z):
    # (exp(z) - 1) / z, stable at small |z|
    out = np.ones_like(z)
    nz = z != 0
    out[nz] = np.expm1(z[nz]) / z[nz]
    return out


def _phi2(z):
    # (exp(z) - 1 - z) / z**2
    out = np.full_like(z, 0.5)
    small = np.abs(z) < 1e-3
    zs = z[small]
    out[small] = 0.5 + zs / 6.0 + zs * zs / 24.0 + zs ** 3 / 120.0
    big = ~small
    zb = z[big]
    out[big] = (np.expm1(zb) - zb) / (zb * zb)
    return out


class _ExponentialEuler2:
    """ETD2RK (Cox-Matthews) on the frozen diagonal loss rate."""

    order = 2

    def __init__(self, params):
        self.params = params
        self.lp = params.powers()

    def _rates(self, y):
        nxt = np.empty_like(y)
        nxt[:-1] = y[1:]
        nxt[-1] = closure_value(self.params, y)
        return self.lp * nxt

    def step(self, y, h):
        k = np.maximum(self._rates(y), 0.0)
        z = -h * k
        ez = np.exp(z)
        p1 = _phi1(z)
        n0 = rhs(self.params, y) + k * y
        u = ez * y + h * p1 * n0
        n1 = rhs(self.params, u) + k * u
        corr = h * _phi2(z) * (n1 - n0)
        return u + corr, corr, None

    def accept(self, _):
        pass

    def reset(self):
        pass


def _validate_initial(params, initial, opts):
    a0 = np.array(initial, dtype=float)
    if a0.shape != (params.size,):
        raise ConfigurationError(
            f"initial state has shape {a0.shape}, expected ({params.size},)")
    if not np.all(np.isfinite(a0)):
        raise ConfigurationError("initial state must be finite")
    if opts.positivity_guard and np.any(a0 < 0):
        raise ConfigurationError("positivity_guard requires nonnegative initial data")
    return a0


def _crossed(a, stop_when):
    return stop_when is not None and sobolev_norm(a, stop_when.s) >= stop_when.threshold


def integrate(params: ModelParams, initial, t_end: float,
              opts: SolverOptions = SolverOptions(), *,
              diagnostics: DiagnosticsConfig = DiagnosticsConfig(),
              reference=None, stop_when: BlowupSurrogate | None = None,
              t_start: float = 0.0) -> Trajectory:
    """Integrate from ``t_start`` to ``t_end``.

    Samples are recorded at ``t_start + k * record_every`` and at event
    times. ``reference`` defaults to the single-mode fixed point when the
    forcing has that form. With ``stop_when`` the run ends at the first
    accepted step whose ``H^s`` norm reaches the threshold; that state is
    recorded as the last sample with a ``threshold`` event.

    Step-size underflow or exhausting ``max_steps`` returns the partial
    trajectory with a ``truncated`` event. A non-finite state raises
    :class:`IntegrationError`.
    """
    if not t_end > t_start:
        raise ConfigurationError("t_end must exceed the start time")
    a0 = _validate_initial(params, initial, opts)
    if reference is None and diagnostics.fixed_point_reference:
        reference = default_reference(params)
    wall0 = _time.perf_counter()

    ts = [t_start]
    ys = [a0.copy()]
    events = []
    n_steps = n_rejected = 0

    def finish():
        t_arr = np.asarray(ts)
        st = np.asarray(ys)
        return Trajectory(
            t_arr, st, params, opts, diagnostics, reference,
            compute_diagnostics(params, st, diagnostics, reference), tuple(events),
            _time.perf_counter() - wall0, n_steps, n_rejected)

    n_samples = int(math.floor((t_end - t_start) / opts.record_every + 1e-9))
    sample_times = t_start + opts.record_every * np.arange(1, n_samples + 1)
    if not sample_times.size or sample_times[-1] < t_end - 1e-12 * max(1.0, abs(t_end)):
        sample_times = np.append(sample_times, t_end)

    if _crossed(a0, stop_when):
        events.append(Event("threshold", t_start, "initial state above threshold"))
        return finish()

    if opts.scheme == "implicit":
        try:
            n_steps, n_rejected = _run_implicit(params, a0, t_start, t_end, opts,
                                                sample_times, stop_when, ts, ys, events)
        except IntegrationError as exc:
            raise IntegrationError(str(exc), exc.t, exc.state, finish()) from None
        return finish()

    stepper = (_DormandPrince if opts.scheme == "adaptive-embedded-pair"
               else _ExponentialEuler2)(params)
    q = stepper.order
    t = t_start
    y = a0
    h = min(opts.initial_step, opts.max_step)
    next_idx = 0
    clamps = 0
    while next_idx < sample_times.size:
        target = sample_times[next_idx]
        if n_steps + n_rejected >= opts.max_steps:
            events.append(Event("truncated", t, f"max_steps={opts.max_steps} exhausted"))
            break
        h_try = min(h, target - t)
        landing = h_try >= target - t
        if h_try < opts.min_step or t + h_try == t:
            events.append(Event("truncated", t, f"step size underflow (h={h_try:.3g})"))
            break
        y_new, err, k_last = stepper.step(y, h_try)
        if not np.all(np.isfinite(y_new)):
            n_rejected += 1
            stepper.reset()
            h = 0.25 * h_try
            if h < opts.min_step or t + h == t:
                raise IntegrationError(f"non-finite state near t={t!r}", t, y.copy(), finish())
            continue
        scale = opts.abs_tol + opts.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.max(np.abs(err) / scale))
        if err_norm > 1.0:
            n_rejected += 1
            stepper.reset()
            h = h_try * max(0.1, 0.9 * err_norm ** (-1.0 / q))
            continue
        if opts.positivity_guard:
            neg = y_new < 0
            if np.any(neg):
                if np.any(y_new < -opts.abs_tol):
                    n_rejected += 1
                    stepper.reset()
                    h = 0.5 * h_try
                    continue
                y_new = np.where(neg, 0.0, y_new)
                clamps += 1
                k_last = None
        n_steps += 1
        t = target if landing else t + h_try
        y = y_new
        if k_last is None:
            stepper.reset()
        else:
            stepper.accept(k_last)
        fac = 5.0 if err_norm == 0 else min(5.0, 0.9 * err_norm ** (-1.0 / q))
        if not landing:
            h = min(h_try * max(0.2, fac), opts.max_step)
        else:
            h = min(max(h, h_try * max(0.2, fac)), opts.max_step)
        if _crossed(y, stop_when):
            ts.append(t)
            ys.append(y.copy())
            events.append(Event("threshold", t,
                                f"H^{stop_when.s:.6g} norm reached {stop_when.threshold:.6g}"))
            break
        if landing:
            ts.append(t)
            ys.append(y.copy())
            next_idx += 1
    if clamps:
        events.append(Event("clamp", t, f"{clamps} steps clamped sub-tolerance negatives"))
    return finish()


def _run_implicit(params, a0, t0, t_end, opts, sample_times, stop_when, ts, ys, events):
    solver = Radau(lambda _t, y: rhs(params, y), t0, a0, t_end,
                   rtol=opts.rel_tol, atol=opts.abs_tol,
                   jac=lambda _t, y: jacobian(params, y),
                   first_step=min(opts.initial_step, t_end - t0),
                   max_step=opts.max_step)
    idx = 0
    violated = False
    n_steps = 0
    while solver.status == "running":
        if n_steps >= opts.max_steps:
            events.append(Event("truncated", solver.t, f"max_steps={opts.max_steps} exhausted"))
            break
        msg = solver.step()
        if solver.status == "failed":
            events.append(Event("truncated", solver.t, f"implicit solver: {msg}"))
            break
        n_steps += 1
        y = solver.y
        if not np.all(np.isfinite(y)):
            raise IntegrationError(f"non-finite state near t={solver.t!r}", ts[-1], ys[-1].copy())
        dense = solver.dense_output()
        while idx < sample_times.size and sample_times[idx] <= solver.t:
            ts.append(float(sample_times[idx]))
            ys.append(_guard(dense(sample_times[idx]), opts))
            idx += 1
        if opts.positivity_guard and np.any(y < -opts.abs_tol) and not violated:
            violated = True
            events.append(Event("positivity", solver.t,
                                f"component {float(y.min()):.3g} below -abs_tol"))
        if _crossed(y, stop_when):
            if ts[-1] < solver.t:
                ts.append(float(solver.t))
                ys.append(_guard(y, opts))
            events.append(Event("threshold", solver.t,
                                f"H^{stop_when.s:.6g} norm reached {stop_when.threshold:.6g}"))
            break
    return n_steps, 0


def _guard(y, opts):
    y = np.array(y, dtype=float)
    if opts.positivity_guard:
        y[y < 0] = 0.0
    return y


def detect_crossing(traj: Trajectory, surrogate: BlowupSurrogate, *,
                    refine: bool = True, time_tol: float = 1e-9,
                    max_refinements: int = 40) -> BlowupSurrogate:
    """Locate the first time the ``H^s`` norm meets the threshold.

    The first sample at or above the threshold brackets the crossing with
    its predecessor. With ``refine`` the bracket is re-integrated from the
    earlier sample at a cadence of 1/64 of its width until it is narrower
    than ``time_tol``; the final time comes from linear interpolation of the
    norm across the last bracket.
    """
    if len(traj) == 0:
        raise ConfigurationError("empty trajectory")
    norms = traj.norm_series(surrogate.s)
    attained = float(np.max(norms))
    hits = np.flatnonzero(norms >= surrogate.threshold)
    if hits.size == 0:
        return replace(surrogate, crossing_time=None, attained_max=attained)
    i = int(hits[0])
    if i == 0:
        return replace(surrogate, crossing_time=float(traj.t[0]), attained_max=attained)
    t_lo, t_hi = float(traj.t[i - 1]), float(traj.t[i])
    n_lo, n_hi = float(norms[i - 1]), float(norms[i])
    a_lo = traj.states[i - 1]
    if refine:
        for _ in range(max_refinements):
            width = t_hi - t_lo
            if width <= time_tol:
                break
            opts = replace(traj.options, record_every=width / 64.0,
                           initial_step=min(traj.options.initial_step, width / 64.0),
                           max_step=min(traj.options.max_step, width / 64.0))
            sub = integrate(traj.params, a_lo, t_hi, opts, diagnostics=DiagnosticsConfig(
                sobolev_exponents=(surrogate.s,), flux_shells=(), box_shells=(),
                fixed_point_reference=False), t_start=t_lo)
            sn = sub.norm_series(surrogate.s)
            k = np.flatnonzero(sn >= surrogate.threshold)
            if k.size == 0 or k[0] == 0:
                break
            k = int(k[0])
            t_lo, t_hi = float(sub.t[k - 1]), float(sub.t[k])
            n_lo, n_hi = float(sn[k - 1]), float(sn[k])
            a_lo = sub.states[k - 1]
    frac = (surrogate.threshold - n_lo) / (n_hi - n_lo) if n_hi > n_lo else 1.0
    tc = t_lo + min(max(frac, 0.0), 1.0) * (t_hi - t_lo)
    return replace(surrogate, crossing_time=tc, attained_max=max(attained, n_hi))


@dataclass(frozen=True)
class GalerkinRow:
    n_shells: int
    crossing_time: float | None
    divergence: float | None
    trajectory: Trajectory


def galerkin_study(params_base: ModelParams, n_list, initial_rule, t_end: float,
                   opts: SolverOptions = SolverOptions(), *,
                   surrogate=None, window: float | None = None) -> list[GalerkinRow]:
    """Run the same problem at several truncations.

    ``initial_rule(params)`` builds the initial state for each truncation.
    ``surrogate`` is a :class:`BlowupSurrogate` or a callable
    ``(params, initial) -> BlowupSurrogate``; runs stop at its crossing.
    ``divergence`` for row ``i > 0`` is the max over common sample times
    ``<= window`` (default: the common span) of the l2 distance between the
    first ``N_{i-1} + 1`` shells of runs ``i - 1`` and ``i``.
    """
    n_list = [int(n) for n in n_list]
    if any(b < a for a, b in zip(n_list, n_list[1:])):
        raise ConfigurationError("n_list must be ascending")
    rows = []
    prev = None
    for n in n_list:
        params = params_base.with_shells(n)
        a0 = np.asarray(initial_rule(params), dtype=float)
        sur = surrogate(params, a0) if callable(surrogate) else surrogate
        try:
            traj = integrate(params, a0, t_end, opts, stop_when=sur)
        except IntegrationError as exc:
            raise IntegrationError(f"N={n}: {exc}", exc.t, exc.state, exc.trajectory) from exc
        ct = detect_crossing(traj, sur).crossing_time if sur is not None else None
        div = None
        if prev is not None:
            div = trajectory_divergence(prev.trajectory, traj, window)
        row = GalerkinRow(n, ct, div, traj)
        rows.append(row)
        prev = row
    return rows


def trajectory_divergence(coarse: Trajectory, fine: Trajectory, window=None) -> float:
    m = min(coarse.params.size, fine.params.size)
    t_max = min(coarse.t[-1], fine.t[-1])
    if window is not None:
        t_max = min(t_max, window)
    # samples lie on a shared cadence grid; match by rounding to it
    dt = coarse.options.record_every
    ci = {round(t / dt): i for i, t in enumerate(coarse.t) if t <= t_max + 1e-12}
    best = 0.0
    for i, t in enumerate(fine.t):
        if t > t_max + 1e-12:
            break
        key = round(t / dt)
        if key in ci and abs(coarse.t[ci[key]] - t) < 1e-9 * max(1.0, abs(t)):
            best = max(best, float(np.linalg.norm(coarse.states[ci[key], :m] - fine.states[i, :m])))
    return best
