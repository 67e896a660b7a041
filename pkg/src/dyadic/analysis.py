"""Post-processing of states and trajectories: spectrum fits, Kolmogorov
constants, decay and blow-up bounds, and energy-balance audits.

Spectrum convention: the spectral density at the left edge of shell ``j``
is taken to be the total shell energy, ``E(2**j) := a_j**2``. With it the
fixed point reproduces ``E(|k|) = 2**(5/6) f_0 |k|**(-5/3)`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_LAMBDA, ConfigurationError
from .simulator import Trajectory

__all__ = [
    "FitResult",
    "KolmogorovConstants",
    "DecayWindow",
    "DecayReport",
    "spectrum_fit",
    "fit_table",
    "time_averaged_shell_energies",
    "kolmogorov_constants",
    "decay_rate_bound",
    "decay_check",
    "blowup_bound",
    "energy_balance_defects",
    "energy_balance_audit",
]


@dataclass(frozen=True)
class FitResult:
    """Least-squares line through ``(j, log2 E_j)`` over ``j_range`` (inclusive)."""

    slope: float
    intercept: float
    residual_rms: float
    j_range: tuple


@dataclass(frozen=True)
class KolmogorovConstants:
    epsilon: float
    c0: float
    prefactor: float


@dataclass(frozen=True)
class DecayWindow:
    T1: float
    T2: float
    measured_decrement: float
    bound_decrement: float
    passed: bool


@dataclass(frozen=True)
class DecayReport:
    windows: tuple
    pass_fraction: float
    slack: float
    rate: float

    @property
    def empty(self) -> bool:
        return not self.windows


def spectrum_fit(values, j_range, *, energies: bool = False) -> FitResult:
    """Fit ``log2(a_j**2)`` against ``j``.

    ``values`` is a state ``a`` or, with ``energies=True``, shell energies
    ``a_j**2`` (e.g. time averages). The slope is per shell octave, so the
    Kolmogorov value is ``-5/3``.
    """
    v = np.asarray(values, dtype=float)
    e = v if energies else v * v
    j0, j1 = (int(x) for x in j_range)
    if not 0 <= j0 < j1 < e.size:
        raise ConfigurationError(f"fit range {j0}:{j1} outside shells 0..{e.size - 1}")
    seg = e[j0: j1 + 1]
    bad = np.flatnonzero(~(seg > 0))
    if bad.size:
        raise ConfigurationError(f"nonpositive shell energy at j={j0 + int(bad[0])}")
    j = np.arange(j0, j1 + 1, dtype=float)
    y = np.log2(seg)
    A = np.vstack([j, np.ones_like(j)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - (slope * j + intercept)
    return FitResult(float(slope), float(intercept),
                     float(np.sqrt(np.mean(res * res))), (j0, j1))


def fit_table(fit: FitResult, values, *, energies: bool = False) -> np.ndarray:
    """Rows ``(j, log2_shell_energy, fitted, residual)`` over the fit range."""
    v = np.asarray(values, dtype=float)
    e = v if energies else v * v
    j = np.arange(fit.j_range[0], fit.j_range[1] + 1)
    y = np.log2(e[j])
    fitted = fit.slope * j + fit.intercept
    return np.column_stack([j, y, fitted, y - fitted])


def time_averaged_shell_energies(traj: Trajectory, t_from: float = None) -> np.ndarray:
    """Trapezoidal time average of ``a_j**2`` over samples with ``t >= t_from``."""
    mask = np.ones(len(traj), bool) if t_from is None else traj.t >= t_from
    t = traj.t[mask]
    e = traj.states[mask] ** 2
    if t.size == 1:
        return e[0]
    if t.size == 0:
        raise ConfigurationError(f"no samples after t={t_from}")
    return np.trapezoid(e, t, axis=0) / (t[-1] - t[0])


def kolmogorov_constants(f0: float, lam: float = DEFAULT_LAMBDA) -> KolmogorovConstants:
    """Dissipation rate, Kolmogorov constant and spectral prefactor of the
    single-mode fixed point.

    ``epsilon = a_0 f_0 = lam**(1/6) f_0**1.5``, ``prefactor = lam**(1/3) f_0``
    and ``c0 = prefactor / epsilon**(2/3) = lam**(2/9)``; at the default
    ``lam`` these are ``2**(5/12) f_0**1.5``, ``2**(5/6) f_0`` and
    ``2**(5/9)``.
    """
    if not f0 > 0:
        raise ConfigurationError(f"f0 must be positive, got {f0!r}")
    eps = lam ** (1.0 / 6.0) * f0 ** 1.5
    c0 = lam ** (2.0 / 9.0)
    pref = lam ** (1.0 / 3.0) * f0
    if abs(c0 * eps ** (2.0 / 3.0) - pref) > 1e-12 * max(1.0, pref):
        raise ArithmeticError("Kolmogorov constants are inconsistent")
    return KolmogorovConstants(eps, c0, pref)


def decay_rate_bound(f0: float, lam: float = DEFAULT_LAMBDA) -> float:
    """Guaranteed decay rate of ``||a - a_fp||`` for regular solutions.

    ``0.5 * lam**(-1/3)`` at ``f0 = lam**(-1/3)``; other forcings follow from
    the scaling ``a -> g a``, ``t -> t / g`` with ``g**2 = f0 lam**(1/3)``.
    """
    return 0.5 * lam ** (-1.0 / 6.0) * math.sqrt(f0)


def decay_check(traj: Trajectory, fixed_point_ref, windows, regularity_threshold: float, *,
                slack: float = 0.1, s: float = 5.0 / 6.0, f0: float = None) -> DecayReport:
    """Compare the measured decrement of ``||b||`` with the regular-solution bound.

    ``windows`` is a width (windows tile the run from its first sample) or
    a sequence of ``(T1, T2)``. A window is admitted only if every sample in
    it, endpoints included, has ``H^s`` norm below ``regularity_threshold``
    and ``||b(T1)|| > 0``. It passes when the measured decrement is at least
    ``(1 - slack)`` times the bound. ``pass_fraction`` is NaN when no window
    is admitted.
    """
    ref = np.asarray(fixed_point_ref, dtype=float)
    if ref.shape != (traj.params.size,):
        raise ConfigurationError("reference length does not match the trajectory")
    if f0 is None:
        f0 = traj.params.f0
    rate = decay_rate_bound(f0, traj.params.lam)
    t = traj.t
    t0, tend = float(t[0]), float(t[-1])
    if np.isscalar(windows):
        width = float(windows)
        if not width > 0:
            raise ConfigurationError("window width must be positive")
        n = int(math.floor((tend - t0) / width + 1e-9))
        wins = [(t0 + i * width, t0 + (i + 1) * width) for i in range(n)]
    else:
        wins = [(float(a), float(b)) for a, b in windows]
    bnorm = np.linalg.norm(traj.states - ref, axis=1)
    noise = 1e-12 * max(1.0, float(np.linalg.norm(ref)))
    hs = traj.norm_series(s)
    eps_t = 1e-9 * max(1.0, abs(tend))
    out = []
    for T1, T2 in wins:
        if not T1 < T2:
            raise ConfigurationError(f"window ({T1}, {T2}) is empty")
        if T1 < t0 - eps_t or T2 > tend + eps_t:
            raise ConfigurationError(f"window ({T1}, {T2}) outside trajectory [{t0}, {tend}]")
        inside = (t >= T1 - eps_t) & (t <= T2 + eps_t)
        hs_ends = np.interp([T1, T2], t, hs)
        if np.any(hs[inside] >= regularity_threshold) or np.any(hs_ends >= regularity_threshold):
            continue
        b1, b2 = np.interp([T1, T2], t, bnorm)
        if b1 <= noise:
            continue
        measured = float(b1 - b2)
        bound = rate * (T2 - T1)
        passed = measured >= (1.0 - slack) * bound - 1e-12 * max(1.0, bound)
        out.append(DecayWindow(T1, T2, measured, bound, bool(passed)))
    frac = (sum(w.passed for w in out) / len(out)) if out else math.nan
    return DecayReport(tuple(out), frac, slack, rate)


def blowup_bound(b0_l2: float, lam: float = DEFAULT_LAMBDA, f0: float = None) -> float:
    """Latest possible ``H^{5/6}`` blow-up time, ``2 lam**(1/3) ||b(0)||``.

    For ``f0`` other than ``lam**(-1/3)`` the rescaled bound is ``2 ||b(0)|| / f0``.
    """
    if b0_l2 < 0:
        raise ConfigurationError("b0_l2 must be nonnegative")
    if f0 is None:
        return 2.0 * lam ** (1.0 / 3.0) * b0_l2
    if not f0 > 0:
        raise ConfigurationError("f0 must be positive")
    return 2.0 * b0_l2 / f0


def energy_balance_defects(traj: Trajectory, forcing=None) -> np.ndarray:
    """Cumulative ``(E(t_i) - E(t_0)) - int_{t_0}^{t_i} sum_j f_j a_j dt`` per sample.

    The integral uses the trapezoidal rule over the recorded samples.
    """
    f = traj.params.forcing if forcing is None else np.asarray(forcing, dtype=float)
    if f.size < traj.params.size:
        f = np.concatenate([f, np.zeros(traj.params.size - f.size)])
    power = traj.states @ f[: traj.params.size]
    work = np.concatenate([[0.0], np.cumsum(0.5 * (power[1:] + power[:-1]) * np.diff(traj.t))])
    e = 0.5 * np.einsum("ij,ij->i", traj.states, traj.states)
    return (e - e[0]) - work


def energy_balance_audit(traj: Trajectory, forcing=None) -> float:
    """Max absolute cumulative energy-balance defect over the run."""
    if len(traj) == 0:
        raise ConfigurationError("empty trajectory")
    return float(np.max(np.abs(energy_balance_defects(traj, forcing))))
