"""Linearization about the fixed point and its real spectrum.

Everything here lives in the normalized frame ``f_0 = lam**(-1/3)``, where
the fixed point is ``a_j = lam**(-j/3)``. For a general ``f_0`` the state
scales by ``g = sqrt(f_0 * lam**(1/3))`` and time by ``1/g``, so eigenvalues
scale by ``g`` (see :func:`scale_eigenvalue`).

An eigenvector ``b_j = c_j exp(mu t)`` satisfies the three-term recurrence
``lam**(-1/6) c_{j+1} + alpha_j c_j - 2 lam**(-5/6) c_{j-1} = 0``. With
``d_j = lam**(-1/6) c_{j+1} / c_j`` this becomes the backward recurrence
``d_{j-1} = (2/lam) / (alpha_j + d_j)``, a continued fraction whose tail
converges to ``lam**(-1/2)``. The characteristic function is
``X(mu) = alpha_0(mu) + d_0(mu)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_LAMBDA, ConfigurationError

__all__ = [
    "ContinuedFractionPole",
    "ConvergenceFailure",
    "NotAnEigenvalue",
    "CfConfig",
    "EigenResult",
    "alpha",
    "cf_chain",
    "cf_tail",
    "characteristic_X",
    "functional_identity_residual",
    "find_eigenvalues",
    "eigenvector",
    "linearized_rhs",
    "scale_eigenvalue",
]


class ContinuedFractionPole(ArithmeticError):
    """A pivot ``alpha_j + d_j`` vanished (or overflowed) at shell ``j``."""

    def __init__(self, j, mu):
        super().__init__(f"continued fraction pole at j={j}, mu={mu!r}")
        self.j = j
        self.mu = mu


class ConvergenceFailure(ArithmeticError):
    """Depth doubling did not reach the requested tolerance."""


class NotAnEigenvalue(ValueError):
    """``|X(mu)|`` exceeds the tolerance."""


@dataclass(frozen=True)
class CfConfig:
    """Backward-recurrence settings.

    ``depth`` is the starting index of the recurrence; ``tail_seed`` is the
    value assigned there (``None`` means the exact limit ``lam**(-1/2)``).
    The depth is doubled until successive results differ by less than
    ``tolerance`` or ``max_depth`` is exceeded.
    """

    depth: int = 100
    tail_seed: float | None = None
    tolerance: float = 1e-13
    max_depth: int = 100_000

    def __post_init__(self):
        if self.depth < 10:
            raise ConfigurationError(f"depth must be >= 10, got {self.depth}")
        if not self.tolerance > 0:
            raise ConfigurationError("tolerance must be positive")
        if self.max_depth < self.depth:
            raise ConfigurationError("max_depth must be >= depth")

    def seed(self, lam: float) -> float:
        return lam ** -0.5 if self.tail_seed is None else float(self.tail_seed)


@dataclass(frozen=True)
class EigenResult:
    """A real eigenvalue with its eigenvector ``c`` (``c[0] == 1``).

    ``residual`` is the max over shells ``0..N-1`` of the eigen-equation
    defect, each row divided by the magnitude of its largest term.
    """

    mu: float
    c: np.ndarray
    residual: float
    cf_depth_used: int
    characteristic: float


def alpha(j, mu: float, lam: float = DEFAULT_LAMBDA):
    """``lam**(-1/6) (lam**(-1/3) + lam**(-2j/3) mu)``."""
    j = np.asarray(j, dtype=float)
    return lam ** (-1.0 / 6.0) * (lam ** (-1.0 / 3.0) + lam ** (-2.0 * j / 3.0) * mu)


def _backward(mu: float, n: int, depth: int, seed: float, lam: float) -> np.ndarray:
    """``d_0..d_n`` from the recurrence started at ``d_depth = seed``."""
    top = max(depth, n + 1)
    al = alpha(np.arange(top + 1), mu, lam)
    two_over = 2.0 / lam
    d = np.empty(top + 1)
    d[top] = seed
    for j in range(top, 0, -1):
        piv = al[j] + d[j]
        if piv == 0.0 or not math.isfinite(piv):
            raise ContinuedFractionPole(j, mu)
        d[j - 1] = two_over / piv
    return d[: n + 1]


def cf_chain(mu: float, n: int, cfg: CfConfig = CfConfig(),
             lam: float = DEFAULT_LAMBDA) -> tuple[np.ndarray, int]:
    """Converged ``d_0..d_n`` and the depth that produced them."""
    if n < 0:
        raise ConfigurationError("n must be >= 0")
    seed = cfg.seed(lam)
    depth = max(cfg.depth, n + 10)
    prev = _backward(mu, n, depth, seed, lam)
    while True:
        depth2 = 2 * depth
        if depth2 > cfg.max_depth:
            raise ConvergenceFailure(
                f"continued fraction at mu={mu!r} not converged by depth {cfg.max_depth}")
        cur = _backward(mu, n, depth2, seed, lam)
        if np.max(np.abs(cur - prev)) < cfg.tolerance:
            return cur, depth2
        prev, depth = cur, depth2


def cf_tail(mu: float, n: int, cfg: CfConfig = CfConfig(),
            lam: float = DEFAULT_LAMBDA) -> float:
    """``d_n``, the continued fraction ``[alpha_{n+1}, alpha_{n+2}, ...]``."""
    d, _ = cf_chain(mu, n, cfg, lam)
    return float(d[n])


def characteristic_X(mu: float, cfg: CfConfig = CfConfig(),
                     lam: float = DEFAULT_LAMBDA) -> float:
    """``X(mu) = alpha_0(mu) + d_0(mu)``; its real zeros are the eigenvalues."""
    return float(alpha(0, mu, lam)) + cf_tail(mu, 0, cfg, lam)


def functional_identity_residual(mu: float, cfg: CfConfig = CfConfig(),
                                 lam: float = DEFAULT_LAMBDA) -> float:
    """``|X(mu) - alpha_0(mu) - (2/lam) / X(lam**(-2/3) mu)|``."""
    x = characteristic_X(mu, cfg, lam)
    xs = characteristic_X(lam ** (-2.0 / 3.0) * mu, cfg, lam)
    return abs(x - float(alpha(0, mu, lam)) - (2.0 / lam) / xs)


def _safe_X(mu, cfg, lam):
    try:
        return characteristic_X(mu, cfg, lam)
    except ContinuedFractionPole:
        return math.nan


def find_eigenvalues(interval=(-8.0, -0.05), grid_points: int = 400,
                     cfg: CfConfig = CfConfig(), lam: float = DEFAULT_LAMBDA, *,
                     xtol: float = 1e-14, pole_threshold: float = 1e3) -> list[float]:
    """Real zeros of ``X`` in ``interval``, sorted in decreasing order.

    Sign changes on a uniform grid are refined by bisection. A bracket is
    rejected as a pole when ``|X|`` along the bisection chain exceeds
    ``pole_threshold`` or the recurrence hits an exact zero pivot.
    """
    lo, hi = map(float, interval)
    if not lo < hi:
        raise ConfigurationError(f"empty interval {interval!r}")
    if grid_points < 2:
        raise ConfigurationError("grid_points must be >= 2")
    grid = np.linspace(lo, hi, grid_points)
    vals = np.array([_safe_X(m, cfg, lam) for m in grid])
    roots = []
    for i in range(grid_points - 1):
        a, b = grid[i], grid[i + 1]
        xa, xb = vals[i], vals[i + 1]
        if not (math.isfinite(xa) and math.isfinite(xb)):
            continue
        if xa == 0.0:
            roots.append(a)
            continue
        if xa * xb > 0:
            continue
        root = _bisect(a, b, xa, cfg, lam, xtol, pole_threshold)
        if root is not None:
            roots.append(root)
    if vals.size and vals[-1] == 0.0:
        roots.append(grid[-1])
    return sorted({float(r) for r in roots}, reverse=True)


def _bisect(a, b, xa, cfg, lam, xtol, pole_threshold):
    sa = math.copysign(1.0, xa)
    while b - a > xtol * max(1.0, abs(a)):
        m = 0.5 * (a + b)
        if m in (a, b):
            break
        xm = _safe_X(m, cfg, lam)
        if not math.isfinite(xm) or abs(xm) > pole_threshold:
            return None
        if xm == 0.0:
            return m
        if math.copysign(1.0, xm) == sa:
            a = m
        else:
            b = m
    m = 0.5 * (a + b)
    xm = _safe_X(m, cfg, lam)
    if not math.isfinite(xm) or abs(xm) > pole_threshold:
        return None
    return m


def linearized_rhs(b, lam: float = DEFAULT_LAMBDA) -> np.ndarray:
    """Linearization about ``a_j = lam**(-j/3)`` with ``b_{N+1} = 0``."""
    b = np.asarray(b, dtype=float)
    nxt = np.append(b[1:], 0.0)
    out = np.empty_like(b)
    out[0] = -lam ** (-1.0 / 3.0) * b[0] - nxt[0]
    if b.size > 1:
        j = np.arange(1, b.size, dtype=float)
        out[1:] = lam ** (2.0 * j / 3.0) * (
            2.0 * lam ** (-2.0 / 3.0) * b[:-1] - lam ** (-1.0 / 3.0) * b[1:] - nxt[1:])
    return out


def _eigen_defect(c: np.ndarray, mu: float, lam: float) -> float:
    lin = linearized_rhs(c, lam)[:-1]
    # magnitudes of the individual terms of each row, for scaling
    j = np.arange(c.size - 1, dtype=float)
    w = lam ** (2.0 * j / 3.0)
    prev = np.concatenate(([0.0], c[:-2]))
    scale = w * (2.0 * lam ** (-2.0 / 3.0) * np.abs(prev)
                 + lam ** (-1.0 / 3.0) * np.abs(c[:-1]) + np.abs(c[1:]))
    scale += abs(mu) * np.abs(c[:-1])
    return float(np.max(np.abs(lin - mu * c[:-1]) / scale))


def eigenvector(mu: float, n_shells: int, cfg: CfConfig = CfConfig(),
                lam: float = DEFAULT_LAMBDA, *, root_tol: float = 1e-10) -> EigenResult:
    """Eigenvector ``c_j = lam**(j/6) d_{j-1} ... d_0`` for a root ``mu`` of ``X``."""
    if n_shells < 1:
        raise ConfigurationError("n_shells must be >= 1")
    d, depth = cf_chain(mu, n_shells, cfg, lam)
    x = float(alpha(0, mu, lam)) + d[0]
    if abs(x) > root_tol:
        raise NotAnEigenvalue(f"|X({mu!r})| = {abs(x):.3g} exceeds {root_tol:g}")
    c = np.empty(n_shells + 1)
    c[0] = 1.0
    c[1:] = np.cumprod(lam ** (1.0 / 6.0) * d[:n_shells])
    return EigenResult(float(mu), c, _eigen_defect(c, mu, lam), depth, x)


def scale_eigenvalue(mu: float, f0: float, lam: float = DEFAULT_LAMBDA) -> float:
    """Map a normalized-frame eigenvalue to the forcing ``f0``."""
    if not f0 > 0:
        raise ConfigurationError("f0 must be positive")
    return mu * math.sqrt(f0 * lam ** (1.0 / 3.0))
