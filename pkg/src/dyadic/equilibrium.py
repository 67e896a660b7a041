"""Fixed points of the forced system and the normalized uniqueness recursion."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError, ModelParams, rhs

__all__ = [
    "InfeasibleFixedPoint",
    "ForcingSpec",
    "FixedPoint",
    "fixed_point_single",
    "fixed_point_general",
    "residual",
    "uniqueness_orbit",
    "uniqueness_orbit_closed_form",
]


class InfeasibleFixedPoint(RuntimeError):
    """The tail-constant bracket never produced a consistent fixed point."""


@dataclass(frozen=True)
class ForcingSpec:
    """Finitely supported force ``(f_0, ..., f_k, 0, 0, ...)``."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in np.atleast_1d(self.values))
        if any(not math.isfinite(v) or v < 0 for v in vals):
            raise ConfigurationError("forcing values must be finite and >= 0")
        # trailing zeros are not part of the support
        while len(vals) > 1 and vals[-1] == 0.0:
            vals = vals[:-1]
        object.__setattr__(self, "values", vals)

    @property
    def support_end(self) -> int:
        return len(self.values) - 1

    @property
    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.values)

    @classmethod
    def from_mapping(cls, mapping) -> "ForcingSpec":
        """Build from a sparse ``{shell: value}`` map."""
        items = {int(k): float(v) for k, v in mapping.items()}
        if any(k < 0 for k in items):
            raise ConfigurationError("forcing shell indices must be >= 0")
        size = max(items, default=0) + 1
        vals = np.zeros(size)
        for k, v in items.items():
            vals[k] = v
        return cls(tuple(vals))


@dataclass(frozen=True)
class FixedPoint:
    """A fixed point restricted to shells ``0..N``.

    ``state[j] == lam**(-j/3) * tail_constant`` for ``j >= tail_start``.
    """

    state: np.ndarray
    tail_constant: float
    tail_start: int


def fixed_point_single(f0: float, params: ModelParams) -> FixedPoint:
    """Unique fixed point for the force ``(f0, 0, 0, ...)``."""
    if not f0 > 0:
        raise ConfigurationError(f"f0 must be positive, got {f0!r}")
    lam = params.lam
    c = lam ** (1.0 / 6.0) * math.sqrt(f0)
    j = np.arange(params.size, dtype=float)
    return FixedPoint(c * lam ** (-j / 3.0), c, 0)


def _downward(C: float, f: np.ndarray, lam: float, k: int, n: int):
    """Shells ``0..max(n, k+1)`` from tail constant ``C``, plus ``a_0**2``.

    ``a_0**2`` is returned before its square root is taken, so it may be
    negative; ``None`` is returned when a higher shell's square is negative,
    i.e. ``C`` is too small.
    """
    m = max(n, k + 1)
    a = np.empty(m + 1)
    jj = np.arange(k, m + 1, dtype=float)
    a[k:] = C * lam ** (-jj / 3.0)
    sq = 0.0
    for j in range(k, 0, -1):
        sq = lam * a[j] * a[j + 1] - lam ** (1 - j) * f[j]
        if sq < 0 and j > 1:
            return None
        a[j - 1] = math.sqrt(max(sq, 0.0))
    return a, sq


def fixed_point_general(force: ForcingSpec, params: ModelParams, *,
                        xtol: float = 1e-15, max_expand: int = 200) -> FixedPoint:
    """Fixed point for a finitely supported force.

    The geometric tail ``a_j = lam**(-j/3) C`` (``j >= k``) is propagated
    downwards through ``a_{j-1}**2 = lam a_j a_{j+1} - lam**(1-j) f_j`` and
    ``C`` is fixed by bisection on the remaining condition ``a_0 a_1 = f_0``,
    written as ``a_0**2 a_1**2 = f_0**2`` so that it stays smooth when the
    root has ``a_0 = 0``. Every ``a_j`` increases with ``C`` on the feasible
    set, so the condition is monotone and a negative square signals ``C``
    below the root.
    """
    if force.is_zero:
        return FixedPoint(np.zeros(params.size), 0.0, 0)
    lam = params.lam
    f = np.asarray(force.values, dtype=float)
    k = force.support_end
    n = params.n_shells
    if k == 0:
        return fixed_point_single(f[0], params)

    def consistency(C):
        out = _downward(C, f, lam, k, n)
        if out is None:
            return -math.inf, None
        a, sq0 = out
        return sq0 * a[1] ** 2 - f[0] ** 2, a

    # a_j is bounded by the single-mode profile for the total force at shell
    # 0 scaled up to shell k; start there and widen until a sign change.
    hi = lam ** (k / 3.0) * lam ** (1.0 / 6.0) * math.sqrt(max(1.0, f.sum()) * lam ** k)
    lo = 0.0
    for _ in range(max_expand):
        g_hi, _ = consistency(hi)
        if g_hi > 0:
            break
        lo = hi
        hi *= 2.0
    else:
        raise InfeasibleFixedPoint(f"no sign change of a_0 a_1 - f_0 for C up to {hi:g}")

    while hi - lo > xtol * hi:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        g, _ = consistency(mid)
        if g > 0:
            hi = mid
        else:
            lo = mid
    # the upper end is always feasible
    g, a = consistency(hi)
    if a is None:
        raise InfeasibleFixedPoint("bisection ended outside the feasible set")
    # sqrt(a_0**2) amplifies the bisection error when a_0 is near zero;
    # the consistency condition itself gives a_0 to full precision
    a[0] = f[0] / a[1]
    return FixedPoint(a[: n + 1].copy(), hi, k)


def residual(params: ModelParams, state, *, relative: bool = False) -> float:
    """Max-norm of ``rhs`` over the interior shells ``0..N-1``.

    The boundary shell ``N`` is excluded: a fixed point of the infinite
    system is generally not stationary there under the truncation closure.

    With ``relative=True`` each shell's defect is divided by
    ``max(1, |gain| + |loss| + f_j)``. The individual terms at shell ``j``
    grow like ``lam**(j/3)``, so at large ``N`` the absolute defect of a
    rounded double-precision state is bounded below by roughly
    ``lam**(N/3) * 1e-16``; the scaled form measures cancellation instead.
    """
    a = np.asarray(state, dtype=float)
    d = rhs(params, a)[:-1]
    if not relative:
        return float(np.max(np.abs(d))) if d.size else 0.0
    lp = params.powers()
    loss = np.abs(lp[:-1] * a[:-1] * a[1:])
    gain = np.zeros_like(loss)
    gain[1:] = lp[:-2] * a[:-2] ** 2
    scale = np.maximum(1.0, gain + loss + params.forcing[:-1])
    return float(np.max(np.abs(d) / scale))


def uniqueness_orbit(A0: float, steps: int) -> np.ndarray:
    """``log A_j`` for ``j = 0..steps`` of the normalized fixed-point recursion.

    ``A_1 = 1/A_0``, ``A_2 = A_0**3`` and ``A_{j+1} = A_0 / A_j**2`` for
    ``j >= 2``, iterated in log space because ``A_j`` overflows within a
    dozen steps for ``A_0`` away from 1.
    """
    if not A0 > 0:
        raise ConfigurationError(f"A0 must be positive, got {A0!r}")
    if steps < 3:
        raise ConfigurationError("steps must be >= 3")
    L0 = math.log(A0)
    out = np.empty(steps + 1)
    out[0] = L0
    out[1] = -L0
    out[2] = 3.0 * L0
    for j in range(2, steps):
        out[j + 1] = L0 - 2.0 * out[j]
    return out


def uniqueness_orbit_closed_form(A0: float, j: int) -> float:
    """Closed-form ``log A_j`` (``j >= 3``) from the doubling exponents."""
    if j < 3:
        raise ConfigurationError("closed form holds for j >= 3")
    p = 2 ** (j - 2)
    if j % 2:
        expo = -3 * p + (1 + p) / 3
    else:
        expo = 3 * p + (1 - p) / 3
    return expo * math.log(A0)
