"""Model parameters, the right-hand side of the truncated dyadic system, and
the energy/norm/flux functionals built on top of it.

The truncated system on shells ``0..N`` reads::

    da_0/dt = -a_0 a_1 + f_0
    da_j/dt = lam**(j-1) a_{j-1}**2 - lam**j a_j a_{j+1} + f_j,   1 <= j <= N

with a closure for the missing ``a_{N+1}``. The default ``"zero"`` closure
keeps the telescoping energy identity exact; the ``"geometric"`` closure
``a_{N+1} = lam**(-1/3) a_N`` continues the fixed-point tail, so the
truncated fixed point is exactly stationary and the boundary shell leaks
energy at the rate ``lam**(N - 1/3) a_N**3``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DEFAULT_LAMBDA",
    "CLOSURES",
    "ConfigurationError",
    "ModelParams",
    "rhs",
    "jacobian",
    "closure_value",
    "energy",
    "sobolev_norm",
    "box_energy",
    "energy_flux",
    "distance",
]

DEFAULT_LAMBDA = 2.0 ** 2.5
CLOSURES = ("zero", "geometric")


class ConfigurationError(ValueError):
    """Raised for invalid parameters or mismatched state shapes."""


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Immutable run configuration.

    Parameters
    ----------
    n_shells : int
        Truncation index ``N``; the state has ``N + 1`` entries.
    forcing : array_like, optional
        Nonnegative forcing ``(f_0, ..., f_k)``. Shorter vectors are padded
        with zeros up to ``N + 1``; entries beyond ``N`` must be zero.
    lam : float
        Intershell scaling base, ``> 1``.
    closure : {"zero", "geometric"}
        How ``a_{N+1}`` is supplied.
    """

    n_shells: int
    forcing: np.ndarray = field(default_factory=lambda: np.zeros(1))
    lam: float = DEFAULT_LAMBDA
    closure: str = "zero"

    def __post_init__(self):
        n = int(self.n_shells)
        if n != self.n_shells or n < 1:
            raise ConfigurationError(f"n_shells must be an integer >= 1, got {self.n_shells!r}")
        lam = float(self.lam)
        if not np.isfinite(lam) or lam <= 1.0:
            raise ConfigurationError(f"lambda must be > 1, got {self.lam!r}")
        if self.closure not in CLOSURES:
            raise ConfigurationError(f"closure must be one of {CLOSURES}, got {self.closure!r}")
        f = np.atleast_1d(np.asarray(self.forcing, dtype=float))
        if f.ndim != 1:
            raise ConfigurationError("forcing must be a vector")
        if not np.all(np.isfinite(f)) or np.any(f < 0):
            raise ConfigurationError("forcing entries must be finite and >= 0")
        if f.size > n + 1:
            if np.any(f[n + 1:] != 0):
                raise ConfigurationError(
                    f"forcing has nonzero entries beyond shell n_shells={n}")
            f = f[: n + 1]
        full = np.zeros(n + 1)
        full[: f.size] = f
        full.setflags(write=False)
        object.__setattr__(self, "n_shells", n)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "forcing", full)

    def __eq__(self, other):
        if not isinstance(other, ModelParams):
            return NotImplemented
        return (self.n_shells == other.n_shells and self.lam == other.lam
                and self.closure == other.closure
                and np.array_equal(self.forcing, other.forcing))

    def __hash__(self):
        return hash((self.n_shells, self.lam, self.closure, self.forcing.tobytes()))

    @property
    def size(self) -> int:
        return self.n_shells + 1

    @property
    def f0(self) -> float:
        return float(self.forcing[0])

    def powers(self) -> np.ndarray:
        """``lam**j`` for ``j = 0..N``."""
        return self.lam ** np.arange(self.size, dtype=float)

    def with_shells(self, n_shells: int) -> "ModelParams":
        """Same model on a different truncation (forcing cut or padded)."""
        f = self.forcing
        k = np.flatnonzero(f)
        if k.size and k[-1] > n_shells:
            raise ConfigurationError(
                f"forcing support ends at shell {k[-1]} > n_shells={n_shells}")
        return ModelParams(n_shells, f[: n_shells + 1], self.lam, self.closure)


def _as_state(params: ModelParams, a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (params.size,):
        raise ConfigurationError(
            f"state has shape {a.shape}, expected ({params.size},) for n_shells={params.n_shells}")
    return a


def closure_value(params: ModelParams, a: np.ndarray) -> float:
    """The value used for ``a_{N+1}``."""
    if params.closure == "geometric":
        return params.lam ** (-1.0 / 3.0) * a[-1]
    return 0.0


def rhs(params: ModelParams, a) -> np.ndarray:
    """Time derivative of the truncated system at state ``a``."""
    a = _as_state(params, a)
    lp = params.powers()
    nxt = np.empty_like(a)
    nxt[:-1] = a[1:]
    nxt[-1] = closure_value(params, a)
    loss = lp * a * nxt
    da = params.forcing - loss
    da[1:] += lp[:-1] * a[:-1] ** 2
    return da


def jacobian(params: ModelParams, a) -> np.ndarray:
    """Dense Jacobian of :func:`rhs` (tridiagonal)."""
    a = _as_state(params, a)
    n = a.size
    lp = params.powers()
    nxt = np.empty_like(a)
    nxt[:-1] = a[1:]
    nxt[-1] = closure_value(params, a)
    jac = np.zeros((n, n))
    idx = np.arange(n)
    jac[idx, idx] = -lp * nxt
    jac[idx[:-1], idx[1:]] = -lp[:-1] * a[:-1]
    jac[idx[1:], idx[:-1]] = 2.0 * lp[:-1] * a[:-1]
    if params.closure == "geometric":
        jac[-1, -1] -= lp[-1] * a[-1] * params.lam ** (-1.0 / 3.0)
    return jac


def energy(a) -> float:
    """Total energy ``0.5 * sum(a_j**2)``."""
    a = np.asarray(a, dtype=float)
    return 0.5 * float(np.dot(a, a))


def sobolev_norm(a, s: float) -> float:
    """``(sum_j 2**(2 s j) a_j**2) ** 0.5``.

    The weight base is 2 (shells are octaves in ``|k|``) regardless of the
    model's ``lam``.
    """
    a = np.asarray(a, dtype=float)
    w = 2.0 ** (s * np.arange(a.size))
    return float(np.linalg.norm(w * a))


def box_energy(a, J: int) -> float:
    """Energy in shells ``j >= J``."""
    a = np.asarray(a, dtype=float)
    if not 0 <= J < a.size:
        raise ConfigurationError(f"box index J={J} outside 0..{a.size - 1}")
    tail = a[J:]
    return 0.5 * float(np.dot(tail, tail))


def energy_flux(params: ModelParams, a, J: int) -> float:
    """Rate of energy transfer into shells ``j >= J``: ``lam**(J-1) a_{J-1}**2 a_J``."""
    a = _as_state(params, a)
    if not 1 <= J <= params.n_shells:
        raise ConfigurationError(f"flux index J={J} outside 1..{params.n_shells}")
    return params.lam ** (J - 1) * a[J - 1] ** 2 * a[J]


def distance(a, reference) -> float:
    """l2 distance between two states of equal length."""
    a = np.asarray(a, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if a.shape != reference.shape:
        raise ConfigurationError(f"length mismatch: {a.shape} vs {reference.shape}")
    return float(np.linalg.norm(a - reference))
