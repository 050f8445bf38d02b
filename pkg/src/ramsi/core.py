"""Signals, Gaussian sensing matrices and solver settings.

Signals are plain 1-D float64 arrays. A side-information ensemble is a
``(J, n)`` array holding z_1..z_J; the all-zeros z_0 is never stored and is
prepended by :func:`anchor_matrix` wherever a consumer needs all J+1 rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ArgumentError, ConvergenceError, DimensionError

DEFAULT_LAMBDA = 1e-5
DEFAULT_EPSILON = 1e-5

LIPSCHITZ_SAFETY = 1.01


def as_signal(values, n: Optional[int] = None, name: str = "signal") -> np.ndarray:
    """Validate and return ``values`` as a finite 1-D float64 array."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"{name} must be a non-empty 1-D vector, got shape {arr.shape}")
    if n is not None and arr.size != n:
        raise DimensionError(f"{name} has length {arr.size}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise ArgumentError(f"{name} contains non-finite entries")
    return arr


def as_ensemble(signals, n: int) -> np.ndarray:
    """Return side information as a ``(J, n)`` array; ``J = 0`` is allowed."""
    if signals is None:
        return np.zeros((0, n))
    arr = np.asarray(signals, dtype=np.float64)
    if arr.size == 0:
        return np.zeros((0, n))
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != n:
        raise DimensionError(f"side information must have shape (J, {n}), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ArgumentError("side information contains non-finite entries")
    return arr


def anchor_matrix(ensemble: np.ndarray) -> np.ndarray:
    """Stack the implicit z_0 = 0 on top of the ensemble: shape ``(J+1, n)``."""
    n = ensemble.shape[1]
    return np.vstack([np.zeros((1, n)), ensemble])


@dataclass(frozen=True, eq=False)
class SensingMatrix:
    """Dense ``m x n`` Gaussian sensing matrix with the seed that produced it."""

    entries: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2 or 0 in entries.shape:
            raise DimensionError(f"sensing matrix must be 2-D and non-empty, got {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ArgumentError("sensing matrix contains non-finite entries")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class SolverConfig:
    lam: float = DEFAULT_LAMBDA
    epsilon: float = DEFAULT_EPSILON
    max_iters: int = 50000
    rel_tol: float = 1e-7
    patience: int = 10
    lipschitz_override: Optional[float] = None

    def __post_init__(self):
        if not self.lam > 0:
            raise ArgumentError(f"lambda must be positive, got {self.lam}")
        if not self.epsilon > 0:
            raise ArgumentError(f"epsilon must be positive, got {self.epsilon}")
        if not self.rel_tol > 0:
            raise ArgumentError(f"rel_tol must be positive, got {self.rel_tol}")
        if int(self.max_iters) < 1:
            raise ArgumentError(f"max_iters must be >= 1, got {self.max_iters}")
        if int(self.patience) < 1:
            raise ArgumentError(f"patience must be >= 1, got {self.patience}")
        if self.lipschitz_override is not None and not self.lipschitz_override > 0:
            raise ArgumentError("lipschitz_override must be positive")


def generate_sensing_matrix(seed: int, m: int, n: int) -> SensingMatrix:
    """Draw an ``m x n`` matrix with i.i.d. N(0, 1/m) entries.

    Entries are produced row-major from a single stream, so for a fixed seed
    the matrix for a smaller ``m`` is (up to the 1/sqrt(m) scale) a row prefix
    of the matrix for a larger ``m``.
    """
    if int(m) < 1 or int(n) < 1:
        raise DimensionError(f"need m >= 1 and n >= 1, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((int(m), int(n)))
    return SensingMatrix(g / np.sqrt(m), seed=seed)


def apply(A: SensingMatrix, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.n,):
        raise DimensionError(f"signal has shape {x.shape}, matrix expects ({A.n},)")
    return A.entries @ x


def apply_adjoint(A: SensingMatrix, r) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (A.m,):
        raise DimensionError(f"residual has shape {r.shape}, matrix expects ({A.m},)")
    return A.entries.T @ r


def lipschitz_constant(A: SensingMatrix, tol: float = 1e-6, max_iters: int = 10000) -> float:
    """Upper estimate of ``lambda_max(A^T A)`` by power iteration.

    The converged Rayleigh quotient is inflated by ``LIPSCHITZ_SAFETY`` so
    that it dominates the true largest eigenvalue.
    """
    if not tol > 0:
        raise ArgumentError(f"tol must be positive, got {tol}")
    M = A.entries
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(A.n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iters):
        w = M.T @ (M @ v)
        new = float(v @ w)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            # v landed in the null space; A is zero or v is unlucky
            if not np.any(M):
                return 0.0
            v = rng.standard_normal(A.n)
            v /= np.linalg.norm(v)
            continue
        v = w / nrm
        if est > 0 and abs(new - est) <= tol * new:
            return LIPSCHITZ_SAFETY * new
        est = new
    raise ConvergenceError(
        f"power iteration did not reach rel. tol {tol} in {max_iters} iterations",
        last_estimate=LIPSCHITZ_SAFETY * est,
    )
