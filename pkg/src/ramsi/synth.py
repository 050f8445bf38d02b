"""Synthetic sources and side information with controlled supports.

A scenario fixes the source sparsity ``s0`` and, per side information signal
j, the support size ``s_j`` of ``x - z_j`` and the number ``r_j`` of those
nonzeros that fall on the support of ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from .errors import ArgumentError

# Scale of the difference entries x_i - z_ji. With this value the mean
# relative error ||z_j - x|| / ||x|| is sqrt(2 s_j / (pi s0)), i.e. 0.56 for
# s_j = 64 and 1.13 for s_j = 256 at s0 = 128.
DEFAULT_DIFF_SCALE = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class ScenarioSpec:
    n: int
    s0: int
    sj: Tuple[int, ...] = ()
    rj: Tuple[int, ...] = ()
    seed: int = 0
    diff_scale: float = DEFAULT_DIFF_SCALE

    def __post_init__(self):
        object.__setattr__(self, "sj", tuple(int(v) for v in self.sj))
        object.__setattr__(self, "rj", tuple(int(v) for v in self.rj))
        if self.n < 1 or not 0 < self.s0 <= self.n:
            raise ArgumentError(f"need 0 < s0 <= n, got n={self.n}, s0={self.s0}")
        if len(self.sj) != len(self.rj):
            raise ArgumentError("sj and rj must have the same length")
        for j, (s, r) in enumerate(zip(self.sj, self.rj), start=1):
            if not 0 <= r <= min(self.s0, s):
                raise ArgumentError(f"z_{j}: need 0 <= r_j <= min(s0, s_j), got r={r}, s={s}")
            if s - r > self.n - self.s0:
                raise ArgumentError(f"z_{j}: s_j - r_j = {s - r} exceeds the n - s0 zero positions")
        if not self.diff_scale > 0:
            raise ArgumentError("diff_scale must be positive")

    @property
    def J(self) -> int:
        return len(self.sj)

    @classmethod
    def uniform(cls, n, s0, sj, rj, J, seed=0, **kw):
        """All J side information signals share the same (s_j, r_j)."""
        return cls(n=n, s0=s0, sj=(sj,) * J, rj=(rj,) * J, seed=seed, **kw)


def _rng(seed, stream):
    return np.random.default_rng(np.random.SeedSequence([int(seed), stream]))


def _nonzero_normal(rng, size, scale=1.0):
    g = rng.standard_normal(size)
    while np.any(g == 0.0):
        bad = g == 0.0
        g[bad] = rng.standard_normal(int(bad.sum()))
    return scale * g


def generate_source(spec: ScenarioSpec) -> np.ndarray:
    """Random support of size s0 with i.i.d. standard normal values."""
    rng = _rng(spec.seed, 0)
    x = np.zeros(spec.n)
    support = rng.choice(spec.n, size=spec.s0, replace=False)
    x[support] = _nonzero_normal(rng, spec.s0)
    return x


def generate_side_info(x, spec: ScenarioSpec, j: int) -> np.ndarray:
    """Side information z_j (1-based ``j``) for the source ``x``."""
    if not 1 <= j <= spec.J:
        raise ArgumentError(f"j must be in 1..{spec.J}, got {j}")
    s, r = spec.sj[j - 1], spec.rj[j - 1]
    x = np.asarray(x, dtype=np.float64)
    on = np.flatnonzero(x)
    off = np.flatnonzero(x == 0)
    if on.size != spec.s0:
        raise ArgumentError(f"source has {on.size} nonzeros, scenario says s0={spec.s0}")
    rng = _rng(spec.seed, j)
    z = x.copy()
    hit_on = rng.choice(on, size=r, replace=False)
    hit_off = rng.choice(off, size=s - r, replace=False)
    z[hit_on] = x[hit_on] - _nonzero_normal(rng, r, spec.diff_scale)
    z[hit_off] = -_nonzero_normal(rng, s - r, spec.diff_scale)

    diff = x - z
    assert np.count_nonzero(diff) == s
    assert np.count_nonzero(diff[on]) == r
    return z


def generate_scenario(spec: ScenarioSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Source and the ``(J, n)`` side information ensemble."""
    x = generate_source(spec)
    ens = np.array([generate_side_info(x, spec, j) for j in range(1, spec.J + 1)])
    return x, ens.reshape(spec.J, spec.n)
