"""Proximal operator of the weighted sum-of-l1 penalty.

Per element the problem is

    min_v  step * sum_j w_j |v - z_j| + (v - x)^2 / 2

with the anchor z_0 = 0 always present. Between two consecutive sorted
anchors the penalty is linear, so the minimizer is either ``x`` shifted by
the signed weight sum of that interval or is clamped onto an anchor.
"""

from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np

from .core import anchor_matrix, as_ensemble, as_signal
from .errors import ArgumentError, DimensionError


def _merge_anchors(anchors):
    """Sort (z, w) pairs by z and merge equal z values, summing weights."""
    merged = []
    for z, w in sorted(anchors, key=lambda a: a[0]):
        if merged and merged[-1][0] == z:
            merged[-1][1] += w
        else:
            merged.append([z, w])
    return merged


def prox_element(x: float, anchors: Sequence[Tuple[float, float]], step: float) -> float:
    """Closed-form scalar prox.

    Parameters
    ----------
    x : float
        Point at which the prox is evaluated (already gradient-stepped).
    anchors : sequence of (z, w)
        Anchor values with strictly positive weights, including z_0 = 0.
    step : float
        Penalty scale, lambda / L in the solver.
    """
    if not step > 0:
        raise ArgumentError(f"step must be positive, got {step}")
    if len(anchors) == 0:
        raise ArgumentError("at least one anchor is required")
    for _, w in anchors:
        if not w > 0:
            raise ArgumentError(f"anchor weights must be positive, got {w}")

    merged = _merge_anchors(anchors)
    zs = [z for z, _ in merged]
    ws = [w for _, w in merged]
    total = sum(ws)
    k = len(zs)
    # shifts[l + 1] is the derivative of the penalty part on the open interval
    # (z_l, z_{l+1}), l = -1..k-1: anchors below count +w, anchors above -w.
    shifts = []
    below = 0.0
    for l in range(-1, k):
        if l >= 0:
            below += ws[l]
        shifts.append(step * (2.0 * below - total))

    fired = []
    for l in range(-1, k):
        s = shifts[l + 1]
        lo = zs[l] + s if l >= 0 else -np.inf
        hi = zs[l + 1] + s if l + 1 < k else np.inf
        if lo < x < hi:
            fired.append(x - s)
    for l in range(k):
        if zs[l] + shifts[l] <= x <= zs[l] + shifts[l + 1]:
            fired.append(zs[l])
    assert len(fired) == 1, f"prox cases overlap or leave a gap at x={x!r}: {fired}"
    return float(fired[0])


class AnchorSet:
    """Anchors z_0..z_J of one ensemble, sorted once per index.

    Sorting depends only on the anchor values, so a solver that changes the
    weights every iteration can reuse it.
    """

    def __init__(self, ensemble, n: int):
        self.Z = anchor_matrix(as_ensemble(ensemble, n))
        self.order = np.argsort(self.Z, axis=0, kind="stable")
        k = self.Z.shape[0]
        self._buf = np.empty((n, 2 * k + 1))
        self._buf[:, :k] = self.Z.T

    @property
    def shape(self):
        return self.Z.shape

    def prox(self, x: np.ndarray, weights: np.ndarray, step: float) -> np.ndarray:
        k, n = self.Z.shape
        if k == 1:
            # single anchor at zero: plain soft-thresholding
            t = step * weights[0]
            return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)
        Ws = np.take_along_axis(weights, self.order, axis=0)
        total = Ws.sum(axis=0)
        below = np.cumsum(Ws, axis=0)
        buf = self._buf
        buf[:, k] = x + step * total
        buf[:, k + 1:] = (x - step * (2.0 * below - total)).T
        vals = np.sort(buf, axis=1)
        return vals[:, k]


def prox_vector(x, ensemble, weights, step: float) -> np.ndarray:
    """Apply the scalar prox independently at every index.

    ``weights`` has shape ``(J+1, n)``; row 0 belongs to the implicit z_0 = 0.

    Vectorized through the median identity: the minimizer is the median of
    the J+1 anchors together with the J+2 interior candidates ``x - shift_l``.
    """
    x = as_signal(x, name="x")
    anchors = AnchorSet(ensemble, x.size)
    W = np.asarray(weights, dtype=np.float64)
    if W.shape != anchors.shape:
        raise DimensionError(f"weights have shape {W.shape}, expected {anchors.shape}")
    if not step > 0:
        raise ArgumentError(f"step must be positive, got {step}")
    return anchors.prox(x, W, step)
