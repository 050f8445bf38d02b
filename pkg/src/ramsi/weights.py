"""Per-element weights across the source prior and the side information.

Weights live in a ``(J+1, n)`` array; row 0 belongs to z_0 = 0 and every
column sums to one.
"""

from __future__ import annotations

import numpy as np

from .core import anchor_matrix, as_ensemble, as_signal
from .errors import ArgumentError

# stand-in for a zero weight; the prox needs strictly positive weights
ZERO_WEIGHT = 1e-12


def update_weights(x, ensemble, epsilon: float = 1e-5) -> np.ndarray:
    """Adaptive weights ``w_ji = eta_i / (|x_i - z_ji| + epsilon)``.

    ``eta_i`` is the reciprocal of ``sum_j 1 / (|x_i - z_ji| + epsilon)``,
    which makes each column sum to one and makes ``w_ji * (|x_i - z_ji| +
    epsilon)`` the same for every j.
    """
    if not epsilon > 0:
        raise ArgumentError(f"epsilon must be positive, got {epsilon}")
    x = as_signal(x, name="x")
    Z = anchor_matrix(as_ensemble(ensemble, x.size))
    inv = 1.0 / (np.abs(x - Z) + epsilon)
    eta = 1.0 / inv.sum(axis=0)
    return eta * inv


def fixed_l1_weights(J: int, n: int) -> np.ndarray:
    """All mass on z_0 = 0: plain l1 up to the positivity slack."""
    W = np.full((J + 1, n), ZERO_WEIGHT)
    W[0] = 1.0 - J * ZERO_WEIGHT
    return W


def fixed_l1l1_weights(J: int, n: int) -> np.ndarray:
    """Equal halves on z_0 and z_1, slack on any further signals."""
    if J < 1:
        raise ArgumentError("l1-l1 weights need at least one side information signal")
    W = np.full((J + 1, n), ZERO_WEIGHT)
    W[0] = W[1] = 0.5 - (J - 1) * ZERO_WEIGHT / 2
    return W
