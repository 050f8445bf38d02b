"""Measurement bounds for l1, l1-l1 and weighted multi-signal recovery.

All bounds are closed-form expressions in the support structure of the
difference vectors ``x - z_j`` (j = 0..J, z_0 = 0) and, for the weighted
bound, in the adaptive weights evaluated at the true signal. Logarithms are
natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy.optimize import brentq

from .core import anchor_matrix, as_ensemble, as_signal
from .errors import ArgumentError, DecompositionError
from .weights import update_weights

_LOG_TERM = 7.0 / 5.0


@dataclass
class SupportDecomposition:
    """Per-index zero pattern of the J+1 difference vectors.

    ``p`` counts indices where no difference vanishes, ``n - q`` those where
    all of them vanish. The rest are partial indices with ``d[i]`` vanishing
    differences. ``l[i]`` is the interval index of ``x_i`` among the sorted
    anchors: ``x_i`` lies in ``(z_(l), z_(l+1)]``.
    """

    n: int
    J: int
    p: int
    q: int
    s: np.ndarray
    full_indices: np.ndarray
    partial_indices: np.ndarray
    d: Dict[int, int]
    l: Dict[int, int]
    zero_mask: np.ndarray = field(repr=False)
    sort_order: np.ndarray = field(repr=False)


@dataclass
class BoundReport:
    m_bound: float
    a_bar: float
    s_bar: float
    kappa: float
    delta: float
    p: int
    q: int
    min_c: float
    defined: bool = True
    kappa_defined: bool = True
    note: str = ""

    def as_dict(self):
        return {
            "m_bound": self.m_bound, "a_bar": self.a_bar, "s_bar": self.s_bar,
            "kappa": self.kappa, "delta": self.delta, "p": self.p, "q": self.q,
            "min_c": self.min_c, "defined": self.defined,
            "kappa_defined": self.kappa_defined, "note": self.note,
        }


def decompose(x, ensemble, zero_tol: float = 0.0) -> SupportDecomposition:
    """Classify every index by which differences ``x_i - z_ji`` vanish."""
    if zero_tol < 0:
        raise ArgumentError(f"zero_tol must be >= 0, got {zero_tol}")
    x = as_signal(x, name="x")
    n = x.size
    Z = anchor_matrix(as_ensemble(ensemble, n))
    J = Z.shape[0] - 1
    zero = np.abs(x - Z) <= zero_tol
    nzeros = zero.sum(axis=0)
    s = (~zero).sum(axis=1)

    full = np.flatnonzero(nzeros == 0)
    partial = np.flatnonzero((nzeros > 0) & (nzeros <= J))
    p = int(full.size)
    q = n - int(np.count_nonzero(nzeros == J + 1))

    # anchors strictly below x_i (outside the zero band) sit at sorted
    # positions 0..l_i
    below = ((x - Z) > zero_tol).sum(axis=0)
    l_idx = below - 1
    d = {int(i): int(nzeros[i]) for i in partial}
    l = {int(i): int(l_idx[i]) for i in range(n)}

    lhs = (J + 1) * (n - q) + sum(d.values())
    rhs = (J + 1) * n - int(s.sum())
    if lhs != rhs:
        raise DecompositionError(f"zero count identity violated: {lhs} != {rhs}")
    if not (0 <= p <= s.min() and s.max() <= q <= n):
        raise DecompositionError(f"p={p}, q={q} inconsistent with supports {s.tolist()}")

    return SupportDecomposition(
        n=n, J=J, p=p, q=q, s=s, full_indices=full, partial_indices=partial,
        d=d, l=l, zero_mask=zero, sort_order=np.argsort(Z, axis=0, kind="stable"),
    )


def _sign_pattern(dec: SupportDecomposition, Z: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """(-1)^[l_i < j] for anchors in sorted order, mapped back to rows j."""
    out = np.empty((Z.shape[0], idx.size))
    for col, i in enumerate(idx):
        order = dec.sort_order[:, i]
        rank = np.empty_like(order)
        rank[order] = np.arange(order.size)
        out[:, col] = np.where(rank <= dec.l[int(i)], 1.0, -1.0)
    return out


def _log_bound(a_bar, s_bar, n, extra=0.0):
    return 2.0 * a_bar * math.log(n / s_bar) + _LOG_TERM * s_bar + extra + 1.0


def _weighted_report(x, Z, W, dec: SupportDecomposition, exact_half=False) -> BoundReport:
    n = dec.n
    full = dec.full_indices
    signs = _sign_pattern(dec, Z, full)
    a = (W[:, full] * signs).sum(axis=0)
    a_bar = float(np.sum(a * a))

    part = dec.partial_indices
    c = (W[:, part] * dec.zero_mask[:, part]).sum(axis=0)
    s_bar = dec.p + float(np.sum(1.0 - c))
    min_c = float(c.min()) if c.size else math.nan

    report = BoundReport(m_bound=math.nan, a_bar=a_bar, s_bar=s_bar, kappa=math.nan,
                         delta=0.0, p=dec.p, q=dec.q, min_c=min_c)
    if not 0 < s_bar < n:
        report.defined = False
        report.kappa_defined = False
        report.note = f"s_bar={s_bar} outside (0, n)"
        return report

    if part.size == 0:
        report.kappa_defined = False
        report.note = "no partial indices; delta = 0"
    elif exact_half:
        # equal halves: the partial-index terms are evaluated exactly and no
        # kappa correction arises
        report.kappa_defined = False
        report.note = "equal-weight reduction; delta = 0"
    elif min_c <= 0.5:
        report.defined = False
        report.kappa_defined = False
        report.note = f"min c_i = {min_c} <= 1/2, kappa invalid"
        return report
    else:
        kappa = 2.0 * min_c / (math.sqrt(math.pi * math.log(n / s_bar)) * (2.0 * min_c - 1.0))
        report.kappa = kappa
        report.delta = (kappa - 1.0) * (s_bar - dec.p)
    report.m_bound = _log_bound(a_bar, s_bar, n, report.delta)
    return report


def bound_nl1(x, ensemble, epsilon: float = 1e-5, zero_tol: float = 0.0, policy=None) -> BoundReport:
    """Weighted multi-signal bound at the true ``x``.

    With the default (adaptive) policy the weights are the adaptive weights
    evaluated at ``x``. ``policy`` may be a fixed weight policy, in which case
    the signals that carry zero weight are dropped and the remaining weights
    are the fixed ones: FIXED_L1 keeps only z_0, FIXED_L1L1 keeps z_0 and z_1
    with weight 1/2 each.
    """
    from .solver import WeightPolicy

    if not epsilon > 0:
        raise ArgumentError(f"epsilon must be positive, got {epsilon}")
    x = as_signal(x, name="x")
    ens = as_ensemble(ensemble, x.size)
    policy = policy or WeightPolicy.ADAPTIVE

    if policy is WeightPolicy.FIXED_L1:
        ens = ens[:0]
        W = np.ones((1, x.size))
    elif policy is WeightPolicy.FIXED_L1L1:
        if ens.shape[0] < 1:
            raise ArgumentError("l1-l1 reduction needs at least one side information signal")
        ens = ens[:1]
        W = np.full((2, x.size), 0.5)
    else:
        W = update_weights(x, ens, epsilon)
    dec = decompose(x, ens, zero_tol)
    return _weighted_report(x, anchor_matrix(ens), W, dec,
                            exact_half=policy is WeightPolicy.FIXED_L1L1)


def c_coefficients(x, ensemble, epsilon: float, dec: Optional[SupportDecomposition] = None) -> np.ndarray:
    """``c_i = d_i / sum_j eps / (|x_i - z_ji| + eps)`` over the partial indices."""
    x = as_signal(x, name="x")
    Z = anchor_matrix(as_ensemble(ensemble, x.size))
    dec = dec or decompose(x, Z[1:])
    part = dec.partial_indices
    ratio = epsilon / (np.abs(x[part] - Z[:, part]) + epsilon)
    d = np.array([dec.d[int(i)] for i in part], dtype=float)
    return d / ratio.sum(axis=0)


def bound_l1(n: int, s0: int) -> float:
    """``2 s0 log(n/s0) + 7/5 s0 + 1``."""
    if not 0 < s0 < n:
        raise ArgumentError(f"need 0 < s0 < n, got s0={s0}, n={n}")
    return _log_bound(s0, s0, n)


@dataclass
class L1L1Counts:
    s0: int
    s1: int
    xi: int
    h_bar: int

    @property
    def s_bar(self) -> float:
        return self.s0 + self.xi / 2.0


def l1l1_counts(x, z1, zero_tol: float = 0.0) -> L1L1Counts:
    x = as_signal(x, name="x")
    z1 = as_signal(z1, x.size, name="z1")
    x_zero = np.abs(x) <= zero_tol
    same = np.abs(x - z1) <= zero_tol
    xi = int(np.count_nonzero(~same & x_zero)) - int(np.count_nonzero(same & ~x_zero))
    h_bar = int(np.count_nonzero(((x > zero_tol) & (x - z1 > zero_tol))
                                 | ((x < -zero_tol) & (x - z1 < -zero_tol))))
    return L1L1Counts(s0=int(np.count_nonzero(~x_zero)), s1=int(np.count_nonzero(~same)),
                      xi=xi, h_bar=h_bar)


def bound_l1l1(x, z1, zero_tol: float = 0.0) -> float:
    """l1-l1 bound ``2 h log(n / (s0 + xi/2)) + 7/5 (s0 + xi/2) + 1``.

    Returns NaN when ``s0 + xi/2`` falls outside ``(0, n)``.
    """
    x = as_signal(x, name="x")
    cnt = l1l1_counts(x, z1, zero_tol)
    s_bar = cnt.s_bar
    if not 0 < s_bar < x.size:
        return math.nan
    return _log_bound(cnt.h_bar, s_bar, x.size)


def bound_simple(x, ensemble, epsilon: float = 1e-5, zero_tol: float = 0.0) -> float:
    """``2 a_bar log(n/p) + 7/5 p + 1``; NaN when p is 0 or n."""
    x = as_signal(x, name="x")
    rep = bound_nl1(x, ensemble, epsilon, zero_tol)
    if not 0 < rep.p < x.size:
        return math.nan
    return _log_bound(rep.a_bar, rep.p, x.size)


def bound_loose_nl1(n: int, p: int) -> float:
    if not 0 < p < n:
        raise ArgumentError(f"need 0 < p < n, got p={p}, n={n}")
    return _log_bound(p, p, n)


def bound_loose_l1l1(n: int, s0: int, s1: int) -> float:
    rho = min(s0, s1)
    s_bar = (s0 + s1) / 2.0
    if s0 <= 0 or s1 < 0 or not s_bar < n:
        raise ArgumentError(f"need s0 > 0, s1 >= 0 and (s0+s1)/2 < n, got s0={s0}, s1={s1}, n={n}")
    return _log_bound(rho, s_bar, n)


def feasibility_gamma() -> float:
    """Root of ``g - 2 log g - 7/5`` above its minimum at g = 2.

    ``p/n`` below ``1/gamma`` keeps the loose weighted bound under ``n``.
    """
    return brentq(lambda g: g - 2.0 * math.log(g) - _LOG_TERM, 2.0, 50.0, xtol=1e-15, rtol=1e-15)
