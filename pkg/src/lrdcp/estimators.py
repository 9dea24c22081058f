"""Wilcoxon, self-normalized Wilcoxon and CUSUM change-point estimators.

Every estimator returns the smallest index ``k`` (1-based, the last
observation of the pre-change segment) at which the absolute value of its
statistic trace is maximal.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .ranks import RankVector, as_series, compute_ranks

WILCOXON = "wilcoxon"
SN_WILCOXON = "sn_wilcoxon"
CUSUM = "cusum"
METHODS = (WILCOXON, SN_WILCOXON, CUSUM)

DEFAULT_WINDOW = (0.15, 0.85)

_EPS = np.finfo(float).eps


def floor_frac(n: int, frac: float) -> int:
    """``floor(n * frac)`` robust to representation error (0.29 * 100 -> 29)."""
    return math.floor(round(n * frac, 9))


@dataclass(frozen=True)
class StatisticTrace:
    """Statistic values for ``k = k_start, ..., k_stop`` (inclusive, 1-based).

    For ``sn_wilcoxon`` a zero self-normalizer turns the value at that
    ``k`` into ``+inf``; such entries are skipped by the argmax and raise
    ``degenerate``.
    """

    values: np.ndarray
    k_start: int
    k_stop: int
    method: str
    n: int
    gamma: Optional[float] = None
    window: Optional[Tuple[float, float]] = None
    degenerate: bool = False

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_start, self.k_stop + 1)

    def __len__(self):
        return self.values.size

    def at(self, k: int) -> float:
        if not self.k_start <= k <= self.k_stop:
            raise IndexError(f"k={k} outside admissible range [{self.k_start}, {self.k_stop}]")
        return float(self.values[k - self.k_start])


@dataclass(frozen=True)
class ChangePointEstimate:
    k_hat: int
    statistic_value: float
    method: str
    n: int
    degenerate: bool
    had_ties: bool = False
    gamma: Optional[float] = None
    window: Optional[Tuple[float, float]] = None
    trace: Optional[StatisticTrace] = None


def _freeze(a):
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# Wilcoxon


def wilcoxon_trace(r: RankVector) -> StatisticTrace:
    """W_{k,n} for k = 1..n-1 via ``W_k = k(n+1)/2 - sum_{i<=k} R_i``.

    Exact for tie-free data. With midranks a tied pair contributes 0
    instead of the +1/2 the literal indicator ``1{X_i <= X_j}`` gives.
    """
    n = r.n
    if n < 2:
        raise ValueError(f"Wilcoxon trace needs n >= 2, got n={n}")
    k = np.arange(1, n, dtype=float)
    values = k * (n + 1) / 2.0 - np.cumsum(r.ranks)[:-1]
    return StatisticTrace(_freeze(values), 1, n - 1, WILCOXON, n)


def wilcoxon_brute(x) -> StatisticTrace:
    """Literal double sum of ``1{X_i <= X_j} - 1/2``; a test oracle, O(n^3)."""
    x = as_series(x, min_length=2)
    n = x.size
    kernel = (x[:, None] <= x[None, :]).astype(float) - 0.5
    values = np.array([kernel[:k, k:].sum() for k in range(1, n)])
    return StatisticTrace(_freeze(values), 1, n - 1, WILCOXON, n)


# ---------------------------------------------------------------------------
# Self-normalized Wilcoxon


def sn_window_range(n: int, window: Tuple[float, float]) -> Tuple[int, int]:
    tau1, tau2 = window
    if not 0.0 < tau1 < tau2 < 1.0:
        raise ValueError(f"window must satisfy 0 < tau1 < tau2 < 1, got {window}")
    k_start, k_stop = floor_frac(n, tau1), floor_frac(n, tau2)
    if k_start < 1 or k_stop > n - 1 or k_start > k_stop:
        raise ValueError(
            f"window {window} admits no index in [1, {n - 1}] for n={n} "
            f"(floor(n*tau1)={k_start}, floor(n*tau2)={k_stop})"
        )
    return k_start, k_stop


def _sn_blocks(ranks: np.ndarray):
    """Numerators and both self-normalizer blocks for every k = 1..n-1.

    Ranks are centred at (n+1)/2 first: S_t(j, k) and the numerator are
    invariant under a common shift of the ranks, and centring keeps the
    partial sums P_t (and hence the cancellation in the prefix algebra)
    small.  Returns (numerator, lower, upper, lower_tol, upper_tol).
    """
    n = ranks.size
    c = ranks - (n + 1) / 2.0
    P = np.cumsum(c)  # P[t-1] = P_t; P_n == 0 up to rounding
    t = np.arange(1, n + 1, dtype=float)
    SP = np.cumsum(P)
    SP2 = np.cumsum(P * P)
    STP = np.cumsum(t * P)

    k = t[:-1]
    Pk = P[:-1]
    SPk, SP2k, STPk = SP[:-1], SP2[:-1], STP[:-1]

    # sum_{t<=k} (P_t - (t/k) P_k)^2
    b = Pk / k
    sum_t2 = k * (k + 1) * (2 * k + 1) / 6.0
    lo_terms = (SP2k, 2.0 * b * STPk, b * b * sum_t2)
    lower = lo_terms[0] - lo_terms[1] + lo_terms[2]

    # sum_{t>k} ((P_t - P_k) - ((t-k)/(n-k)) (P_n - P_k))^2
    m = n - k
    a = (P[-1] - Pk) / m
    tail_P = SP[-1] - SPk
    tail_P2 = SP2[-1] - SP2k
    tail_tP = STP[-1] - STPk
    tail_t = (n * (n + 1) - k * (k + 1)) / 2.0
    sum_q2 = tail_P2 - 2.0 * Pk * tail_P + m * Pk * Pk
    sum_uq = tail_tP - k * tail_P - Pk * tail_t + k * m * Pk
    sum_u2 = m * (m + 1) * (2 * m + 1) / 6.0
    up_terms = (sum_q2, 2.0 * a * sum_uq, a * a * sum_u2)
    upper = up_terms[0] - up_terms[1] + up_terms[2]

    # rounding bound for the cancellation in each block
    scale = 16.0 * n * _EPS
    lower_tol = scale * (np.abs(lo_terms[0]) + np.abs(lo_terms[1]) + np.abs(lo_terms[2]))
    upper_tol = scale * (
        tail_P2 + np.abs(2.0 * Pk * tail_P) + m * Pk * Pk
        + np.abs(up_terms[1]) + np.abs(up_terms[2])
    )
    return Pk, lower, upper, lower_tol, upper_tol


def sn_wilcoxon_trace(r: RankVector, window: Tuple[float, float] = DEFAULT_WINDOW) -> StatisticTrace:
    """SW_{k,n} over ``k in [floor(n*tau1), floor(n*tau2)]`` in O(n).

    The two self-normalizer blocks are evaluated in O(1) per k from prefix
    sums of P_t, P_t^2 and t*P_t, where P_t is the partial sum of ranks.
    """
    n = r.n
    if n < 4:
        raise ValueError(f"self-normalized Wilcoxon trace needs n >= 4, got n={n}")
    k_start, k_stop = sn_window_range(n, window)

    num, lower, upper, lower_tol, upper_tol = _sn_blocks(np.asarray(r.ranks, dtype=float))
    sl = slice(k_start - 1, k_stop)
    num, lower, upper = num[sl], lower[sl], upper[sl]

    zero = (lower <= lower_tol[sl]) & (upper <= upper_tol[sl])
    denom = np.sqrt(np.maximum(lower + upper, 0.0) / n)
    values = np.empty_like(num)
    np.divide(num, denom, out=values, where=~zero)
    values[zero] = np.inf
    return StatisticTrace(
        _freeze(values), k_start, k_stop, SN_WILCOXON, n,
        window=(float(window[0]), float(window[1])), degenerate=bool(zero.any()),
    )


# ---------------------------------------------------------------------------
# CUSUM


def cusum_trace(x, gamma: float = 0.0) -> StatisticTrace:
    """C_{k,n}(gamma) for k = 1..n-1 from a single prefix-sum pass."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    x = as_series(x, min_length=2)
    n = x.size
    # shifting by x[0] leaves the mean difference unchanged and keeps a
    # constant series exactly zero
    S = np.cumsum(x - x[0])
    k = np.arange(1, n, dtype=float)
    Sk = S[:-1]
    diff = Sk / k - (S[-1] - Sk) / (n - k)
    values = (k * (n - k) / n) ** (1.0 - gamma) * diff
    return StatisticTrace(_freeze(values), 1, n - 1, CUSUM, n, gamma=float(gamma))


# ---------------------------------------------------------------------------
# estimators


def smallest_argmax(trace: StatisticTrace) -> Tuple[int, float, bool]:
    """Return ``(k_hat, |trace[k_hat]|, all_zero)``.

    ``np.argmax`` reports the first maximum, matching min{k : ...}.
    Non-finite entries are excluded; if nothing remains, or all admissible
    values are zero, the first admissible index is returned.
    """
    mag = np.abs(trace.values)
    finite = np.isfinite(mag)
    if not finite.any():
        return trace.k_start, math.inf, True
    mag = np.where(finite, mag, -1.0)
    i = int(np.argmax(mag))
    best = float(mag[i])
    return trace.k_start + i, best, best == 0.0


def _estimate(trace, had_ties, keep_trace, **meta):
    k_hat, value, all_zero = smallest_argmax(trace)
    return ChangePointEstimate(
        k_hat=k_hat,
        statistic_value=value,
        method=trace.method,
        n=trace.n,
        degenerate=all_zero or trace.degenerate,
        had_ties=had_ties,
        trace=trace if keep_trace else None,
        **meta,
    )


def estimate_wilcoxon(x, keep_trace=False) -> ChangePointEstimate:
    r = compute_ranks(as_series(x, min_length=2))
    return _estimate(wilcoxon_trace(r), r.had_ties, keep_trace)


def estimate_sn_wilcoxon(x, window=DEFAULT_WINDOW, keep_trace=False) -> ChangePointEstimate:
    r = compute_ranks(as_series(x, min_length=4))
    trace = sn_wilcoxon_trace(r, window)
    return _estimate(trace, r.had_ties, keep_trace, window=trace.window)


def estimate_cusum(x, gamma=0.0, keep_trace=False) -> ChangePointEstimate:
    x = as_series(x, min_length=2)
    trace = cusum_trace(x, gamma)
    had_ties = bool(np.unique(x).size < x.size)
    return _estimate(trace, had_ties, keep_trace, gamma=trace.gamma)


def estimate(x, method=WILCOXON, *, gamma=0.0, window=DEFAULT_WINDOW, keep_trace=False):
    """Dispatch to the estimator named by ``method``."""
    if method == WILCOXON:
        return estimate_wilcoxon(x, keep_trace=keep_trace)
    if method == SN_WILCOXON:
        return estimate_sn_wilcoxon(x, window=window, keep_trace=keep_trace)
    if method == CUSUM:
        return estimate_cusum(x, gamma=gamma, keep_trace=keep_trace)
    raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
