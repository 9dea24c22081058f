"""Independent reference implementations used only by the tests.

These follow the defining formulas literally and share no code with the
package.
"""

import math
from fractions import Fraction

import numpy as np


def ranks_by_counting(x):
    """R_i = #{j : X_j <= X_i}; equals the ordinary rank for tie-free data."""
    x = list(x)
    return [sum(1 for xj in x if xj <= xi) for xi in x]


def sn_wilcoxon_literal(x, window):
    """SW_{k,n} evaluated straight from its definition.

    Ranks are integers, so numerator and denominator are computed exactly
    with Fractions; only the final square root is rounded.  A numerator that
    is exactly zero therefore comes out as exactly 0.0.
    """
    x = list(x)
    n = len(x)
    R = [Fraction(r) for r in ranks_by_counting(x)]

    def sum_sq_S(j, k):
        # sum over t = j..k of S_{t,j,k}^2, S_{t,j,k} = sum_{h=j}^t (R_h - mean(R_j..R_k))
        rbar = sum(R[j - 1:k]) / (k - j + 1)
        total, S = Fraction(0), Fraction(0)
        for t in range(j, k + 1):
            S += R[t - 1] - rbar
            total += S * S
        return total

    k1 = math.floor(n * window[0])
    k2 = math.floor(n * window[1])
    out = {}
    for k in range(k1, k2 + 1):
        num = sum(R[:k]) - Fraction(k, n) * sum(R)
        den = (sum_sq_S(1, k) + sum_sq_S(k + 1, n)) / n
        out[k] = float(num) / math.sqrt(den)
    return out


def cusum_literal(x, gamma):
    x = list(x)
    n = len(x)
    out = []
    for k in range(1, n):
        m1 = sum(x[:k]) / k
        m2 = sum(x[k:]) / (n - k)
        out.append((k * (n - k) / n) ** (1 - gamma) * (m1 - m2))
    return out


def quantile_type7(values, p):
    """Linear interpolation at plotting position (k-1)/(n-1), from first principles."""
    v = sorted(values)
    n = len(v)
    pos = (n - 1) * p
    lo = math.floor(pos)
    hi = min(lo + 1, n - 1)
    return v[lo] + (pos - lo) * (v[hi] - v[lo])


def smallest_argmax_scan(values):
    """Left-to-right scan with strict '>' comparison."""
    best_i, best = 0, abs(values[0])
    for i, v in enumerate(values):
        if abs(v) > best:
            best_i, best = i, abs(v)
    return best_i


def sample_autocov_known_mean(y, lag):
    """Lag-``lag`` autocovariance of a zero-mean series, divisor n - lag."""
    y = np.asarray(y, dtype=float)
    n = y.size
    return float(np.dot(y[: n - lag], y[lag:]) / (n - lag))
