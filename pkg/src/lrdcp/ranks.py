"""Midranks of a univariate sample."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RankVector:
    """Ranks of a series, in original observation order.

    Tied observations share the average of the positions they occupy
    (midranks), so ``ranks.sum() == n * (n + 1) / 2`` always holds.
    """

    ranks: np.ndarray
    n: int
    had_ties: bool


def as_series(x, min_length=1):
    """Validate ``x`` as a 1-d finite float array and return it."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d series, got shape {arr.shape}")
    if arr.size < min_length:
        raise ValueError(f"series needs at least {min_length} observations, got {arr.size}")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise ValueError(f"non-finite value {arr[bad[0]]!r} at index {bad[0]}")
    return arr


def compute_ranks(x) -> RankVector:
    """Rank ``x`` in ascending order using one stable sort, O(n log n)."""
    x = as_series(x)
    n = x.size
    order = np.argsort(x, kind="stable")
    xs = x[order]

    # boundaries of runs of equal values in sorted order
    new_run = np.empty(n, dtype=bool)
    new_run[0] = True
    np.not_equal(xs[1:], xs[:-1], out=new_run[1:])
    starts = np.flatnonzero(new_run)
    had_ties = starts.size < n

    if had_ties:
        ends = np.append(starts[1:], n)
        # positions start+1..end average to (start + 1 + end) / 2
        run_rank = (starts + 1 + ends) / 2.0
        sorted_ranks = np.repeat(run_rank, ends - starts)
    else:
        sorted_ranks = np.arange(1, n + 1, dtype=float)

    ranks = np.empty(n, dtype=float)
    ranks[order] = sorted_ranks
    ranks.setflags(write=False)
    return RankVector(ranks=ranks, n=n, had_ties=bool(had_ties))
