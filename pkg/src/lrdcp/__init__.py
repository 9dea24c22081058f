"""Rank-based change-point estimation for long-range dependent time series."""

from .estimators import (
    ChangePointEstimate,
    StatisticTrace,
    cusum_trace,
    estimate,
    estimate_cusum,
    estimate_sn_wilcoxon,
    estimate_wilcoxon,
    sn_wilcoxon_trace,
    wilcoxon_brute,
    wilcoxon_trace,
)
from .lrd_synth import LrdSpec, fgn_autocov, generate_fgn, inject_change, pareto_transform
from .ranks import RankVector, compute_ranks

__version__ = "0.1.0"
