"""Replicated simulation experiments for the change-point estimators.

Seeding: replication ``i`` of a cell with length ``n`` and Hurst index
``H`` draws its noise from ``SeedSequence(seed_base, spawn_key=(n,
round(H * 1e6), i))``.  The stream does not depend on the margin, tau or h,
so cells that differ only in those share their underlying fGn paths
(common random numbers), and every replication can be regenerated on its
own regardless of how many workers ran the experiment.
"""

import itertools
import json
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import estimators as est
from ._io import atomic_write_text, fmt_full, rows_to_csv
from .estimators import floor_frac
from .lrd_synth import GAUSSIAN, PARETO, apply_margin, generate_fgn, inject_change

NORMAL = "normal"
MARGINS = {NORMAL: GAUSSIAN, "gaussian": GAUSSIAN, PARETO: PARETO}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# descriptive statistics


@dataclass(frozen=True)
class Descriptives:
    mean: float
    sd: float
    q1: float
    median: float
    q3: float
    count: int
    sd_defined: bool = True


def descriptive_stats(values) -> Descriptives:
    """Mean, sample SD (divisor n-1) and quartiles of ``values``.

    Quartiles use linear interpolation between order statistics at
    plotting position (k-1)/(n-1) (Hyndman & Fan type 7).  For a single
    value the SD is reported as 0 with ``sd_defined=False``.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("descriptive_stats needs at least one value")
    q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75], method="linear")
    if v.size == 1:
        sd, ok = 0.0, False
    else:
        sd, ok = float(np.std(v, ddof=1)), True
    return Descriptives(float(v.mean()), sd, float(q1), float(med), float(q3), int(v.size), ok)


def mean_absolute_error(estimates, k0):
    e = np.asarray(estimates, dtype=float)
    if e.size == 0:
        raise ValueError("no estimates")
    return float(np.mean(np.abs(e - k0)))


# ---------------------------------------------------------------------------
# configuration


_CUSUM_RE = re.compile(r"^cusum(?:\(([^)]*)\))?$")


@dataclass(frozen=True)
class MethodSpec:
    label: str
    method: str
    gamma: float = 0.0


def parse_method(name, gamma=0.0) -> MethodSpec:
    name = name.strip().lower().replace("-", "_")
    if name in (est.WILCOXON, est.SN_WILCOXON):
        return MethodSpec(name, name)
    m = _CUSUM_RE.match(name)
    if m:
        if m.group(1) is None:
            g = float(gamma)
            return MethodSpec(est.CUSUM if g == 0 else f"cusum({g:g})", est.CUSUM, g)
        g = float(m.group(1))
        return MethodSpec(f"cusum({g:g})", est.CUSUM, g)
    raise ConfigError(f"unknown method {name!r}; expected wilcoxon, sn_wilcoxon or cusum[(gamma)]")


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation cell."""

    tau: float
    h: float
    H: float
    margin: str = NORMAL
    n: int = 600
    reps: int = 500
    methods: Tuple[str, ...] = (est.WILCOXON,)
    gamma: float = 0.0
    window: Tuple[float, float] = est.DEFAULT_WINDOW
    seed_base: int = 0
    beta: float = 3.0
    k: float = 1.0

    def __post_init__(self):
        if self.margin not in MARGINS:
            raise ConfigError(f"unknown margin {self.margin!r}; expected normal or pareto")
        if self.reps < 1:
            raise ConfigError(f"reps must be >= 1, got {self.reps}")
        if self.n < 4:
            raise ConfigError(f"n must be >= 4, got {self.n}")
        if not math.isfinite(self.h):
            raise ConfigError(f"h must be finite, got {self.h}")
        if not 0.0 < self.H < 1.0:
            raise ConfigError(f"H must lie in (0, 1), got {self.H}")
        if not 1 <= self.k0 <= self.n - 1:
            raise ConfigError(f"tau={self.tau} gives k0={self.k0} outside [1, {self.n - 1}]")
        if MARGINS[self.margin] == PARETO and not (self.beta > 2 and self.k > 0):
            raise ConfigError("pareto margin needs beta > 2 and k > 0")
        if not self.methods:
            raise ConfigError("at least one method is required")
        for m in self.methods:
            parse_method(m, self.gamma)

    @property
    def k0(self):
        return floor_frac(self.n, self.tau)

    @property
    def method_specs(self) -> List[MethodSpec]:
        return [parse_method(m, self.gamma) for m in self.methods]

    def margin_label(self):
        if MARGINS[self.margin] == PARETO:
            return f"pareto({self.beta:g},{self.k:g})"
        return NORMAL


_GRID_KEYS = ("margin", "tau", "h", "H")
_CONFIG_KEYS = {f.name for f in fields(ExperimentConfig)}


def expand_config(doc: dict) -> List[ExperimentConfig]:
    """Turn a flat JSON document into cells.

    ``margin``, ``tau``, ``h`` and ``H`` may each be a scalar or a list;
    cells are the Cartesian product in that key order (margin outermost).
    """
    unknown = sorted(set(doc) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    missing = [k for k in ("tau", "h", "H") if k not in doc]
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}")
    base = {k: v for k, v in doc.items() if k not in _GRID_KEYS}
    if "methods" in base:
        methods = base["methods"]
        base["methods"] = (methods,) if isinstance(methods, str) else tuple(methods)
    if "window" in base:
        base["window"] = tuple(float(w) for w in base["window"])

    def as_list(v):
        return list(v) if isinstance(v, (list, tuple)) else [v]

    grid = [as_list(doc.get(k, NORMAL if k == "margin" else None)) for k in _GRID_KEYS]
    cells = []
    for margin, tau, h, H in itertools.product(*grid):
        try:
            cells.append(ExperimentConfig(margin=margin, tau=float(tau), h=float(h), H=float(H), **base))
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
    return cells


def load_config(path) -> List[ExperimentConfig]:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a JSON object at top level")
    return expand_config(doc)


# ---------------------------------------------------------------------------
# experiments


def replication_seed(seed_base, n, H, rep):
    return np.random.SeedSequence(seed_base, spawn_key=(int(n), int(round(H * 1e6)), int(rep)))


def _map_reps(fn, reps, workers):
    """``[fn(i) for i in range(reps)]``, optionally on a thread pool."""
    if workers is None or workers <= 1:
        return [fn(i) for i in range(reps)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(reps)))


@dataclass
class MethodSummary:
    label: str
    stats: Descriptives
    estimates: np.ndarray
    degenerate_count: int

    @property
    def reps_used(self):
        return self.stats.count


@dataclass
class ExperimentSummary:
    config: ExperimentConfig
    k0: int
    methods: Dict[str, MethodSummary] = field(default_factory=dict)

    @property
    def no_change(self):
        return self.config.h == 0.0


def simulate_replication(cfg: ExperimentConfig, rep: int):
    """Estimates and degeneracy flags of every method for replication ``rep``."""
    ss = replication_seed(cfg.seed_base, cfg.n, cfg.H, rep)
    try:
        xi = generate_fgn(cfg.n, cfg.H, ss)
    except ArithmeticError as exc:
        raise RuntimeError(f"replication {rep}: {exc}") from exc
    y = apply_margin(xi, MARGINS[cfg.margin], cfg.beta, cfg.k)
    if cfg.h != 0.0:
        y = inject_change(y, cfg.tau, cfg.h)
    out = []
    for spec in cfg.method_specs:
        e = est.estimate(y, spec.method, gamma=spec.gamma, window=cfg.window)
        out.append((e.k_hat, e.degenerate))
    return out


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentSummary:
    results = _map_reps(lambda i: simulate_replication(cfg, i), cfg.reps, workers)
    summary = ExperimentSummary(cfg, cfg.k0)
    for j, spec in enumerate(cfg.method_specs):
        k_hat = np.array([r[j][0] for r in results], dtype=np.int64)
        degenerate = sum(r[j][1] for r in results)
        summary.methods[spec.label] = MethodSummary(
            spec.label, descriptive_stats(k_hat), k_hat, int(degenerate)
        )
    return summary


def run_grid(cells: Sequence[ExperimentConfig], workers: int = 1) -> List[ExperimentSummary]:
    return [run_experiment(c, workers) for c in cells]


@dataclass(frozen=True)
class MaeCell:
    H: float
    n: int
    mae: float
    k0: int
    reps: int


def mae_curve(
    H_list,
    n_list,
    reps=500,
    h=1.0,
    tau=0.5,
    seed_base=0,
    estimator: Optional[Callable[[np.ndarray], int]] = None,
    workers=1,
) -> List[MaeCell]:
    """Mean absolute error of an estimator (default: Wilcoxon) on normal-margin fGn."""
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    if estimator is None:
        estimator = lambda x: est.estimate_wilcoxon(x).k_hat  # noqa: E731
    table = []
    for H in H_list:
        for n in n_list:
            if n < 4:
                raise ValueError(f"n must be >= 4, got {n}")
            k0 = floor_frac(n, tau)

            def one(i, H=H, n=n):
                y = generate_fgn(n, H, replication_seed(seed_base, n, H, i))
                return estimator(inject_change(y, tau, h))

            k_hat = _map_reps(one, reps, workers)
            table.append(MaeCell(float(H), int(n), mean_absolute_error(k_hat, k0), k0, reps))
    return table


# ---------------------------------------------------------------------------
# output

SUMMARY_HEADER = [
    "margin", "tau", "h", "H", "n", "k0", "method", "reps",
    "mean", "sd", "q1", "median", "q3", "degenerate_count", "sd_defined",
]
RAW_HEADER = ["margin", "tau", "h", "H", "n", "k0", "method", "rep", "k_hat"]
MAE_HEADER = ["H", "n", "k0", "reps", "mae"]


def _cell_key(c: ExperimentConfig):
    return [c.margin_label(), fmt_full(c.tau), fmt_full(c.h), fmt_full(c.H), c.n, c.k0]


def summary_rows(summaries):
    for s in summaries:
        for m in s.methods.values():
            d = m.stats
            yield _cell_key(s.config) + [
                m.label, d.count, fmt_full(d.mean), fmt_full(d.sd), fmt_full(d.q1),
                fmt_full(d.median), fmt_full(d.q3), m.degenerate_count, int(d.sd_defined),
            ]


def raw_rows(summaries):
    for s in summaries:
        key = _cell_key(s.config)
        for m in s.methods.values():
            for i, k in enumerate(m.estimates):
                yield key + [m.label, i, int(k)]


def write_summary_csv(path, summaries):
    atomic_write_text(path, rows_to_csv(SUMMARY_HEADER, summary_rows(summaries)))


def write_raw_csv(path, summaries):
    atomic_write_text(path, rows_to_csv(RAW_HEADER, raw_rows(summaries)))


def write_mae_csv(path, table: Sequence[MaeCell]):
    rows = [[fmt_full(c.H), c.n, c.k0, c.reps, fmt_full(c.mae)] for c in table]
    atomic_write_text(path, rows_to_csv(MAE_HEADER, rows))


def format_table(summaries) -> str:
    """Human-readable summary, one line per (cell, method), 6 significant digits."""
    head = f"{'margin':<12}{'tau':>6}{'h':>6}{'H':>6}{'n':>7}  {'method':<13}" \
           f"{'mean':>11}{'sd':>11}  quartiles"
    lines = [head, "-" * len(head)]
    for s in summaries:
        c = s.config
        for m in s.methods.values():
            d = m.stats
            flag = "" if d.sd_defined else " (sd undefined)"
            if s.no_change:
                flag += " (no change)"
            lines.append(
                f"{c.margin_label():<12}{c.tau:>6g}{c.h:>6g}{c.H:>6g}{c.n:>7}  {m.label:<13}"
                f"{d.mean:>11.6g}{d.sd:>11.6g}  ({d.q1:.6g}, {d.median:.6g}, {d.q3:.6g}){flag}"
            )
    return "\n".join(lines)
