"""Command-line interface: ``lrdcp {estimate,simulate,mae,limit-sample}``.

Exit status is 0 when a result was produced and 2 for any usage or input
error.
"""

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass
from importlib import resources
from typing import List, Optional

import numpy as np

from . import estimators as est
from ._io import atomic_write_text, rows_to_csv
from .asymptotics import INT_F_SQ_NORMAL, sample_limit_argmax
from .montecarlo import (
    ConfigError,
    format_table,
    load_config,
    mae_curve,
    run_grid,
    write_mae_csv,
    write_raw_csv,
    write_summary_csv,
)

EXIT_OK = 0
EXIT_USAGE = 2

JSON_KEYS = ("method", "k_hat", "label", "statistic", "degenerate", "had_ties", "n")


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# CSV ingestion


@dataclass
class SeriesFile:
    values: np.ndarray
    labels: Optional[List]
    source_path: str

    def label_at(self, k):
        """Label of observation ``k`` (1-based), or None without labels."""
        if self.labels is None:
            return None
        return self.labels[k - 1]


def _to_float(s):
    try:
        v = float(s)
    except ValueError:
        return None
    return v


def _label_value(s):
    v = _to_float(s)
    if v is None or not math.isfinite(v):
        return s
    return int(v) if v.is_integer() else v


def read_series(path) -> SeriesFile:
    """Read a comma-separated file of values with an optional label column.

    The first column holds the observations, an optional second column
    labels them (e.g. years).  A first row whose value cell is not numeric
    is treated as a header.
    """
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise InputError(f"cannot read {path}: not a text file") from None

    numbered = [(i + 1, r) for i, r in enumerate(rows) if any(c.strip() for c in r)]
    if numbered and _to_float(numbered[0][1][0].strip()) is None:
        numbered = numbered[1:]
    if not numbered:
        raise InputError(f"{path}: no observations")

    values, labels, problems = [], [], []
    has_labels = any(len(r) > 1 and r[1].strip() for _, r in numbered)
    for line, row in numbered:
        cell = row[0].strip()
        v = _to_float(cell)
        if v is None or not math.isfinite(v):
            problems.append(f"row {line}: cannot parse value {cell!r}")
            continue
        values.append(v)
        if has_labels:
            if len(row) < 2 or not row[1].strip():
                problems.append(f"row {line}: missing label")
            else:
                labels.append(_label_value(row[1].strip()))
    if problems:
        shown = problems[:10]
        more = f"\n  ... and {len(problems) - 10} more" if len(problems) > 10 else ""
        raise InputError(f"{path}: invalid rows:\n  " + "\n  ".join(shown) + more)
    if len(values) < 2:
        raise InputError(f"{path}: need at least 2 observations, got {len(values)}")

    if has_labels and all(isinstance(l, (int, float)) for l in labels):
        if any(b <= a for a, b in zip(labels, labels[1:])):
            raise InputError(f"{path}: numeric labels must be strictly increasing")
    return SeriesFile(np.array(values), labels if has_labels else None, os.fspath(path))


def nile_path():
    """Path of the bundled Nile discharge series (1871-1970)."""
    return str(resources.files("lrdcp").joinpath("data", "nile.csv"))


# ---------------------------------------------------------------------------
# commands


def _g6(x):
    """Round to 6 significant digits for display."""
    if x is None or not math.isfinite(x):
        return x
    return float(f"{x:.6g}")


def cmd_estimate(args):
    series = read_series(args.input)
    method = args.method.replace("-", "_")
    try:
        result = est.estimate(
            series.values, method, gamma=args.gamma, window=(args.tau1, args.tau2),
            keep_trace=args.trace,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None

    report = {
        "method": result.method,
        "k_hat": result.k_hat,
        "label": series.label_at(result.k_hat),
        "statistic": _g6(result.statistic_value),
        "degenerate": result.degenerate,
        "had_ties": result.had_ties,
        "n": result.n,
    }
    if args.format == "json":
        if args.trace:
            report["trace"] = {
                "k": result.trace.ks.tolist(),
                "value": [_g6(float(v)) for v in result.trace.values],
            }
        print(json.dumps(report))
    else:
        row = [json.dumps(report[k]) if isinstance(report[k], bool) else report[k] for k in JSON_KEYS]
        print(rows_to_csv(JSON_KEYS, [row]), end="")
        if args.trace:
            print(rows_to_csv(["k", "value"], zip(result.trace.ks.tolist(),
                                                  map(repr, result.trace.values.tolist()))), end="")
    return EXIT_OK


def cmd_simulate(args):
    try:
        cells = load_config(args.config)
    except OSError as exc:
        raise InputError(f"cannot read {args.config}: {exc.strerror or exc}") from None
    except ConfigError as exc:
        raise InputError(str(exc)) from None
    summaries = run_grid(cells, workers=args.workers)
    write_summary_csv(os.path.join(args.out, "summary.csv"), summaries)
    write_raw_csv(os.path.join(args.out, "raw_estimates.csv"), summaries)
    print(format_table(summaries))
    return EXIT_OK


def cmd_mae(args):
    try:
        table = mae_curve(args.H, args.n, reps=args.reps, h=args.h, tau=args.tau,
                          seed_base=args.seed, workers=args.workers)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    write_mae_csv(args.out, table)
    for c in table:
        print(f"H={c.H:g} n={c.n} MAE={c.mae:.6g}")
    return EXIT_OK


def cmd_limit_sample(args):
    try:
        sample = sample_limit_argmax(
            args.tau, args.H, args.reps, grid_M=args.M, grid_step=args.step,
            seed=args.seed, int_J_dF=args.int_j_df,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None
    text = "".join(f"{v!r}\n" for v in sample.argmax_values.tolist())
    atomic_write_text(args.out, text)
    vals = sample.argmax_values
    print(f"reps={vals.size} median={np.median(vals):.6g} "
          f"boundary_fraction={sample.boundary_fraction():.6g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(f"{self.prog}: {message}")


def _csv_floats(s):
    return [float(v) for v in s.split(",") if v.strip()]


def _csv_ints(s):
    return [int(v) for v in s.split(",") if v.strip()]


def build_parser():
    p = _Parser(prog="lrdcp", description="Change-point estimation for long-range dependent series.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("estimate", help="estimate a single change point in a CSV series")
    e.add_argument("--input", required=True, help="CSV: value column, optional label column")
    e.add_argument("--method", default="wilcoxon", choices=["wilcoxon", "sn-wilcoxon", "cusum"])
    e.add_argument("--gamma", type=float, default=0.0, help="CUSUM weight exponent in [0, 1)")
    e.add_argument("--tau1", type=float, default=est.DEFAULT_WINDOW[0])
    e.add_argument("--tau2", type=float, default=est.DEFAULT_WINDOW[1])
    e.add_argument("--format", choices=["json", "csv"], default="json")
    e.add_argument("--trace", action="store_true", help="include the full statistic trace")
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("simulate", help="run a Monte Carlo experiment from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("mae", help="mean absolute error of the Wilcoxon estimator vs n")
    m.add_argument("--H", type=_csv_floats, default=[0.6, 0.7, 0.8, 0.9])
    m.add_argument("--n", type=_csv_ints, default=[1000, 2000, 4000, 8000, 16000])
    m.add_argument("--reps", type=int, default=500)
    m.add_argument("--h", type=float, default=1.0)
    m.add_argument("--tau", type=float, default=0.5)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--workers", type=int, default=1)
    m.add_argument("--out", required=True, help="output CSV path")
    m.set_defaults(func=cmd_mae)

    lim = sub.add_parser("limit-sample", help="sample the limit law of the rescaled estimator")
    lim.add_argument("--tau", type=float, required=True)
    lim.add_argument("--H", type=float, required=True)
    lim.add_argument("--reps", type=int, default=1000)
    lim.add_argument("--M", type=float, default=50.0)
    lim.add_argument("--step", type=float, default=0.05)
    lim.add_argument("--seed", type=int, default=0)
    lim.add_argument("--out", required=True)
    lim.add_argument("--int-j-df", type=float, default=-INT_F_SQ_NORMAL, help=argparse.SUPPRESS)
    lim.set_defaults(func=cmd_limit_sample)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # --help exits 0; anything else from argparse is a usage error
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
