"""
Command-line front end.

Exit codes: 0 success, 2 input error (bad flags, unreadable or malformed
CSV, invalid config), 3 numerical or estimator failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path
from typing import Any, Sequence, TextIO

import numpy as np
from numpy.typing import NDArray

from . import __version__
from .cars import read_source, bundled_path, write_csv
from .criteria import METHODS, OVERRIDE_TYPES, DimensionEstimate, select
from .errors import InputError, NumericalError, TdrrError
from .factors import as_panel, factor_spectrum
from .harness import load_config, report_to_csv, report_to_json, run_experiment
from .kernel_fit import bandwidth_grid, bandwidth_rule, grid_search, nw_fit, project, rss
from .sdr import dee_sir_matrix, sir_matrix

__all__ = ["main", "read_csv", "trace_rows", "write_trace", "read_trace", "EXIT_OK", "EXIT_INPUT", "EXIT_NUMERIC"]

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
TRACE_HEADER = ("method", "round", "index", "value")


# -- CSV ingestion -------------------------------------------------------------


def read_csv(path: str | Path) -> tuple[list[str], NDArray[np.float64]]:
    """Header plus a finite float matrix; errors name the offending row and column.

    Rows are numbered as in a text editor (the header is row 1).
    """
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise InputError(f"{path} is not valid UTF-8") from None
    if not rows:
        raise InputError(f"{path}: file is empty")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise InputError(f"{path}: duplicate column names in header")
    body = [(k + 2, r) for k, r in enumerate(rows[1:]) if any(cell.strip() for cell in r)]
    if not body:
        raise InputError(f"{path}: no data rows")
    data = np.empty((len(body), len(header)))
    for i, (lineno, row) in enumerate(body):
        if len(row) != len(header):
            raise InputError(f"{path}: row {lineno} has {len(row)} fields, header has {len(header)}")
        for j, cell in enumerate(row):
            text = cell.strip()
            where = f"{path}: row {lineno}, column {j + 1} ({header[j]!r})"
            if not text:
                raise InputError(f"{where}: missing value")
            try:
                value = float(text)
            except ValueError:
                raise InputError(f"{where}: cannot parse {text!r} as a number") from None
            if not math.isfinite(value):
                raise InputError(f"{where}: value {text!r} is not finite")
            data[i, j] = value
    return header, data


def split_response(
    header: list[str], data: NDArray[np.float64], response: str
) -> tuple[list[str], NDArray[np.float64], NDArray[np.float64]]:
    if response not in header:
        raise InputError(f"response column {response!r} not found; columns are {', '.join(header)}")
    k = header.index(response)
    names = header[:k] + header[k + 1 :]
    return names, np.delete(data, k, axis=1), data[:, k]


def marginal_standardize(X: NDArray[np.float64]) -> NDArray[np.float64]:
    sd = X.std(axis=0)
    if np.any(sd == 0.0):
        raise InputError("cannot standardize a constant predictor column")
    return (X - X.mean(axis=0)) / sd


# -- traces --------------------------------------------------------------------


def trace_rows(est: DimensionEstimate) -> list[tuple[str, str, int, float]]:
    """Plot-ready (method, round, index, value) rows; index is 1-based."""
    rows: list[tuple[str, str, int, float]] = []
    if est.trace is not None:
        for name, values in (
            ("s", est.trace.s),
            ("first", est.trace.first_round),
            ("second", est.trace.second_round),
        ):
            rows.extend((est.method, name, j + 1, float(v)) for j, v in enumerate(values))
    if est.criterion is not None:
        rows.extend((est.method, "criterion", j + 1, float(v)) for j, v in enumerate(est.criterion))
    return rows


def write_trace(rows: Sequence[tuple[str, str, int, float]], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for method, rnd, idx, value in rows:
        writer.writerow([method, rnd, idx, repr(value)])


def read_trace(text: str) -> list[tuple[str, str, int, float]]:
    reader = csv.reader(io.StringIO(text))
    if tuple(next(reader)) != TRACE_HEADER:
        raise InputError("not a trace file: unexpected header")
    return [(m, r, int(i), float(v)) for m, r, i, v in reader]


def _emit_trace(path: str | None, rows: list[tuple[str, str, int, float]]) -> None:
    if path is None:
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            write_trace(rows, fh)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}") from None


# -- option helpers ------------------------------------------------------------


def _methods(text: str) -> tuple[str, ...]:
    methods = tuple(m.strip().upper() for m in text.split(",") if m.strip())
    unknown = [m for m in methods if m not in METHODS]
    if unknown or not methods:
        raise InputError(f"unknown methods {unknown}; choose from {', '.join(METHODS)}")
    return methods


def _parse_overrides(items: Sequence[str], methods: Sequence[str]) -> dict[str, dict[str, Any]]:
    """``KEY=VALUE`` applies to every method, ``METHOD.KEY=VALUE`` to one."""
    out: dict[str, dict[str, Any]] = {m: {} for m in methods}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"override {item!r} must look like KEY=VALUE")
        target, _, opt = key.strip().rpartition(".")
        if opt not in OVERRIDE_TYPES:
            raise InputError(f"unknown override {opt!r}; choose from {', '.join(OVERRIDE_TYPES)}")
        try:
            parsed = OVERRIDE_TYPES[opt](value.strip())
        except ValueError:
            raise InputError(f"override {opt!r} has invalid value {value!r}") from None
        for m in [target.upper()] if target else methods:
            out.setdefault(m, {})[opt] = parsed
    return out


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _print_estimate(est: DimensionEstimate, out: TextIO) -> None:
    flags = f"  [{', '.join(est.flags)}]" if est.flags else ""
    print(f"{est.method}: q_hat = {est.q_hat}{flags}", file=out)
    if est.trace is not None:
        t = est.trace
        print("   j  s_j  first_round  second_round", file=out)
        for j in range(t.s.size):
            first = _fmt(t.first_round[j]) if j < t.first_round.size else "-"
            second = _fmt(t.second_round[j]) if j < t.second_round.size else "-"
            print(f"  {j + 1:2d}  {_fmt(t.s[j])}  {first}  {second}", file=out)
        print(f"  qualifying: {list(t.qualifying)}", file=out)
    elif est.criterion is not None:
        print("   j  criterion", file=out)
        for j, v in enumerate(est.criterion):
            print(f"  {j + 1:2d}  {_fmt(v)}", file=out)


# -- subcommands ---------------------------------------------------------------


def cmd_estimate_dim(args: argparse.Namespace, out: TextIO) -> int:
    header, data = read_csv(args.input)
    names, X, y = split_response(header, data, args.response)
    if args.standardize:
        X = marginal_standardize(X)
    methods = _methods(args.methods)
    target = sir_matrix(X, y, args.slices) if args.estimator == "sir" else dee_sir_matrix(X, y, args.weighting)
    overrides = _parse_overrides(args.override, methods)
    for key in ("c1", "c2", "tau"):
        value = getattr(args, key)
        if value is not None:
            overrides.setdefault("TDRR", {})[key] = value
    spec = target.spectrum
    print(f"{target.method} on n={target.n}, p={spec.p}", file=out)
    print("eigenvalues: " + " ".join(_fmt(v) for v in spec.values), file=out)
    rows = []
    for method in methods:
        est = select(spec, method, setting="sdr", n=target.n, H=args.slices, overrides=overrides.get(method))
        _print_estimate(est, out)
        rows.extend(trace_rows(est))
    rows.extend(("spectrum", "eigenvalue", j + 1, float(v)) for j, v in enumerate(spec.values))
    _emit_trace(args.emit_trace, rows)
    return EXIT_OK


def cmd_estimate_factors(args: argparse.Namespace, out: TextIO) -> int:
    header, data = read_csv(args.input)
    # default layout: observations in rows, one series per column
    panel = as_panel(data if args.series_in_rows else data.T)
    p, n = panel.shape
    spec = factor_spectrum(panel, demean=args.demean)
    methods = _methods(args.methods)
    overrides = _parse_overrides(args.override, methods)
    print(f"panel: p={p} series, n={n} observations", file=out)
    k = min(args.k, spec.p)
    print(f"first {k} eigenvalues: " + " ".join(_fmt(v) for v in spec.values[:k]), file=out)
    rows = []
    for method in methods:
        est = select(spec, method, setting="factor", n=n, p=p, overrides=overrides.get(method))
        _print_estimate(est, out)
        rows.extend(trace_rows(est))
    rows.extend(("spectrum", "eigenvalue", j + 1, float(v)) for j, v in enumerate(spec.values[:k]))
    _emit_trace(args.emit_trace, rows)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, out: TextIO) -> int:
    if args.threads < 1:
        raise InputError(f"--threads must be at least 1, got {args.threads}")
    try:
        cfg = load_config(args.config)
    except OSError as exc:
        raise InputError(f"cannot read {args.config}: {exc.strerror or exc}") from None
    rep = run_experiment(cfg, threads=args.threads)
    prefix = Path(args.out)
    try:
        prefix.with_name(prefix.name + ".csv").write_text(report_to_csv(rep), encoding="utf-8")
        prefix.with_name(prefix.name + ".json").write_text(report_to_json(rep), encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write report: {exc.strerror or exc}") from None
    out.write(report_to_csv(rep))
    print(f"wrote {prefix}.csv and {prefix}.json ({rep.wall_time:.2f}s)", file=sys.stderr)
    return EXIT_OK


def cmd_fit_rss(args: argparse.Namespace, out: TextIO) -> int:
    header, data = read_csv(args.input)
    names, X, y = split_response(header, data, args.response)
    if args.standardize:
        X = marginal_standardize(X)
    if not 1 <= args.q <= X.shape[1]:
        raise InputError(f"--q must lie in [1, p={X.shape[1]}], got {args.q}")
    target = sir_matrix(X, y, args.slices) if args.estimator == "sir" else dee_sir_matrix(X, y, args.weighting)
    proj = project(target, X, args.q)
    print(f"{target.method}, q={args.q}", file=out)
    if args.bandwidth is not None:
        h = args.bandwidth
        print(f"h={_fmt(h)}  RSS={_fmt(rss(nw_fit(proj, y, h), y))}", file=out)
    elif args.grid or args.cv:
        grid = bandwidth_grid(full=args.full_grid)
        best_h, best, values = grid_search(proj, y, grid, loo=args.cv)
        label = "CV" if args.cv else "RSS"
        for h, v in zip(grid, values):
            print(f"h={_fmt(h)}  {label}={_fmt(v)}", file=out)
        if args.cv:
            best = rss(nw_fit(proj, y, best_h), y)
        print(f"best h={_fmt(best_h)}  RSS={_fmt(best)}", file=out)
    else:
        h = bandwidth_rule(X.shape[0], args.q)
        print(f"h={_fmt(h)} (rule n^(-1/(4+q))/4)  RSS={_fmt(rss(nw_fit(proj, y, h), y))}", file=out)
    return EXIT_OK


def cmd_prepare_cars(args: argparse.Namespace, out: TextIO) -> int:
    if args.source is None:
        text = bundled_path().read_text(encoding="utf-8")
    else:
        try:
            text = write_csv(read_source(args.source))
        except OSError as exc:
            raise InputError(f"cannot read {args.source}: {exc.strerror or exc}") from None
    if args.out is None:
        out.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def _sdr_estimator_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--response", required=True, help="name of the response column")
    p.add_argument("--estimator", choices=("sir", "dee"), default="dee")
    p.add_argument("--slices", type=int, default=10, help="number of SIR slices H (default 10)")
    p.add_argument("--weighting", choices=("none", "binary-sir", "mean-difference"), default="none",
                   help="per-cut weighting of the DEE kernel")
    p.add_argument("--standardize", action="store_true", help="z-score each predictor first")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tdrr", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate-dim", help="structural dimension of a regression")
    _sdr_estimator_args(p)
    p.add_argument("--methods", default="TDRR,RRE,RE,BIC", help="comma-separated list of " + ",".join(METHODS))
    p.add_argument("--c1", type=float)
    p.add_argument("--c2", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--override", action="append", default=[], metavar="[METHOD.]KEY=VALUE")
    p.add_argument("--emit-trace", metavar="FILE", help="write (method, round, index, value) CSV")
    p.set_defaults(func=cmd_estimate_dim)

    p = sub.add_parser("estimate-factors", help="number of factors in a panel")
    p.add_argument("--input", required=True, help="numeric CSV; observations in rows by default")
    p.add_argument("--series-in-rows", action="store_true", help="rows are series, columns observations")
    p.add_argument("--demean", action="store_true", help="subtract each series' mean")
    p.add_argument("--methods", default="TDRR,RRE,RE,BIC")
    p.add_argument("--k", type=int, default=30, help="eigenvalues to print (default 30)")
    p.add_argument("--override", action="append", default=[], metavar="[METHOD.]KEY=VALUE")
    p.add_argument("--emit-trace", metavar="FILE")
    p.set_defaults(func=cmd_estimate_factors)

    p = sub.add_parser("simulate", help="run a Monte Carlo experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, metavar="PREFIX", help="writes PREFIX.csv and PREFIX.json")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit-rss", help="kernel-regression RSS on the leading q directions")
    _sdr_estimator_args(p)
    p.add_argument("--q", type=int, required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--bandwidth", type=float)
    mode.add_argument("--grid", action="store_true", help="search h over l/20")
    mode.add_argument("--cv", action="store_true", help="leave-one-out CV over the grid")
    p.add_argument("--full-grid", action="store_true", help="include h = 0.05 in the grid")
    p.set_defaults(func=cmd_fit_rss)

    p = sub.add_parser("prepare-cars", help="write the preprocessed Auto MPG CSV")
    p.add_argument("--source", help="raw auto-mpg.data or vega cars.json; bundled copy if omitted")
    p.add_argument("--out", help="output path (stdout if omitted)")
    p.set_defaults(func=cmd_prepare_cars)
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    stream = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return int(args.func(args, stream))
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except TdrrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
