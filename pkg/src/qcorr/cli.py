"""Command-line interface.

Grids are written as CSV with columns ``p1,q1,p2,q2,value,valid,m``;
reports are JSON lines.  Every number in a report or grid is printed with
10 significant digits.  ``simulate`` writes full round-trip precision so
that analysing its output reproduces library results exactly.

Exit status: 0 on success, 1 on data/domain errors, 2 on I/O errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys

import numpy as np

from . import __version__
from .analytic import normal_product_cov
from .condstats import cond_corr_matrix, cond_moments, projection_cond_corr, random_directions, recursive_independence_probe
from .errors import DataError, DomainError, IoError, QCorrError
from .inference import (
    GridSpec, analytic_scan, x_split_grid, upper_bound_grid, mc_null, scan_splits, test_statistic,
)
from .quantile import QuantileBox, QuantileSplit, SampleMatrix
from .special import RngStream
from .synth import FAMILIES, GeneratorSpec, generate
from .timeseries import Series, cond_acf, lag_pair_table

log = logging.getLogger("qcorr")

GRID_COLUMNS = ("p1", "q1", "p2", "q2", "value", "valid", "m")


def ingest_csv(path, columns=None):
    """Read the selected numeric columns of a headed CSV file.

    Rows with a missing or non-numeric value in any selected column are
    dropped and counted.  Returns ``(SampleMatrix, dropped)``.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise DataError(f"{path}: empty file, header row required") from None
            rows = list(reader)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc

    if columns is None:
        columns = header
    missing = [c for c in columns if c not in header]
    if missing:
        raise DataError(f"unknown column(s) {', '.join(missing)}; available: {', '.join(header)}")
    idx = [header.index(c) for c in columns]

    data, dropped = [], 0
    numeric_seen = [0] * len(idx)
    for row in rows:
        if not row or all(not c.strip() for c in row):
            continue
        vals = []
        for k, j in enumerate(idx):
            try:
                v = float(row[j])
            except (IndexError, ValueError):
                v = math.nan
            if math.isfinite(v):
                numeric_seen[k] += 1
            vals.append(v)
        if all(math.isfinite(v) for v in vals):
            data.append(vals)
        else:
            dropped += 1
    for k, c in enumerate(columns):
        if numeric_seen[k] == 0:
            raise DataError(f"column {c!r} has no numeric values")
    if not data:
        raise DataError(f"{path}: no usable rows in columns {', '.join(columns)}")
    if dropped:
        log.warning("dropped %d row(s) with missing or non-numeric values", dropped)
    return SampleMatrix(np.array(data), columns), dropped


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float) or isinstance(v, np.floating):
        return format(float(v), ".10g")
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float(format(v, ".10g")) if math.isfinite(v) else None
    return v


class _Emitter:
    def __init__(self, fmt, columns=None):
        self.fmt = fmt
        self.columns = columns
        self.buf = io.StringIO()
        if fmt == "csv" and columns:
            self.buf.write(",".join(columns) + "\n")

    def record(self, rec):
        if self.fmt == "json-lines":
            self.buf.write(json.dumps(_jsonable(rec)) + "\n")
        else:
            self.buf.write(",".join(_fmt(rec.get(c)) for c in self.columns) + "\n")

    def write(self, path):
        text = self.buf.getvalue()
        if path in (None, "-"):
            sys.stdout.write(text)
            return
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _cols(text):
    return None if text is None else [c.strip() for c in text.split(",") if c.strip()]


def _splits(values, count):
    """``count`` QuantileSplits from a flat list; a single pair is repeated."""
    if values is None:
        return [QuantileSplit(0.0, 1.0)] * count
    if len(values) == 2:
        values = list(values) * count
    if len(values) != 2 * count:
        raise DomainError(f"--split expects 2 or {2 * count} probabilities, got {len(values)}")
    return [QuantileSplit(values[2 * i], values[2 * i + 1]) for i in range(count)]


def _axis_value(text):
    parts = text.split(":")
    if len(parts) == 1:
        return float(parts[0])
    if len(parts) != 3:
        raise DomainError(f"grid axis {text!r} must be 'value' or 'lo:hi:steps'")
    lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    if steps < 1:
        raise DomainError("grid steps must be >= 1")
    return np.linspace(lo, hi, steps)


def parse_grid(text, statistic="cov"):
    """Parse ``p1=lo:hi:steps,q1=...,p2=...,q2=...`` into a :class:`GridSpec`."""
    axes = {}
    for item in text.split(","):
        if not item.strip():
            continue
        key, _, val = item.partition("=")
        key = key.strip()
        if key not in ("p1", "q1", "p2", "q2") or not val:
            raise DomainError(f"bad grid item {item!r}")
        axes[key] = _axis_value(val.strip())
    missing = {"p1", "q1", "p2", "q2"} - set(axes)
    if missing:
        raise DomainError(f"grid is missing axes: {', '.join(sorted(missing))}")
    return GridSpec(statistic=statistic, **axes)


def _sample(args, ncols=None):
    if not args.input:
        raise DomainError("--input is required")
    sample, _ = ingest_csv(args.input, _cols(args.cols))
    if ncols is not None and sample.d < ncols:
        raise DataError(f"need {ncols} column(s), got {sample.d}")
    return sample if ncols is None else sample.select(range(ncols))


class _Op:
    """Tag exceptions with the library operation that raised them."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, et, exc, tb):
        if exc is not None and isinstance(exc, QCorrError) and not hasattr(exc, "operation"):
            exc.operation = self.name
        return False


def cmd_ccor(args):
    sample = _sample(args, 2)
    sx, sy = _splits(args.split, 2)
    with _Op("cond_moments"):
        res = cond_moments(sample.values[:, 0], sample.values[:, 1], sx, sy,
                           spearman_reranked=args.rerank)
    rec = {"x": sample.column_names[0], "y": sample.column_names[1],
           "p1": sx.p, "q1": sx.q, "p2": sy.p, "q2": sy.q, **res.as_dict()}
    em = _Emitter(args.format, list(rec))
    em.record(rec)
    return em


def cmd_cmatrix(args):
    sample = _sample(args)
    box = QuantileBox(tuple(_splits(args.split, sample.d)))
    with _Op("cond_corr_matrix"):
        mat = cond_corr_matrix(sample, box)
    em = _Emitter(args.format, ["row", "col", "value", "m"])
    for i, a in enumerate(sample.column_names):
        for j, b in enumerate(sample.column_names):
            em.record({"row": a, "col": b, "value": float(mat.entries[i, j]), "m": mat.m})
    return em


def cmd_cacf(args):
    sample = _sample(args, 1)
    sx, sy = _splits(args.split, 2) if args.split and len(args.split) == 4 else _splits(args.split, 1) * 2
    series = Series(sample.values[:, 0])
    with _Op("cond_acf"):
        res = cond_acf(series, args.lags, sx, args.transform, split_y=sy, ranking=args.ranking)
    em = _Emitter(args.format, ["k", "corr", "spearman", "m", "p_hat", "error"])
    for r in res.records:
        em.record({"k": r.k, "corr": r.corr, "spearman": r.spearman, "m": r.m, "p_hat": r.p_hat,
                   "error": r.error})
    if args.pairs_output:
        with _Op("lag_pair_table"):
            t, lag, lead, member = lag_pair_table(series, args.pair_lag, sx, args.transform,
                                                  split_y=sy, ranking=args.ranking)
        pe = _Emitter("csv", ["t", "x_lag", "x", "member"])
        for row in zip(t, lag, lead, member):
            pe.record(dict(zip(pe.columns, row)))
        pe.write(args.pairs_output)
    return em


def _grid_emitter(grid, fmt, extra=None):
    cols = list(GRID_COLUMNS) + (list(extra) if extra else [])
    em = _Emitter(fmt, cols)
    return em


def _emit_grid(em, grid, extra=None):
    for row in grid.rows():
        rec = dict(zip(GRID_COLUMNS, row))
        if not rec["valid"]:
            rec["value"] = None
        if extra:
            rec.update(extra)
        em.record(rec)


def cmd_scan(args):
    sample = _sample(args, 2)
    if not args.grid:
        raise DomainError("--grid is required, e.g. p1=0.1:0.5:5,q1=0.6:0.9:4,p2=0.5,q2=0.8")
    spec = parse_grid(args.grid, args.statistic or "cov")
    with _Op("scan_splits"):
        grid = scan_splits(sample.values[:, 0], sample.values[:, 1], spec)
    em = _grid_emitter(grid, args.format)
    _emit_grid(em, grid)
    cell, value = grid.best()
    log.info("max |%s| = %s at %s (%d valid cells)", grid.statistic, _fmt(value), cell, grid.n_valid)
    return em


def cmd_analytic_demo(args):
    em = _grid_emitter(None, args.format, ["panel"])
    with _Op("analytic_scan"):
        if args.grid:
            _emit_grid(em, analytic_scan(parse_grid(args.grid)), {"panel": "custom"})
        else:
            _emit_grid(em, analytic_scan(x_split_grid(args.steps)), {"panel": "left"})
            _emit_grid(em, analytic_scan(upper_bound_grid(args.steps)), {"panel": "right"})
    with _Op("normal_product_cov"):
        anchor = normal_product_cov((0.5, 0.8), (0.5, 0.8))
    em.record({"p1": 0.5, "q1": 0.8, "p2": 0.5, "q2": 0.8, "value": anchor, "valid": True,
               "m": None, "panel": "anchor"})
    return em


def cmd_mc_test(args):
    kind = args.statistic or "corr"
    if kind not in ("corr", "spearman", "abs_corr"):
        raise DomainError(f"mc-test statistic must be corr, spearman or abs_corr, got {kind!r}")
    if args.pairing == "lag1-series":
        sample = _sample(args, 1)
        sx, sy = _splits(args.split, 2) if args.split and len(args.split) == 4 else _splits(args.split, 1) * 2
        with _Op("cond_acf"):
            rec = cond_acf(Series(sample.values[:, 0]), 1, sx, split_y=sy).records[0]
        if not rec.ok:
            raise DataError(rec.error)
        observed = rec.spearman if kind == "spearman" else rec.corr
        n = sample.n
    else:
        sample = _sample(args, 2)
        sx, sy = _splits(args.split, 2)
        with _Op("cond_moments"):
            res = cond_moments(sample.values[:, 0], sample.values[:, 1], sx, sy)
        observed = res.spearman if kind == "spearman" else res.corr
        n = sample.n
    with _Op("mc_null"):
        dist = mc_null(n, sx, args.replicates, args.seed, kind, args.pairing, split_y=sy,
                       workers=args.workers)
    with _Op("test_statistic"):
        report = test_statistic(observed, dist, args.alpha)
    em = _Emitter(args.format, list(report.as_dict()))
    rec = report.as_dict()
    if args.format == "csv":
        rec["split"] = " ".join(_fmt(v) for v in rec["split"])
    em.record(rec)
    return em


def cmd_simulate(args):
    spec = GeneratorSpec(args.family, args.n, args.seed, d=args.d, rho=args.rho, nu=args.nu, phi=args.phi)
    with _Op("generate"):
        out = generate(spec)
    if isinstance(out, Series):
        names, values = ["x"], out.values[:, None]
    else:
        names, values = list(out.column_names), out.values
    buf = _Emitter("csv", None)
    buf.buf.write(",".join(names) + "\n")
    for row in values:
        buf.buf.write(",".join(repr(float(v)) for v in row) + "\n")
    return buf


def _vector(text):
    return np.array([float(v) for v in text.split(",")])


def cmd_project(args):
    if not args.input:
        raise DomainError("--input is required")
    xs, _ = ingest_csv(args.input, _cols(args.cols))
    if not args.ycols:
        raise DomainError("--ycols is required for project")
    ys, _ = ingest_csv(args.input, _cols(args.ycols))
    if xs.n != ys.n:
        raise DataError("X and Y columns have different usable row counts")
    sx, sy = _splits(args.split, 2)
    if args.direction_x or args.direction_y:
        if not (args.direction_x and args.direction_y):
            raise DomainError("give both --direction-x and --direction-y")
        pairs = [(_vector(args.direction_x), _vector(args.direction_y))]
    else:
        base = RngStream(args.seed, 0)
        ax = random_directions(base.spawn(1), xs.d, args.directions)
        by = random_directions(base.spawn(2), ys.d, args.directions)
        pairs = list(zip(ax, by))
    em = _Emitter(args.format, ["index", "alpha", "beta", "corr", "spearman", "cov", "m"])
    for i, (a, b) in enumerate(pairs):
        with _Op("projection_cond_corr"):
            res = projection_cond_corr(xs, ys, a, b, sx, sy)
        rec = {"index": i, "alpha": list(a), "beta": list(b), "corr": res.corr,
               "spearman": res.spearman, "cov": res.cov, "m": res.m}
        if args.format == "csv":
            rec["alpha"] = " ".join(_fmt(float(v)) for v in a)
            rec["beta"] = " ".join(_fmt(float(v)) for v in b)
        em.record(rec)
    return em


def cmd_recursive(args):
    sample = _sample(args)
    split = _splits(args.split[:2] if args.split else None, 1)[0]
    with _Op("recursive_independence_probe"):
        report = recursive_independence_probe(sample, args.directions, split, args.seed)
    em = _Emitter(args.format, ["level", "max_abs_corr", "corr", "direction"])
    for lvl in report:
        rec = {"level": lvl.level, "max_abs_corr": lvl.max_abs_corr, "corr": lvl.corr,
               "direction": list(lvl.direction)}
        if args.format == "csv":
            rec["direction"] = " ".join(_fmt(float(v)) for v in lvl.direction)
        em.record(rec)
    return em


COMMANDS = {
    "ccor": (cmd_ccor, "conditional moments of two columns on one quantile box"),
    "cmatrix": (cmd_cmatrix, "conditional correlation matrix of several columns"),
    "cacf": (cmd_cacf, "conditional autocorrelation table (and lag-pair dump)"),
    "scan": (cmd_scan, "conditional statistic over a grid of quantile splits"),
    "analytic-demo": (cmd_analytic_demo, "closed-form (X, WX) covariance grids"),
    "mc-test": (cmd_mc_test, "Monte-Carlo calibrated independence test"),
    "simulate": (cmd_simulate, "write a synthetic sample as CSV"),
    "project": (cmd_project, "conditional correlation of linear projections"),
    "recursive": (cmd_recursive, "recursive projection probe over columns"),
}

DEFAULT_FORMAT = {"scan": "csv", "analytic-demo": "csv", "cacf": "csv", "cmatrix": "csv"}


def build_parser():
    parser = argparse.ArgumentParser(prog="qcorr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--input", help="CSV file with a header row")
        p.add_argument("--cols", help="comma-separated column names")
        p.add_argument("--split", type=float, nargs="+", metavar="P",
                       help="quantile splits in the order p1 q1 p2 q2 ...")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output", default="-", help="output path, '-' for stdout")
        p.add_argument("--format", choices=("csv", "json-lines"), default=DEFAULT_FORMAT.get(name, "json-lines"))
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "ccor":
            p.add_argument("--rerank", action="store_true", help="re-rank inside the set for Spearman")
        if name in ("cacf",):
            p.add_argument("--lags", type=int, default=10)
            p.add_argument("--transform", choices=("identity", "absolute", "square"), default="identity")
            p.add_argument("--ranking", choices=("pair", "series"), default="pair")
            p.add_argument("--pairs-output", help="write the lag-pair table with membership flags here")
            p.add_argument("--pair-lag", type=int, default=1)
        if name in ("scan", "analytic-demo"):
            p.add_argument("--grid", help="p1=lo:hi:steps,q1=...,p2=...,q2=...")
        if name == "analytic-demo":
            p.add_argument("--steps", type=int, default=10, help="cells per varying axis")
        if name in ("scan", "mc-test"):
            p.add_argument("--statistic", help="scan: cov|corr|spearman; mc-test: corr|spearman|abs_corr")
        if name == "mc-test":
            p.add_argument("--replicates", type=int, default=100_000)
            p.add_argument("--alpha", type=float, default=0.001)
            p.add_argument("--pairing", choices=("lag1-series", "iid-pairs"), default="lag1-series")
            p.add_argument("--workers", type=int, default=1)
        if name == "simulate":
            p.add_argument("--family", choices=FAMILIES, required=True)
            p.add_argument("--n", type=int, required=True)
            p.add_argument("--d", type=int, default=1)
            p.add_argument("--rho", type=float, default=0.0)
            p.add_argument("--nu", type=float, default=2.0)
            p.add_argument("--phi", type=float, default=0.0)
        if name in ("project", "recursive"):
            p.add_argument("--directions", type=int, default=20)
        if name == "project":
            p.add_argument("--ycols", help="comma-separated columns of the second vector")
            p.add_argument("--direction-x", help="fixed direction for the first vector, e.g. 1,0")
            p.add_argument("--direction-y", help="fixed direction for the second vector")
    return parser


def run(argv=None):
    """Parse ``argv``, run the subcommand and return the exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    handler = COMMANDS[args.command][0]
    try:
        emitter = handler(args)
        emitter.write(args.output)
    except IoError as exc:
        print(f"qcorr {args.command}: I/O error: {exc}", file=sys.stderr)
        return 2
    except (QCorrError, ValueError) as exc:
        op = getattr(exc, "operation", args.command)
        print(f"qcorr {args.command}: {op}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
