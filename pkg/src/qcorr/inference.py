"""Monte-Carlo null calibration, significance tests and quantile-split scans."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .analytic import normal_product_cov
from .condstats import MIN_MEMBERS, VAR_EPS
from .errors import DomainError, EmptyConditionError, InsufficientData
from .quantile import FULL_RANGE, QuantileSplit, _as_split, ordinal_ranks, ordinal_ranks_rows, rank_window
from .special import RngStream, norm_quantile

__all__ = [
    "KINDS",
    "PAIRINGS",
    "NullDistribution",
    "TestReport",
    "GridSpec",
    "ScanGrid",
    "mc_null",
    "null_quantile",
    "test_statistic",
    "scan_splits",
    "analytic_scan",
    "x_split_grid",
    "upper_bound_grid",
]

KINDS = ("corr", "spearman", "abs_corr")
PAIRINGS = ("iid-pairs", "lag1-series")

# stream domain for null replicates, keeps them apart from synth column streams
_NULL_STREAM = 0x6E756C6C
_MAX_ATTEMPTS = 64
CHUNK = 512
_BLOCK_VALUES = 1 << 21


@dataclass(frozen=True)
class NullDistribution:
    values: np.ndarray
    n: int
    split_x: QuantileSplit
    split_y: QuantileSplit
    pairing: str
    seed: int
    kind: str
    marginal: str = "normal"
    redraws: int = 0

    @property
    def M(self):
        return self.values.size


def _statistic(stats, kind):
    """Vectorised statistic from kernel rows; NaN where the replicate is unusable."""
    m = stats[:, kernels.F_M]
    vx, vy = stats[:, kernels.F_VAR_X], stats[:, kernels.F_VAR_Y]
    ok = (m >= MIN_MEMBERS) & (vx > VAR_EPS) & (vy > VAR_EPS)
    with np.errstate(invalid="ignore", divide="ignore"):
        if kind == "spearman":
            r = stats[:, kernels.F_COV_UV] / np.sqrt(stats[:, kernels.F_VAR_U] * stats[:, kernels.F_VAR_V])
        else:
            r = stats[:, kernels.F_COV] / np.sqrt(vx * vy)
    r = np.clip(r, -1.0, 1.0)
    if kind == "abs_corr":
        r = np.abs(r)
    return np.where(ok, r, np.nan)


class _NullJob:
    def __init__(self, n, sx, sy, pairing, kind, marginal, seed):
        self.n, self.pairing, self.kind, self.marginal = n, pairing, kind, marginal
        self.base = RngStream(int(seed), _NULL_STREAM)
        self.width = 2 * n if pairing == "iid-pairs" else n
        m = n if pairing == "iid-pairs" else n - 1
        self.window = (*rank_window(m, sx), *rank_window(m, sy))

    def _draw(self, streams):
        raw = np.stack([s.raw(self.width) for s in streams])
        u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * (2.0 ** -53)
        return u if self.marginal == "uniform" else norm_quantile(u)

    def _evaluate(self, z):
        if self.pairing == "iid-pairs":
            x, y = z[:, : self.n], z[:, self.n:]
        else:
            x, y = z[:, 1:], z[:, :-1]
        x = np.ascontiguousarray(x)
        y = np.ascontiguousarray(y)
        stats = kernels.batch_window_stats(x, y, ordinal_ranks_rows(x), ordinal_ranks_rows(y), *self.window)
        return _statistic(stats, self.kind)

    def run(self, start, stop):
        # sub-blocks bound memory to about _BLOCK_VALUES doubles per array
        block = max(1, _BLOCK_VALUES // self.width)
        out = np.concatenate([
            self._evaluate(self._draw([self.base.spawn(r) for r in range(b, min(b + block, stop))]))
            for b in range(start, stop, block)
        ])
        redraws = 0
        for i in np.flatnonzero(np.isnan(out)):
            rep = self.base.spawn(start + int(i))
            for attempt in range(1, _MAX_ATTEMPTS + 1):
                redraws += 1
                val = self._evaluate(self._draw([rep.spawn(attempt)]))[0]
                if not np.isnan(val):
                    out[i] = val
                    break
            else:
                raise InsufficientData(
                    f"mc_null: replicate {start + int(i)} stayed degenerate after {_MAX_ATTEMPTS} redraws"
                )
        return out, redraws


def mc_null(n, split=FULL_RANGE, M=10_000, seed=0, kind="corr", pairing="lag1-series", *,
            split_y=None, marginal="normal", workers=1):
    """Null distribution of the conditional correlation under independence.

    Each replicate draws i.i.d. standard normal data (uniform if
    ``marginal="uniform"``) from its own stream ``(seed, replicate)``:
    ``2n`` values split into an ``(x, y)`` pair sample for ``iid-pairs``, or
    a length-``n`` series paired at lag 1 for ``lag1-series``.  Replicates
    whose set is too small or degenerate are redrawn from a child stream;
    the call fails if more than 10% of replicates needed a redraw.

    Work is cut into fixed-size chunks independent of ``workers``, so the
    result is bit-identical for any number of workers.
    """
    if kind not in KINDS:
        raise DomainError(f"unknown statistic kind {kind!r}; choose from {', '.join(KINDS)}")
    if pairing not in PAIRINGS:
        raise DomainError(f"unknown pairing {pairing!r}; choose from {', '.join(PAIRINGS)}")
    if marginal not in ("normal", "uniform"):
        raise DomainError(f"marginal must be 'normal' or 'uniform', got {marginal!r}")
    n, M = int(n), int(M)
    if n < 10:
        raise DomainError(f"mc_null: n must be >= 10, got {n}")
    if M < 100:
        raise DomainError(f"mc_null: M must be >= 100, got {M}")
    sx = _as_split(split)
    sy = sx if split_y is None else _as_split(split_y)
    job = _NullJob(n, sx, sy, pairing, kind, marginal, seed)
    lo_x, hi_x, lo_y, hi_y = job.window
    if min(hi_x - lo_x, hi_y - lo_y) + 1 < MIN_MEMBERS:
        raise InsufficientData(f"mc_null: split admits fewer than {MIN_MEMBERS} ranks at n={n}")

    bounds = [(s, min(s + CHUNK, M)) for s in range(0, M, CHUNK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            parts = list(pool.map(lambda b: job.run(*b), bounds))
    else:
        parts = [job.run(*b) for b in bounds]
    values = np.sort(np.concatenate([p[0] for p in parts]))
    redraws = sum(p[1] for p in parts)
    if redraws > 0.1 * M:
        raise InsufficientData(f"mc_null: {redraws} redraws for {M} replicates exceeds 10%")
    values.setflags(write=False)
    return NullDistribution(values, n, sx, sy, pairing, int(seed), kind, marginal, redraws)


def null_quantile(dist, level):
    """Order statistic ``ceil(M * level)`` of the sorted replicates."""
    if not 0.0 < level < 1.0:
        raise DomainError(f"null_quantile: level must lie in (0, 1), got {level}")
    M = dist.values.size
    idx = min(M, max(1, math.ceil(M * level - 1e-9)))
    return float(dist.values[idx - 1])


@dataclass(frozen=True)
class TestReport:
    __test__ = False  # not a pytest class

    observed: float
    threshold: float
    alpha: float
    decision: str
    statistic: str
    provenance: dict = field(default_factory=dict)

    @property
    def reject(self):
        return self.decision == "reject"

    def as_dict(self):
        return {
            "observed": self.observed,
            "threshold": self.threshold,
            "alpha": self.alpha,
            "decision": self.decision,
            "statistic": self.statistic,
            **self.provenance,
        }


def test_statistic(observed, dist, alpha=0.001):
    """One-sided upper-tail test of ``observed`` against the null's ``1 - alpha`` quantile.

    For an ``abs_corr`` null the comparison uses ``|observed|``, which gives
    the two-sided variant.  Rejection needs strict exceedance.
    """
    if not 0.0 < alpha <= 0.5:
        raise DomainError(f"alpha must lie in (0, 0.5], got {alpha}")
    threshold = null_quantile(dist, 1.0 - alpha)
    obs = abs(observed) if dist.kind == "abs_corr" else float(observed)
    provenance = {
        "seed": dist.seed,
        "M": dist.M,
        "n": dist.n,
        "split": [dist.split_x.p, dist.split_x.q, dist.split_y.p, dist.split_y.q],
        "pairing": dist.pairing,
        "redraws": dist.redraws,
    }
    return TestReport(
        observed=float(observed),
        threshold=threshold,
        alpha=float(alpha),
        decision="reject" if obs > threshold else "fail-to-reject",
        statistic=dist.kind,
        provenance=provenance,
    )


test_statistic.__test__ = False  # keep pytest from collecting it

AXES = ("p1", "q1", "p2", "q2")


def _axis(v):
    a = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if a.ndim != 1 or a.size == 0:
        raise DomainError("grid axis must be a scalar or a non-empty 1-d sequence")
    return a


@dataclass(frozen=True)
class GridSpec:
    """Cartesian grid over ``(p1, q1, p2, q2)``; each entry is a value or a sequence."""

    p1: object
    q1: object
    p2: object
    q2: object
    statistic: str = "cov"

    def axes(self):
        return tuple(_axis(getattr(self, a)) for a in AXES)

    @property
    def shape(self):
        return tuple(a.size for a in self.axes())

    @property
    def varying(self):
        return tuple(name for name, a in zip(AXES, self.axes()) if a.size > 1)

    def cells(self):
        """``(index, (p1, q1, p2, q2))`` in C order."""
        axes = self.axes()
        for idx in itertools.product(*(range(a.size) for a in axes)):
            yield idx, tuple(float(a[i]) for a, i in zip(axes, idx))


@dataclass(frozen=True)
class ScanGrid:
    spec: GridSpec
    values: np.ndarray
    valid: np.ndarray
    m: np.ndarray | None
    statistic: str

    @property
    def matrix(self):
        """``values`` with the fixed axes squeezed out."""
        return np.squeeze(self.values)

    @property
    def n_valid(self):
        return int(self.valid.sum())

    def best(self):
        """``((p1, q1, p2, q2), value)`` of the valid cell with the largest ``|value|``."""
        if not self.valid.any():
            return None, math.nan
        flat = np.where(self.valid, np.abs(self.values), -np.inf)
        idx = np.unravel_index(int(np.argmax(flat)), flat.shape)
        axes = self.spec.axes()
        return tuple(float(a[i]) for a, i in zip(axes, idx)), float(self.values[idx])

    @property
    def max_abs(self):
        return abs(self.best()[1])

    def rows(self):
        for idx, cell in self.spec.cells():
            yield (*cell, float(self.values[idx]), bool(self.valid[idx]),
                   None if self.m is None else int(self.m[idx]))


def _cell_ok(p, q, interior=False):
    if interior:
        return 0.0 < p < q < 1.0
    return 0.0 <= p < q <= 1.0


def scan_splits(x, y, spec):
    """Fill ``spec`` with the conditional statistic of ``(x, y)`` on every valid cell.

    Ranks are computed once; each cell is a rank-window pass of the kernel.
    Cells with ``p >= q`` on an axis, fewer than 3 members or a degenerate
    variance are marked invalid and hold NaN.
    """
    if spec.statistic not in ("cov", "corr", "spearman"):
        raise DomainError(f"unknown scan statistic {spec.statistic!r}")
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise DomainError("scan_splits: x and y must be 1-d of equal length")
    n = x.size
    rx, ry = ordinal_ranks(x), ordinal_ranks(y)
    shape = spec.shape
    values = np.full(shape, np.nan)
    valid = np.zeros(shape, dtype=bool)
    m = np.zeros(shape, dtype=np.int64)
    idxs, windows = [], []
    for idx, (p1, q1, p2, q2) in spec.cells():
        if _cell_ok(p1, q1) and _cell_ok(p2, q2):
            idxs.append(idx)
            windows.append((*rank_window(n, (p1, q1)), *rank_window(n, (p2, q2))))
    if windows:
        stats = kernels.window_stats(x, y, rx, ry, np.array(windows, dtype=np.int64))
        if spec.statistic == "cov":
            mm = stats[:, kernels.F_M]
            ok = (mm >= MIN_MEMBERS) & (stats[:, kernels.F_VAR_X] > VAR_EPS) & (stats[:, kernels.F_VAR_Y] > VAR_EPS)
            vals = np.where(ok, stats[:, kernels.F_COV], np.nan)
        else:
            vals = _statistic(stats, "spearman" if spec.statistic == "spearman" else "corr")
        for idx, row, v in zip(idxs, stats, vals):
            m[idx] = int(row[kernels.F_M])
            if not np.isnan(v):
                values[idx] = v
                valid[idx] = True
    return ScanGrid(spec, values, valid, m, spec.statistic)


def analytic_scan(spec):
    """Closed-form covariance of ``(X, WX)`` on every strictly interior cell of ``spec``."""
    shape = spec.shape
    values = np.full(shape, np.nan)
    valid = np.zeros(shape, dtype=bool)
    for idx, (p1, q1, p2, q2) in spec.cells():
        if not (_cell_ok(p1, q1, interior=True) and _cell_ok(p2, q2, interior=True)):
            continue
        try:
            values[idx] = normal_product_cov((p1, q1), (p2, q2))
        except EmptyConditionError:
            continue
        valid[idx] = True
    return ScanGrid(spec, values, valid, None, "cov")


def _open_grid(lo, hi, steps):
    return lo + (hi - lo) * (np.arange(steps) + 0.5) / steps


def x_split_grid(steps=10):
    """``p1, q1`` over midpoints of (0.2, 0.8); ``p2 = 0.5``, ``q2 = 0.8``."""
    g = _open_grid(0.2, 0.8, steps)
    return GridSpec(p1=g, q1=g, p2=0.5, q2=0.8, statistic="cov")


def upper_bound_grid(steps=10):
    """``p1 = p2 = 0.2``; ``q1, q2`` over midpoints of (0.2, 1.0)."""
    g = _open_grid(0.2, 1.0, steps)
    return GridSpec(p1=0.2, q1=g, p2=0.2, q2=g, statistic="cov")
