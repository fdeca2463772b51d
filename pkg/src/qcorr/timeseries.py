"""Conditional autocorrelation of a series on quantile sets of its lagged pairs."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .condstats import MIN_MEMBERS, moments_from_stats
from .errors import DegenerateVariance, DomainError, InsufficientData
from .quantile import FULL_RANGE, QuantileSplit, _as_split, ordinal_ranks, rank_window

__all__ = [
    "Series",
    "AcfRecord",
    "CondAcfResult",
    "TRANSFORMS",
    "lag_pairs",
    "cond_acf",
    "lag_pair_table",
]

TRANSFORMS = {
    "identity": lambda v: v,
    "absolute": np.abs,
    "square": np.square,
}


class Series:
    """Ordered finite observations, optionally with timestamp labels."""

    __slots__ = ("values", "timestamps")

    def __init__(self, values, timestamps=None):
        arr = np.array(values, dtype=np.float64).ravel()
        if arr.size < 2:
            raise DomainError(f"Series needs at least 2 observations, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("Series values must be finite")
        if timestamps is not None and len(timestamps) != arr.size:
            raise DomainError("timestamps length does not match values")
        arr.setflags(write=False)
        self.values = arr
        self.timestamps = None if timestamps is None else tuple(timestamps)

    @property
    def n(self):
        return self.values.size

    def __len__(self):
        return self.values.size


def _values(series):
    return series.values if isinstance(series, Series) else Series(series).values


def lag_pairs(series, k):
    """``(x[k:], x[:-k])``: the lag-``k`` leading and lagging sub-samples."""
    x = _values(series)
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise DomainError(f"lag must be a positive integer, got {k!r}")
    if k >= x.size:
        raise DomainError(f"lag {k} must be smaller than the series length {x.size}")
    return x[k:], x[: x.size - k]


@dataclass(frozen=True)
class AcfRecord:
    k: int
    corr: float
    spearman: float
    m: int
    p_hat: float
    error: str | None = None

    @property
    def ok(self):
        return self.error is None


@dataclass(frozen=True)
class CondAcfResult:
    records: tuple
    max_lag: int
    split_x: QuantileSplit
    split_y: QuantileSplit
    transform: str

    @property
    def corr(self):
        return np.array([r.corr for r in self.records])

    @property
    def spearman(self):
        return np.array([r.spearman for r in self.records])


def _lag_windows(x, k, split_x, split_y, ranking):
    lead, lag = lag_pairs(x, k)
    m = lead.size
    if ranking == "pair":
        r_lead, r_lag = ordinal_ranks(lead), ordinal_ranks(lag)
        n_rank = m
    else:
        # ranks within the whole series, windows sized by the series length
        r_all = ordinal_ranks(x)
        r_lead, r_lag = r_all[k:], r_all[: x.size - k]
        n_rank = x.size
    window = np.array([[*rank_window(n_rank, split_x), *rank_window(n_rank, split_y)]], dtype=np.int64)
    return lead, lag, r_lead, r_lag, window


def cond_acf(series, max_lag, split=FULL_RANGE, transform="identity", *, split_y=None, ranking="pair"):
    """Conditional correlation between ``x[t]`` and ``x[t-k]`` for ``k = 1..max_lag``.

    ``transform`` ("identity", "absolute" or "square") is applied before
    ranking.  ``ranking="pair"`` ranks each lagged sub-sample separately;
    ``ranking="series"`` reuses the ranks of the whole series.  Lags whose
    set is too small or degenerate are returned with ``error`` set and NaN
    statistics instead of failing the call.
    """
    if transform not in TRANSFORMS:
        raise DomainError(f"unknown transform {transform!r}; choose from {sorted(TRANSFORMS)}")
    if ranking not in ("pair", "series"):
        raise DomainError(f"ranking must be 'pair' or 'series', got {ranking!r}")
    x = TRANSFORMS[transform](_values(series))
    n = x.size
    if not isinstance(max_lag, (int, np.integer)) or max_lag < 1 or max_lag >= n - 2:
        raise DomainError(f"max_lag must satisfy 1 <= max_lag < n - 2 = {n - 2}, got {max_lag!r}")
    split_x = _as_split(split)
    split_y = split_x if split_y is None else _as_split(split_y)
    records = []
    for k in range(1, int(max_lag) + 1):
        lead, lag, r_lead, r_lag, window = _lag_windows(x, k, split_x, split_y, ranking)
        row = kernels.window_stats(lead, lag, r_lead, r_lag, window)[0]
        try:
            cm = moments_from_stats(row, lead.size)
        except (InsufficientData, DegenerateVariance) as exc:
            m = int(row[kernels.F_M])
            records.append(AcfRecord(k, math.nan, math.nan, m, m / lead.size, error=str(exc)))
        else:
            records.append(AcfRecord(k, cm.corr, cm.spearman, cm.m, cm.p_hat))
    return CondAcfResult(tuple(records), int(max_lag), split_x, split_y, transform)


def lag_pair_table(series, k=1, split=FULL_RANGE, transform="identity", *, split_y=None, ranking="pair"):
    """Rows ``(t, x[t-k], x[t], member)`` for a lag plot with the conditioning set marked."""
    x = TRANSFORMS[transform](_values(series))
    split_x = _as_split(split)
    split_y = split_x if split_y is None else _as_split(split_y)
    lead, lag, r_lead, r_lag, w = _lag_windows(x, k, split_x, split_y, ranking)
    lo_x, hi_x, lo_y, hi_y = w[0]
    member = (r_lead >= lo_x) & (r_lead <= hi_x) & (r_lag >= lo_y) & (r_lag <= hi_y)
    t = np.arange(k + 1, x.size + 1)
    return t, lag, lead, member
