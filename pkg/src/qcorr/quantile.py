"""Quantile splits, ordinal ranks and rank-window membership masks.

A quantile set keeps the rows whose value in every coordinate lies between
the coordinate's ``p``- and ``q``-quantiles.  Empirically this is realised
with rank windows: row ``i`` belongs to the set when, for each coordinate
``j``, ``ceil(n * p_j) <= R_j(i) <= ceil(n * q_j)`` where ``R_j`` are
ordinal ranks (1..n, ties broken by position).  Because only ranks are
used, masks are unchanged by any strictly increasing map of a coordinate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "QuantileSplit",
    "QuantileBox",
    "SampleMatrix",
    "ConditionMask",
    "FULL_RANGE",
    "ordinal_ranks",
    "ordinal_ranks_rows",
    "rank_window",
    "empirical_quantile",
    "membership_mask",
]

# slack absorbing representation error in n*p before taking the ceiling,
# e.g. 10 * 0.7 = 7.000000000000001
_CEIL_SLACK = 1e-9


@dataclass(frozen=True)
class QuantileSplit:
    """Probability interval ``[p, q]`` for one coordinate.

    ``p = 0`` and ``q = 1`` are accepted and mean "no bound", so the split
    ``(0, 1)`` keeps every observation.
    """

    p: float
    q: float

    def __post_init__(self):
        p, q = float(self.p), float(self.q)
        if not (0.0 <= p < q <= 1.0) or math.isnan(p) or math.isnan(q):
            raise DomainError(f"QuantileSplit requires 0 <= p < q <= 1, got p={self.p}, q={self.q}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def is_interior(self):
        return 0.0 < self.p and self.q < 1.0

    @property
    def is_full(self):
        return self.p == 0.0 and self.q == 1.0

    def as_tuple(self):
        return (self.p, self.q)


FULL_RANGE = QuantileSplit(0.0, 1.0)


def _as_split(s):
    if isinstance(s, QuantileSplit):
        return s
    p, q = s
    return QuantileSplit(p, q)


@dataclass(frozen=True)
class QuantileBox:
    """One :class:`QuantileSplit` per coordinate."""

    splits: tuple

    def __post_init__(self):
        splits = tuple(_as_split(s) for s in self.splits)
        if len(splits) < 1:
            raise DomainError("QuantileBox needs at least one split")
        object.__setattr__(self, "splits", splits)

    @classmethod
    def uniform(cls, split, d):
        """The same split repeated over ``d`` coordinates."""
        return cls((_as_split(split),) * d)

    def __len__(self):
        return len(self.splits)

    def __iter__(self):
        return iter(self.splits)


class SampleMatrix:
    """Immutable ``n x d`` matrix of finite observations with column labels."""

    __slots__ = ("values", "column_names")

    def __init__(self, values, column_names: Sequence[str] | None = None):
        arr = np.array(values, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DomainError(f"SampleMatrix needs a non-empty 2-d array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("SampleMatrix entries must be finite")
        if column_names is None:
            column_names = [f"x{j + 1}" for j in range(arr.shape[1])]
        column_names = tuple(str(c) for c in column_names)
        if len(column_names) != arr.shape[1]:
            raise DomainError(
                f"SampleMatrix: {len(column_names)} column names for {arr.shape[1]} columns"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "column_names", column_names)

    def __setattr__(self, name, value):
        raise AttributeError("SampleMatrix is immutable")

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    def column(self, key):
        if isinstance(key, str):
            try:
                key = self.column_names.index(key)
            except ValueError:
                raise DomainError(
                    f"unknown column {key!r}; available: {', '.join(self.column_names)}"
                ) from None
        return self.values[:, key]

    def select(self, keys):
        idx = [self.column_names.index(k) if isinstance(k, str) else int(k) for k in keys]
        return SampleMatrix(self.values[:, idx], [self.column_names[i] for i in idx])

    def __repr__(self):
        return f"SampleMatrix(n={self.n}, d={self.d}, columns={list(self.column_names)})"


@dataclass(frozen=True)
class ConditionMask:
    member: np.ndarray
    m: int
    p_hat: float


def ordinal_ranks(column):
    """Ranks 1..n; equal values are ranked by original position."""
    x = np.asarray(column, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise DomainError("ordinal_ranks: need a non-empty 1-d sequence")
    if not np.all(np.isfinite(x)):
        raise DomainError("ordinal_ranks: values must be finite")
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=np.int64)
    ranks[order] = np.arange(1, x.size + 1, dtype=np.int64)
    return ranks


def ordinal_ranks_rows(values):
    """Row-wise :func:`ordinal_ranks` of a 2-d array (no validation)."""
    values = np.asarray(values, dtype=np.float64)
    b, n = values.shape
    order = np.argsort(values, axis=1, kind="stable")
    ranks = np.empty((b, n), dtype=np.int64)
    np.put_along_axis(ranks, order, np.broadcast_to(np.arange(1, n + 1, dtype=np.int64), (b, n)), axis=1)
    return ranks


def _ceil_np(n, prob):
    return int(math.ceil(n * prob - _CEIL_SLACK))


def rank_window(n, split):
    """Inclusive rank bounds ``(lo, hi)`` selected by ``split`` in a sample of size ``n``.

    ``p = 0`` gives ``lo = 1``.  The window may be empty (``lo > hi``) only
    for very small ``n``.
    """
    split = _as_split(split)
    lo = 1 if split.p == 0.0 else max(1, _ceil_np(n, split.p))
    hi = min(n, _ceil_np(n, split.q))
    return lo, hi


def empirical_quantile(column, p):
    """The ``ceil(n p)``-th order statistic of ``column``."""
    x = np.asarray(column, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise DomainError("empirical_quantile: need a non-empty 1-d sequence")
    if not 0.0 < p <= 1.0:
        raise DomainError(f"empirical_quantile: p must lie in (0, 1], got {p}")
    k = max(1, _ceil_np(x.size, p))
    return float(np.partition(x, k - 1)[k - 1])


def membership_mask(sample, box, ranks=None):
    """Rows of ``sample`` inside the empirical quantile set of ``box``.

    ``ranks`` may pass precomputed per-column ordinal ranks (shape ``n x d``).
    """
    if not isinstance(sample, SampleMatrix):
        sample = SampleMatrix(sample)
    if not isinstance(box, QuantileBox):
        box = QuantileBox(tuple(box))
    if len(box) != sample.d:
        raise DomainError(
            f"membership_mask: box has {len(box)} splits but sample has {sample.d} columns"
        )
    n = sample.n
    member = np.ones(n, dtype=bool)
    for j, split in enumerate(box):
        if split.is_full:
            continue
        r = ranks[:, j] if ranks is not None else ordinal_ranks(sample.values[:, j])
        lo, hi = rank_window(n, split)
        member &= (r >= lo) & (r <= hi)
    m = int(member.sum())
    return ConditionMask(member=member, m=m, p_hat=m / n)
