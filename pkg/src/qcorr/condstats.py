"""Conditional moments and correlations on empirical quantile sets."""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from . import kernels
from .errors import DegenerateVariance, DomainError, InsufficientData
from .quantile import (
    FULL_RANGE,
    QuantileBox,
    QuantileSplit,
    SampleMatrix,
    _as_split,
    membership_mask,
    ordinal_ranks,
    rank_window,
)
from .special import RngStream, standard_normal_sample

__all__ = [
    "CondMoments",
    "CondCorrMatrix",
    "ProbeLevel",
    "cond_moments",
    "moments_from_stats",
    "cond_corr_matrix",
    "projection_cond_corr",
    "recursive_independence_probe",
    "random_directions",
]

VAR_EPS = 1e-24
MIN_MEMBERS = 3


@dataclass(frozen=True)
class CondMoments:
    mean_x: float
    mean_y: float
    var_x: float
    var_y: float
    cov: float
    corr: float
    spearman: float
    m: int
    p_hat: float

    def as_dict(self):
        return asdict(self)


def _clip_unit(r):
    # Cauchy-Schwarz holds exactly; only rounding can push |r| past 1
    return min(1.0, max(-1.0, r))


def moments_from_stats(row, n):
    """Build :class:`CondMoments` from one kernel output row.

    Raises :class:`InsufficientData` or :class:`DegenerateVariance` as
    :func:`cond_moments` does.
    """
    m = int(row[kernels.F_M])
    if m < MIN_MEMBERS:
        raise InsufficientData(f"conditioning set has {m} member(s); need at least {MIN_MEMBERS}")
    var_x, var_y = float(row[kernels.F_VAR_X]), float(row[kernels.F_VAR_Y])
    if var_x <= VAR_EPS:
        raise DegenerateVariance("x has zero variance on the conditioning set", column=0)
    if var_y <= VAR_EPS:
        raise DegenerateVariance("y has zero variance on the conditioning set", column=1)
    cov = float(row[kernels.F_COV])
    corr = _clip_unit(cov / math.sqrt(var_x * var_y))
    vu, vv = float(row[kernels.F_VAR_U]), float(row[kernels.F_VAR_V])
    spearman = _clip_unit(float(row[kernels.F_COV_UV]) / math.sqrt(vu * vv))
    return CondMoments(
        mean_x=float(row[kernels.F_MEAN_X]),
        mean_y=float(row[kernels.F_MEAN_Y]),
        var_x=var_x,
        var_y=var_y,
        cov=cov,
        corr=corr,
        spearman=spearman,
        m=m,
        p_hat=m / n,
    )


def _check_pair(x, y):
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise DomainError(f"x and y must be 1-d of equal length, got {x.shape} and {y.shape}")
    if x.size < MIN_MEMBERS:
        raise InsufficientData(f"need at least {MIN_MEMBERS} observations, got {x.size}")
    return x, y


def _pearson(a, b):
    da = a - a.mean()
    db = b - b.mean()
    va, vb = float(np.mean(da * da)), float(np.mean(db * db))
    if va <= VAR_EPS or vb <= VAR_EPS:
        raise DegenerateVariance("pseudo-observations have zero variance on the conditioning set")
    return _clip_unit(float(np.mean(da * db)) / math.sqrt(va * vb))


def cond_moments(x, y, split_x=FULL_RANGE, split_y=None, *, spearman_reranked=False):
    """Plug-in (divide-by-m) moments of ``(x, y)`` on the quantile set of the two splits.

    ``split_y`` defaults to ``split_x``.  The conditional Spearman coefficient
    is the Pearson correlation of the global pseudo-observations
    ``R/(n+1)`` of the members; pass ``spearman_reranked=True`` to re-rank
    inside the set instead.
    """
    x, y = _check_pair(x, y)
    split_x = _as_split(split_x)
    split_y = split_x if split_y is None else _as_split(split_y)
    n = x.size
    rx, ry = ordinal_ranks(x), ordinal_ranks(y)
    window = np.array([[*rank_window(n, split_x), *rank_window(n, split_y)]], dtype=np.int64)
    row = kernels.window_stats(x, y, rx, ry, window)[0]
    res = moments_from_stats(row, n)
    if spearman_reranked:
        member = (rx >= window[0, 0]) & (rx <= window[0, 1]) & (ry >= window[0, 2]) & (ry <= window[0, 3])
        sp = _pearson(ordinal_ranks(x[member]).astype(float), ordinal_ranks(y[member]).astype(float))
        res = CondMoments(**{**res.as_dict(), "spearman": sp})
    return res


@dataclass(frozen=True)
class CondCorrMatrix:
    entries: np.ndarray
    box: QuantileBox
    m: int


def cond_corr_matrix(sample, box):
    """Correlation matrix of all columns on the joint quantile set of ``box``."""
    if not isinstance(sample, SampleMatrix):
        sample = SampleMatrix(sample)
    if not isinstance(box, QuantileBox):
        box = QuantileBox(tuple(box))
    d = sample.d
    if d < 2:
        raise DomainError("cond_corr_matrix needs at least two columns")
    mask = membership_mask(sample, box)
    if mask.m < d + 1:
        raise InsufficientData(f"conditioning set has {mask.m} member(s); need at least {d + 1}")
    members = sample.values[mask.member]
    centred = members - members.mean(axis=0)
    var = np.einsum("ij,ij->j", centred, centred) / mask.m
    for j in range(d):
        if var[j] <= VAR_EPS:
            raise DegenerateVariance(
                f"column {j} ({sample.column_names[j]}) has zero variance on the conditioning set",
                column=j,
            )
    entries = np.eye(d)
    for i in range(d):
        for j in range(i + 1, d):
            c = float(np.dot(centred[:, i], centred[:, j])) / mask.m
            entries[i, j] = entries[j, i] = _clip_unit(c / math.sqrt(var[i] * var[j]))
    entries.setflags(write=False)
    return CondCorrMatrix(entries=entries, box=box, m=mask.m)


def _as_matrix(a):
    return a.values if isinstance(a, SampleMatrix) else np.atleast_2d(np.asarray(a, dtype=np.float64).T).T


def projection_cond_corr(xs, ys, alpha, beta, split_x=FULL_RANGE, split_y=None, **kw):
    """:func:`cond_moments` of the projections ``<x_i, alpha>`` and ``<y_i, beta>``."""
    X, Y = _as_matrix(xs), _as_matrix(ys)
    alpha = np.asarray(alpha, dtype=np.float64).ravel()
    beta = np.asarray(beta, dtype=np.float64).ravel()
    if X.shape[0] != Y.shape[0]:
        raise DomainError(f"row counts differ: {X.shape[0]} vs {Y.shape[0]}")
    if alpha.size != X.shape[1] or beta.size != Y.shape[1]:
        raise DomainError("direction length does not match the number of columns")
    if not np.any(alpha) or not np.any(beta):
        raise DomainError("projection directions must be nonzero")
    return cond_moments(X @ alpha, Y @ beta, split_x, split_y, **kw)


def random_directions(stream, k, count):
    """``count`` directions uniform on the unit sphere of R^k (rows)."""
    z = standard_normal_sample(stream, k * count).reshape(count, k)
    return z / np.linalg.norm(z, axis=1, keepdims=True)


@dataclass(frozen=True)
class ProbeLevel:
    level: int
    max_abs_corr: float
    direction: np.ndarray
    corr: float


def recursive_independence_probe(sample, directions_per_level, split, seed=0):
    """Probe column ``k+1`` against random projections of columns ``1..k``.

    For every level ``k = 1..d-1`` draws ``directions_per_level`` seeded unit
    directions on the k-sphere and reports the largest absolute conditional
    correlation found, with the direction attaining it.
    """
    if not isinstance(sample, SampleMatrix):
        sample = SampleMatrix(sample)
    if sample.d < 2:
        raise DomainError("recursive_independence_probe needs at least two columns")
    if directions_per_level < 1:
        raise DomainError("directions_per_level must be >= 1")
    split = _as_split(split)
    base = RngStream(int(seed), 0)
    report = []
    for k in range(1, sample.d):
        dirs = random_directions(base.spawn(k), k, directions_per_level)
        head = sample.values[:, :k]
        target = sample.values[:, k]
        best = None
        for alpha in dirs:
            r = cond_moments(target, head @ alpha, split, split).corr
            if best is None or abs(r) > abs(best[1]):
                best = (alpha, r)
        report.append(ProbeLevel(level=k, max_abs_corr=abs(best[1]), direction=best[0], corr=best[1]))
    return report
