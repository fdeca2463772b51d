import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from qcorr.errors import DomainError
from qcorr.quantile import (
    QuantileBox, QuantileSplit, SampleMatrix, empirical_quantile, membership_mask, ordinal_ranks,
    rank_window,
)


def test_ordinal_ranks_examples():
    assert ordinal_ranks([3.1, 1.0, 2.5]).tolist() == [3, 1, 2]
    assert ordinal_ranks([5, 5, 1]).tolist() == [2, 3, 1]
    assert ordinal_ranks(np.arange(10.0)).tolist() == list(range(1, 11))
    with pytest.raises(DomainError):
        ordinal_ranks([])


@given(arrays(np.float64, st.integers(1, 60), elements=st.integers(-5, 5).map(float)))
def test_ordinal_ranks_is_stable_permutation(x):
    r = ordinal_ranks(x)
    assert sorted(r.tolist()) == list(range(1, x.size + 1))
    for i in range(x.size):
        for j in range(x.size):
            if x[i] < x[j] or (x[i] == x[j] and i < j):
                assert r[i] < r[j]


def test_empirical_quantile_examples():
    assert empirical_quantile([4, 1, 3, 2], 0.5) == 2
    assert empirical_quantile([7, -1, 9.5, 3], 1.0) == 9.5
    assert empirical_quantile([10, 20, 30], 0.34) == 20
    with pytest.raises(DomainError):
        empirical_quantile([1, 2], 0.0)


def test_split_validation():
    QuantileSplit(0.0, 1.0)
    for p, q in [(0.5, 0.5), (0.6, 0.2), (-0.1, 0.5), (0.2, 1.1)]:
        with pytest.raises(DomainError):
            QuantileSplit(p, q)


def test_mask_examples():
    x = np.array([0.3, 0.9, 0.1, 0.5, 0.7, 0.2, 0.8, 0.4, 0.6, 1.0])
    mask = membership_mask(SampleMatrix(x), QuantileBox([(0.2, 0.7)]))
    ranks = ordinal_ranks(x)
    assert mask.m == 6
    assert set(ranks[mask.member].tolist()) == set(range(2, 8))

    sample = SampleMatrix(np.random.default_rng(0).normal(size=(50, 3)))
    full = membership_mask(sample, QuantileBox.uniform((0, 1), 3))
    assert full.m == 50 and full.p_hat == 1.0

    with pytest.raises(DomainError):
        membership_mask(sample, QuantileBox.uniform((0.1, 0.9), 2))


def test_mask_bivariate_probability(rng):
    u = rng.uniform(size=(1000, 2))
    mask = membership_mask(SampleMatrix(u), QuantileBox.uniform((0.2, 0.8), 2))
    assert abs(mask.p_hat - 0.36) <= 0.06


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.sampled_from([np.exp, np.arctan, lambda v: v**3, lambda v: 2 * v + 7]))
def test_mask_monotone_invariance(seed, transform):
    x = np.random.default_rng(seed).normal(size=(200, 2))
    box = QuantileBox([(0.1, 0.65), (0.3, 0.95)])
    a = membership_mask(SampleMatrix(x), box)
    y = x.copy()
    y[:, 1] = transform(y[:, 1])
    b = membership_mask(SampleMatrix(y), box)
    assert np.array_equal(a.member, b.member)


def test_mask_nesting(rng):
    x = SampleMatrix(rng.normal(size=(500, 2)))
    outer = membership_mask(x, QuantileBox([(0.1, 0.9), (0.2, 0.8)]))
    inner = membership_mask(x, QuantileBox([(0.3, 0.6), (0.25, 0.7)]))
    assert np.all(outer.member[inner.member])


@given(st.integers(1, 500), st.floats(0, 0.98), st.floats(0.01, 1))
def test_marginal_mask_size(n, p, width):
    q = min(1.0, p + width)
    if q <= p:
        return
    lo, hi = rank_window(n, QuantileSplit(p, q))
    m = max(0, hi - lo + 1)
    assert abs(m / n - (q - p)) <= 2 / n


def test_sample_matrix_contract():
    s = SampleMatrix([[1, 2], [3, 4]], ["a", "b"])
    assert s.n == 2 and s.d == 2
    assert s.column("b").tolist() == [2, 4]
    with pytest.raises(AttributeError):
        s.values = None
    with pytest.raises(ValueError):
        s.values[0, 0] = 9
    with pytest.raises(DomainError):
        SampleMatrix([[1, np.nan]])
    with pytest.raises(DomainError):
        s.column("zz")
