import math

import numpy as np
import pytest

from qcorr.errors import DomainError
from qcorr.inference import mc_null, null_quantile
from qcorr.synth import GeneratorSpec, generate
from qcorr.timeseries import Series, cond_acf, lag_pair_table, lag_pairs


def test_lag_pairs():
    a, b = lag_pairs(Series([1, 2, 3, 4]), 1)
    assert a.tolist() == [2, 3, 4] and b.tolist() == [1, 2, 3]
    a, b = lag_pairs([1, 2, 3, 4, 5], 2)
    assert a.tolist() == [3, 4, 5] and b.tolist() == [1, 2, 3]
    a, b = lag_pairs([9, 8, 7, 6], 3)
    assert a.tolist() == [6] and b.tolist() == [9]
    with pytest.raises(DomainError):
        lag_pairs([1, 2, 3], 3)


def test_series_validation():
    with pytest.raises(DomainError):
        Series([1.0])
    with pytest.raises(DomainError):
        Series([1.0, math.inf])


def test_iid_null_band():
    s = generate(GeneratorSpec("iid-normal", 5000, seed=8)).values[:, 0]
    res = cond_acf(s, 10, (0, 1))
    assert np.all(np.abs(res.corr) < 0.05)


def test_trend_is_comonotone():
    res = cond_acf(np.arange(1.0, 101.0), 3, (0, 1))
    assert abs(res.records[0].corr - 1.0) < 1e-12


def test_full_range_matches_classical_pairwise_acf(rng):
    x = rng.normal(size=700).cumsum()
    res = cond_acf(x, 5)
    for r in res.records:
        assert r.corr == pytest.approx(np.corrcoef(x[r.k:], x[:-r.k])[0, 1], abs=1e-13)


def test_student_t_heavy_tails():
    s = generate(GeneratorSpec("student-t", 5000, seed=5, nu=2.0))
    rec = cond_acf(s, 1, (0.01, 0.7)).records[0]
    assert rec.ok and math.isfinite(rec.corr)
    null = mc_null(5000, (0.01, 0.7), M=1000, seed=6, kind="abs_corr")
    assert abs(rec.corr) <= null_quantile(null, 0.999)


def test_monotone_and_affine_invariance(rng):
    x = rng.standard_t(3, size=800)
    base = cond_acf(x, 4, (0.1, 0.8))
    mono = cond_acf(np.arctan(x) * 5 + 1, 4, (0.1, 0.8))
    assert np.array_equal(base.spearman, mono.spearman)
    scaled = cond_acf(4.0 * x, 4, (0.1, 0.8))
    assert np.array_equal(base.corr, scaled.corr)
    shifted = cond_acf(3.7 * x - 12.0, 4, (0.1, 0.8))
    np.testing.assert_allclose(base.corr, shifted.corr, atol=1e-12)


def test_bounded_on_cauchy(rng):
    x = rng.standard_cauchy(size=3000)
    res = cond_acf(x, 20, (0.05, 0.95))
    assert np.all(np.abs(res.corr) <= 1.0)


def test_transforms(rng):
    x = rng.normal(size=400)
    a = cond_acf(x, 2, (0, 1), "absolute")
    b = cond_acf(np.abs(x), 2, (0, 1))
    assert np.array_equal(a.corr, b.corr)
    c = cond_acf(x, 2, (0, 1), "square")
    assert np.array_equal(c.corr, cond_acf(x**2, 2, (0, 1)).corr)
    with pytest.raises(DomainError):
        cond_acf(x, 2, (0, 1), "log")


def test_failed_lags_are_flagged():
    res = cond_acf(np.arange(8.0)[::-1] ** 1.5, 5, (0.8, 1.0))
    assert all(not r.ok for r in res.records)
    assert all(math.isnan(r.corr) for r in res.records)
    assert res.records[0].m <= 2


def test_max_lag_validation():
    with pytest.raises(DomainError):
        cond_acf(np.arange(10.0), 8)


def test_series_ranking_option(rng):
    x = rng.normal(size=500)
    a = cond_acf(x, 3, (0.1, 0.7))
    b = cond_acf(x, 3, (0.1, 0.7), ranking="series")
    assert not np.array_equal(a.corr, b.corr)
    assert np.all(np.abs(b.corr) < 1)


def test_lag_pair_table_membership(rng):
    x = rng.normal(size=312)
    t, lag, lead, member = lag_pair_table(x, 1, (0.01, 0.7))
    rec = cond_acf(x, 1, (0.01, 0.7)).records[0]
    assert member.sum() == rec.m
    assert t[0] == 2 and lead[0] == x[1] and lag[0] == x[0]
    sub = np.corrcoef(lead[member], lag[member])[0, 1]
    assert sub == pytest.approx(rec.corr, abs=1e-12)
