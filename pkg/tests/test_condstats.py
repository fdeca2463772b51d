import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcorr.condstats import (
    cond_corr_matrix, cond_moments, projection_cond_corr, recursive_independence_probe,
)
from qcorr.errors import DegenerateVariance, DomainError, InsufficientData
from qcorr.quantile import FULL_RANGE, QuantileBox, SampleMatrix
from qcorr.synth import GeneratorSpec, generate


def test_identity_pair():
    r = cond_moments([1, 2, 3], [1, 2, 3], FULL_RANGE, FULL_RANGE)
    assert r.cov == pytest.approx(2 / 3, abs=1e-15)
    assert r.corr == 1.0 and r.spearman == 1.0 and r.m == 3 and r.p_hat == 1.0


def test_antithetic_pair():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    r = cond_moments(x, -x)
    assert r.corr == -1.0 and r.spearman == -1.0


def test_example_one_simulation():
    s = generate(GeneratorSpec("rademacher-product", 200_000, seed=1))
    r = cond_moments(s.values[:, 0], s.values[:, 1], (0.5, 0.8), (0.5, 0.8))
    assert abs(r.cov - 0.0573) < 0.01


def test_errors():
    with pytest.raises(InsufficientData):
        cond_moments([1, 2], [3, 4])
    with pytest.raises(InsufficientData):
        cond_moments(np.arange(10.0), np.arange(10.0), (0.1, 0.2))
    with pytest.raises(DegenerateVariance):
        cond_moments([1.0, 1.0, 1.0, 1.0], [1.0, 2.0, 3.0, 4.0])
    with pytest.raises(DomainError):
        cond_moments([1, 2, 3], [1, 2])


def test_symmetry_in_arguments(rng):
    x, y = rng.normal(size=500), rng.normal(size=500) + 0.3 * np.arange(500) / 500
    a = cond_moments(x, y, (0.1, 0.7), (0.3, 0.9))
    b = cond_moments(y, x, (0.3, 0.9), (0.1, 0.7))
    assert a.cov == b.cov and a.m == b.m


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2.0, 4.0, 0.5, 1024.0]), st.floats(-1e3, 1e3))
def test_affine_equivariance(seed, a, b):
    r = np.random.default_rng(seed)
    x, y = r.normal(size=300), r.normal(size=300)
    base = cond_moments(x, y, (0.2, 0.8), (0.1, 0.9))
    # power-of-two scale and no shift: every operation is exact
    scaled = cond_moments(a * x, y, (0.2, 0.8), (0.1, 0.9))
    assert scaled.corr == base.corr and scaled.spearman == base.spearman and scaled.m == base.m
    assert scaled.cov == a * base.cov
    # arbitrary shift: identical mask and ranks, moments equal to rounding
    shifted = cond_moments(a * x + b, y, (0.2, 0.8), (0.1, 0.9))
    assert shifted.spearman == base.spearman and shifted.m == base.m
    assert shifted.corr == pytest.approx(base.corr, abs=1e-9)
    assert shifted.cov == pytest.approx(a * base.cov, rel=1e-9, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_spearman_monotone_invariance(seed):
    r = np.random.default_rng(seed)
    x, y = r.normal(size=300), r.normal(size=300)
    a = cond_moments(x, y, (0.05, 0.6), (0.2, 0.95))
    b = cond_moments(np.exp(x), y**3, (0.05, 0.6), (0.2, 0.95))
    assert a.spearman == b.spearman and a.m == b.m


def test_full_range_is_pearson(rng):
    x = rng.normal(size=1000)
    y = 0.4 * x + rng.normal(size=1000)
    r = cond_moments(x, y)
    assert r.corr == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 0.6), st.floats(0.2, 0.4))
def test_correlations_bounded(seed, p, w):
    r = np.random.default_rng(seed)
    x = r.standard_cauchy(size=200)
    y = x + r.standard_cauchy(size=200) * 1e-3
    res = cond_moments(x, y, (p, p + w), (p, p + w))
    assert abs(res.corr) <= 1.0 + 1e-12 and abs(res.spearman) <= 1.0 + 1e-12


def test_reranked_spearman_option(rng):
    x = rng.normal(size=2000)
    y = x + rng.normal(size=2000)
    a = cond_moments(x, y, (0.2, 0.8), spearman_reranked=True)
    b = cond_moments(x, y, (0.2, 0.8))
    assert a.corr == b.corr
    assert -1 <= a.spearman <= 1 and a.spearman != b.spearman


def test_consistency_under_independence():
    hits = 0
    for seed in range(20):
        s = generate(GeneratorSpec("gaussian-pair", 100_000, seed=seed, rho=0.0))
        hits += abs(cond_moments(s.values[:, 0], s.values[:, 1], (0.2, 0.8)).corr) < 0.02
    assert hits >= 19


def test_cond_corr_matrix_null():
    s = generate(GeneratorSpec("iid-normal", 50_000, seed=3, d=3))
    mat = cond_corr_matrix(s, QuantileBox.uniform((0.1, 0.9), 3))
    off = mat.entries[~np.eye(3, dtype=bool)]
    assert np.all(np.abs(off) < 0.03)
    assert np.array_equal(np.diag(mat.entries), np.ones(3))


def test_cond_corr_matrix_comonotone_and_symmetric(rng):
    x = rng.normal(size=500)
    mat = cond_corr_matrix(SampleMatrix(np.column_stack([x, x])), QuantileBox.uniform((0.3, 0.7), 2))
    assert mat.entries[0, 1] == pytest.approx(1.0, abs=1e-15)
    z = rng.normal(size=(400, 4)) @ rng.normal(size=(4, 4))
    mat = cond_corr_matrix(SampleMatrix(z), QuantileBox([(0.1, 0.9), (0, 1), (0.2, 1), (0, 0.8)]))
    assert np.array_equal(mat.entries, mat.entries.T)


def test_cond_corr_matrix_errors(rng):
    z = SampleMatrix(rng.normal(size=(30, 3)))
    with pytest.raises(InsufficientData):
        cond_corr_matrix(z, QuantileBox.uniform((0.45, 0.5), 3))
    const = SampleMatrix(np.column_stack([rng.normal(size=30), np.ones(30)]))
    with pytest.raises(DegenerateVariance) as info:
        cond_corr_matrix(const, QuantileBox.uniform((0, 1), 2))
    assert info.value.column == 1
    with pytest.raises(DomainError):
        cond_corr_matrix(SampleMatrix(rng.normal(size=(30, 1))), QuantileBox.uniform((0, 1), 1))


def test_projection_reductions(rng):
    xs, ys = rng.normal(size=(1000, 2)), rng.normal(size=(1000, 3))
    ys[:, 0] += xs[:, 0]
    a = projection_cond_corr(xs, ys, [1, 0], [1, 0, 0], (0.2, 0.8), (0.1, 0.9))
    b = cond_moments(xs[:, 0], ys[:, 0], (0.2, 0.8), (0.1, 0.9))
    assert a == b
    alpha = np.array([0.3, -0.7])
    c = projection_cond_corr(xs, ys, alpha, [0.1, 1, 2], (0.2, 0.8))
    d = projection_cond_corr(xs, ys, 2 * alpha, [0.1, 1, 2], (0.2, 0.8))
    assert c.corr == d.corr and c.spearman == d.spearman
    with pytest.raises(DomainError):
        projection_cond_corr(xs, ys, [0, 0], [1, 0, 0])
    with pytest.raises(DomainError):
        projection_cond_corr(xs, ys[:10], [1, 0], [1, 0, 0])


def test_projection_null_random_directions():
    xs = generate(GeneratorSpec("iid-normal", 50_000, seed=10, d=2))
    ys = generate(GeneratorSpec("iid-normal", 50_000, seed=11, d=2))
    dirs = np.random.default_rng(5).normal(size=(20, 4))
    worst = max(abs(projection_cond_corr(xs, ys, d[:2], d[2:], (0.2, 0.8)).corr) for d in dirs)
    assert worst < 0.04


def test_recursive_probe():
    s = generate(GeneratorSpec("iid-normal", 50_000, seed=21, d=3))
    rep = recursive_independence_probe(s, 10, (0.1, 0.9), seed=4)
    assert [lvl.level for lvl in rep] == [1, 2]
    assert all(lvl.max_abs_corr < 0.04 for lvl in rep)
    again = recursive_independence_probe(s, 10, (0.1, 0.9), seed=4)
    for a, b in zip(rep, again):
        assert a.max_abs_corr == b.max_abs_corr and np.array_equal(a.direction, b.direction)
    for lvl in rep:
        assert np.linalg.norm(lvl.direction) == pytest.approx(1.0, abs=1e-12)


def test_recursive_probe_comonotone(rng):
    x = rng.normal(size=2000)
    rep = recursive_independence_probe(SampleMatrix(np.column_stack([x, x])), 3, (0.1, 0.9), seed=0)
    assert rep[0].max_abs_corr > 0.9
