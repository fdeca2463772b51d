"""Both kernel backends against a direct masked computation."""
import numpy as np
import pytest

from qcorr import _kernels_py, kernels
from qcorr.quantile import ordinal_ranks, ordinal_ranks_rows


def _reference(x, y, rx, ry, w):
    lo_x, hi_x, lo_y, hi_y = w
    mask = (rx >= lo_x) & (rx <= hi_x) & (ry >= lo_y) & (ry <= hi_y)
    u, v = rx / (x.size + 1.0), ry / (x.size + 1.0)
    xm, ym, um, vm = x[mask], y[mask], u[mask], v[mask]
    cov = lambda a, b: np.mean((a - a.mean()) * (b - b.mean()))
    return [mask.sum(), xm.mean(), ym.mean(), cov(xm, xm), cov(ym, ym), cov(xm, ym),
            cov(um, um), cov(vm, vm), cov(um, vm)]


def test_window_stats_matches_reference(backend, rng):
    n = 400
    x, y = rng.normal(size=n), rng.standard_t(3, size=n)
    rx, ry = ordinal_ranks(x), ordinal_ranks(y)
    windows = np.array([[1, n, 1, n], [40, 300, 100, 380], [5, 60, 200, 400]], dtype=np.int64)
    got = backend.window_stats(x, y, rx, ry, windows)
    for w, row in zip(windows, got):
        np.testing.assert_allclose(row, _reference(x, y, rx, ry, w), rtol=1e-12, atol=1e-15)


def test_empty_window_gives_nan(backend, rng):
    x = rng.normal(size=20)
    r = ordinal_ranks(x)
    row = backend.window_stats(x, x, r, r, np.array([[1, 5, 10, 20]], dtype=np.int64))[0]
    assert row[0] == 0 and np.all(np.isnan(row[1:]))


def test_batch_matches_single(backend, rng):
    X, Y = rng.normal(size=(7, 50)), rng.normal(size=(7, 50))
    RX, RY = ordinal_ranks_rows(X), ordinal_ranks_rows(Y)
    batch = backend.batch_window_stats(X, Y, RX, RY, 3, 40, 10, 45)
    for b in range(7):
        single = backend.window_stats(X[b], Y[b], RX[b], RY[b], np.array([[3, 40, 10, 45]], dtype=np.int64))[0]
        np.testing.assert_allclose(batch[b], single, rtol=1e-13)


def test_batch_row_independent_of_batch_size(backend, rng):
    X, Y = rng.normal(size=(9, 64)), rng.normal(size=(9, 64))
    RX, RY = ordinal_ranks_rows(X), ordinal_ranks_rows(Y)
    full = backend.batch_window_stats(X, Y, RX, RY, 2, 50, 2, 50)
    part = backend.batch_window_stats(X[4:6].copy(), Y[4:6].copy(), RX[4:6].copy(), RY[4:6].copy(), 2, 50, 2, 50)
    assert np.array_equal(full[4:6], part)


def test_backends_agree(rng):
    pytest.importorskip("qcorr._kernels")
    from qcorr import _kernels

    X, Y = rng.normal(size=(30, 311)), rng.normal(size=(30, 311))
    RX, RY = ordinal_ranks_rows(X), ordinal_ranks_rows(Y)
    a = _kernels.batch_window_stats(X, Y, RX, RY, 4, 218, 4, 218)
    b = _kernels_py.batch_window_stats(X, Y, RX, RY, 4, 218, 4, 218)
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_ranks_rows_match_ordinal_ranks(rng):
    X = rng.integers(0, 5, size=(6, 40)).astype(float)
    R = ordinal_ranks_rows(X)
    for row, r in zip(X, R):
        assert np.array_equal(r, ordinal_ranks(row))


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
