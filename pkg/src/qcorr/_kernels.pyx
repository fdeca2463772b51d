# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled rank-window moment kernels.

Every routine makes two sequential passes over the observations (means,
then centred sums) in ascending index order, so results do not depend on
how callers batch their work.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport NAN

cnp.import_array()

ctypedef cnp.int64_t i64

NFIELDS = 9


cdef void _window(const double[::1] x, const double[::1] y,
                  const i64[::1] rx, const i64[::1] ry,
                  i64 lo_x, i64 hi_x, i64 lo_y, i64 hi_y,
                  double* out) noexcept nogil:
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double m = 0.0, sx = 0.0, sy = 0.0, su = 0.0, sv = 0.0
    cdef double scale = 1.0 / (n + 1.0)
    cdef double mx, my, mu, mv, dx, dy, du, dv
    cdef double vxx = 0.0, vyy = 0.0, cxy = 0.0, vuu = 0.0, vvv = 0.0, cuv = 0.0
    cdef i64 a, b
    for i in range(n):
        a = rx[i]
        b = ry[i]
        if a >= lo_x and a <= hi_x and b >= lo_y and b <= hi_y:
            m += 1.0
            sx += x[i]
            sy += y[i]
            su += a * scale
            sv += b * scale
    out[0] = m
    if m == 0.0:
        for i in range(1, 9):
            out[i] = NAN
        return
    mx = sx / m
    my = sy / m
    mu = su / m
    mv = sv / m
    for i in range(n):
        a = rx[i]
        b = ry[i]
        if a >= lo_x and a <= hi_x and b >= lo_y and b <= hi_y:
            dx = x[i] - mx
            dy = y[i] - my
            du = a * scale - mu
            dv = b * scale - mv
            vxx += dx * dx
            vyy += dy * dy
            cxy += dx * dy
            vuu += du * du
            vvv += dv * dv
            cuv += du * dv
    out[1] = mx
    out[2] = my
    out[3] = vxx / m
    out[4] = vyy / m
    out[5] = cxy / m
    out[6] = vuu / m
    out[7] = vvv / m
    out[8] = cuv / m


def window_stats(const double[::1] x, const double[::1] y,
                 const i64[::1] rx, const i64[::1] ry,
                 const i64[:, ::1] windows):
    """Moments of one bivariate sample for each row ``(lo_x, hi_x, lo_y, hi_y)`` of ``windows``."""
    cdef Py_ssize_t k, nw = windows.shape[0]
    out = np.empty((nw, NFIELDS), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for k in range(nw):
            _window(x, y, rx, ry, windows[k, 0], windows[k, 1],
                    windows[k, 2], windows[k, 3], &o[k, 0])
    return out


def batch_window_stats(const double[:, ::1] X, const double[:, ::1] Y,
                       const i64[:, ::1] RX, const i64[:, ::1] RY,
                       i64 lo_x, i64 hi_x, i64 lo_y, i64 hi_y):
    """Moments of each row-sample of ``X``/``Y`` under a single rank window."""
    cdef Py_ssize_t b, nb = X.shape[0]
    out = np.empty((nb, NFIELDS), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for b in range(nb):
            _window(X[b], Y[b], RX[b], RY[b], lo_x, hi_x, lo_y, hi_y, &o[b, 0])
    return out
