"""numpy implementation of the rank-window moment kernels.

Same signatures and output layout as the compiled ``_kernels`` module.
Output columns: m, mean_x, mean_y, var_x, var_y, cov, var_u, var_v, cov_uv
where ``u = rank_x / (n + 1)`` and ``v = rank_y / (n + 1)``.
"""
import numpy as np

NFIELDS = 9


def _masked_moments(X, Y, U, V, mask):
    m = mask.sum(axis=-1).astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = [np.where(mask, A, 0.0).sum(axis=-1) / m for A in (X, Y, U, V)]
        dev = [np.where(mask, A - mu[..., None], 0.0) for A, mu in zip((X, Y, U, V), means)]
        dx, dy, du, dv = dev
        out = np.stack(
            [
                m,
                means[0],
                means[1],
                (dx * dx).sum(axis=-1) / m,
                (dy * dy).sum(axis=-1) / m,
                (dx * dy).sum(axis=-1) / m,
                (du * du).sum(axis=-1) / m,
                (dv * dv).sum(axis=-1) / m,
                (du * dv).sum(axis=-1) / m,
            ],
            axis=-1,
        )
    return out


def window_stats(x, y, rx, ry, windows):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    rx = np.asarray(rx, dtype=np.int64)
    ry = np.asarray(ry, dtype=np.int64)
    windows = np.asarray(windows, dtype=np.int64).reshape(-1, 4)
    scale = 1.0 / (x.shape[0] + 1.0)
    u = rx * scale
    v = ry * scale
    out = np.empty((windows.shape[0], NFIELDS), dtype=np.float64)
    for k, (lo_x, hi_x, lo_y, hi_y) in enumerate(windows):
        mask = (rx >= lo_x) & (rx <= hi_x) & (ry >= lo_y) & (ry <= hi_y)
        out[k] = _masked_moments(x[mask], y[mask], u[mask], v[mask], np.ones(int(mask.sum()), bool))
    return out


def batch_window_stats(X, Y, RX, RY, lo_x, hi_x, lo_y, hi_y):
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    RX = np.asarray(RX, dtype=np.int64)
    RY = np.asarray(RY, dtype=np.int64)
    scale = 1.0 / (X.shape[1] + 1.0)
    mask = (RX >= lo_x) & (RX <= hi_x) & (RY >= lo_y) & (RY <= hi_y)
    return _masked_moments(X, Y, RX * scale, RY * scale, mask)
