"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times ``batch_window_stats`` on a Monte-Carlo sized batch, ``window_stats``
on a large sample with many windows, and an end-to-end ``mc_null`` run with
each backend swapped in.
"""
import argparse
import time

import numpy as np

from qcorr import _kernels_py, inference, kernels
from qcorr.quantile import ordinal_ranks, ordinal_ranks_rows, rank_window

try:
    from qcorr import _kernels as _compiled
except ImportError:
    _compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    X = rng.normal(size=(1024, 311))
    Y = rng.normal(size=(1024, 311))
    RX, RY = ordinal_ranks_rows(X), ordinal_ranks_rows(Y)
    win = (*rank_window(311, (0.01, 0.7)), *rank_window(311, (0.01, 0.7)))

    x = rng.normal(size=1_000_000)
    y = rng.normal(size=1_000_000)
    rx, ry = ordinal_ranks(x), ordinal_ranks(y)
    p = np.linspace(0.0, 0.45, 10)
    q = np.linspace(0.55, 1.0, 10)
    windows = np.array([[*rank_window(x.size, (a, b)), *rank_window(x.size, (0.2, 0.9))]
                        for a in p for b in q], dtype=np.int64)

    return {
        "batch_window_stats 1024x311": lambda mod: mod.batch_window_stats(X, Y, RX, RY, *win),
        "window_stats n=1e6, 100 windows": lambda mod: mod.window_stats(x, y, rx, ry, windows),
        "mc_null n=312 M=5000": lambda mod: _with_backend(mod, lambda: inference.mc_null(312, (0.01, 0.7), M=5000)),
    }


def _with_backend(mod, fn):
    saved = kernels.window_stats, kernels.batch_window_stats
    kernels.window_stats, kernels.batch_window_stats = mod.window_stats, mod.batch_window_stats
    try:
        return fn()
    finally:
        kernels.window_stats, kernels.batch_window_stats = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = [("numpy", _kernels_py)] + ([("cython", _compiled)] if _compiled else [])
    if _compiled is None:
        print("compiled extension not built; timing the numpy backend only")
    rng = np.random.default_rng(0)
    print(f"{'case':36s}" + "".join(f"{name:>12s}" for name, _ in backends) + ("     speedup" if _compiled else ""))
    for label, fn in cases(rng).items():
        t = [best_of(lambda: fn(mod), args.repeat) for _, mod in backends]
        line = f"{label:36s}" + "".join(f"{v * 1e3:10.1f}ms" for v in t)
        if len(t) == 2:
            line += f"{t[0] / t[1]:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
