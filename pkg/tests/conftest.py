import time

import numpy as np
import pytest

from qcorr import _kernels_py

_ACCEPTANCE = []


def _backends():
    out = [pytest.param(_kernels_py, id="python")]
    try:
        from qcorr import _kernels
    except ImportError:
        out.append(pytest.param(None, id="cython", marks=pytest.mark.skip("extension not built")))
    else:
        out.append(pytest.param(_kernels, id="cython"))
    return out


@pytest.fixture(params=_backends())
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, passed, detail)``."""

    def record(number, passed, detail):
        _ACCEPTANCE.append((number, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}")


@pytest.fixture(scope="session")
def lag1_null_312_timed():
    """The lag-1 null for n=312, split (0.01, 0.7), M=100000, and its runtime."""
    from qcorr.inference import mc_null

    t0 = time.perf_counter()
    dist = mc_null(312, (0.01, 0.7), M=100_000, seed=2022, kind="corr", pairing="lag1-series")
    return dist, time.perf_counter() - t0


@pytest.fixture(scope="session")
def lag1_null_312(lag1_null_312_timed):
    return lag1_null_312_timed[0]
