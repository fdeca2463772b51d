"""Select the compiled kernels when available, otherwise the numpy ones.

Set ``QCORR_PURE_PYTHON=1`` to force the numpy implementation.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("QCORR_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

NFIELDS = 9
(F_M, F_MEAN_X, F_MEAN_Y, F_VAR_X, F_VAR_Y, F_COV, F_VAR_U, F_VAR_V, F_COV_UV) = range(NFIELDS)

window_stats = _impl.window_stats
batch_window_stats = _impl.batch_window_stats
