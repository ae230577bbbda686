"""Optional numba acceleration.

Hot kernels are written once as plain-Python loops and compiled with
``njit`` when numba is importable and not disabled.  Every kernel module
also carries a vectorised numpy twin; which one the public functions call is
decided here, once, at import time.

Set ``CORRNET_NUMBA=0`` to force the numpy path.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("CORRNET_NUMBA", "1").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and _FLAG not in {"0", "false", "no", "off"}


def njit(func):
    """Compile ``func`` in nopython mode when numba is available.

    The decorated object is returned unchanged otherwise, so the loop code
    still runs (slowly) as ordinary Python.
    """
    if not HAVE_NUMBA:
        return func
    return _numba.njit(cache=True, nogil=True)(func)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
