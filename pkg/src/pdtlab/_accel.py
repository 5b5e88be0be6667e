"""Numba switch.

Set ``PDTLAB_DISABLE_NUMBA=1`` to run every kernel through its pure-numpy
fallback. The flag is read once at import time.
"""
import os

_FLAG = os.environ.get("PDTLAB_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is an optional speedup
    numba = None

USE_NUMBA = numba is not None and _FLAG not in ("1", "true", "yes", "on")


def njit(fn):
    """``numba.njit(cache=True)`` when available, otherwise the identity."""
    if numba is None:
        return fn
    return numba.njit(cache=True)(fn)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
