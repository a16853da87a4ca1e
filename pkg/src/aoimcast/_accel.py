"""Backend switch for the hot loops.

``AOIMCAST_BACKEND=numpy`` forces the pure numpy/Python path even when numba
is importable.  Anything else (or unset) uses numba when available.
"""
from __future__ import annotations

import os

_requested = os.environ.get("AOIMCAST_BACKEND", "numba").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and _requested != "numpy"
BACKEND = "numba" if USE_NUMBA else "numpy"


def jit(func):
    """``numba.njit(cache=True)`` when the numba backend is active, else identity."""
    if USE_NUMBA:
        return numba.njit(cache=True)(func)
    return func
