"""Optional numba acceleration.

Set ``EVENTLOC_NO_NUMBA=1`` before import to run every kernel as plain
numpy/python code. The flag is read once, at import time.
"""
from __future__ import annotations

import os

DISABLED = os.environ.get("EVENTLOC_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if DISABLED:
        raise ImportError
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:
    _njit = None
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available and enabled, identity otherwise."""
    if HAVE_NUMBA:
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
