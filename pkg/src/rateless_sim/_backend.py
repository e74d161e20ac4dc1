"""Kernel backend selection.

The hot numeric kernels are written as plain Python functions over numpy
arrays and scalars.  By default they are compiled with numba's @njit; setting
the environment variable RATELESS_SIM_NUMBA=0 keeps them as interpreted
numpy code (same source, same results up to float reassociation).  The
variable is read once at import time.
"""
from __future__ import annotations

import os

_flag = os.environ.get("RATELESS_SIM_NUMBA", "").strip().lower()

if _flag in ("0", "false", "off", "no"):
    NUMBA_ENABLED = False
elif _flag in ("1", "true", "on", "yes"):
    NUMBA_ENABLED = True
else:
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False


def maybe_jit(**options):
    """@njit with the given options, or a no-op decorator on the numpy path."""
    if NUMBA_ENABLED:
        from numba import njit

        options.setdefault("cache", True)
        return njit(**options)

    def passthrough(func):
        return func

    return passthrough


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
