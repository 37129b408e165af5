"""Numba switch.

Set ``RISIMAGING_DISABLE_NUMBA=1`` to force the pure-numpy kernels. Numba's own
``NUMBA_DISABLE_JIT`` is respected as well (kernels then run as plain Python,
which is only useful for debugging).
"""
import os

_FLAG = "RISIMAGING_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_AVAILABLE = numba is not None
DISABLED = os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}
USE_NUMBA = NUMBA_AVAILABLE and not DISABLED


def njit(func):
    """Compile ``func`` in nopython mode when numba is importable, else return it."""
    if not NUMBA_AVAILABLE:
        return func
    return numba.njit(cache=True, fastmath=False)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
