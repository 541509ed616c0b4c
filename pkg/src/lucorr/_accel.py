"""Optional numba acceleration.

Kernels are written once as plain loops and compiled with numba when it is
importable and not disabled. Set ``LUCORR_DISABLE_NUMBA=1`` to force the
vectorized numpy path everywhere.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

NUMBA_AVAILABLE = numba is not None

_DISABLED = os.environ.get("LUCORR_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

_backend = "numba" if (NUMBA_AVAILABLE and not _DISABLED) else "numpy"


def njit(func):
    if numba is None:
        return func
    return numba.njit(cache=True)(func)


def get_backend():
    return _backend


def set_backend(name):
    """Select ``"numba"`` or ``"numpy"`` for the batch kernels; returns the previous one."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba is not installed")
    previous, _backend = _backend, name
    return previous
