"""JIT switch for the hot kernels.

Kernels are written once in plain Python/numpy and compiled with numba when it
is importable.  Setting ``SINGDET_DISABLE_NUMBA=1`` forces the interpreted
path, which is what the benchmark compares against.
"""

from __future__ import annotations

import os

_DISABLED = os.environ.get("SINGDET_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    import numba as _numba
except ImportError:  # pragma: no cover - exercised via subprocess in tests
    _numba = None

USE_NUMBA = _numba is not None


def njit(func=None, **options):
    """``numba.njit(cache=True)`` when available, identity otherwise."""
    if func is None:
        return lambda f: njit(f, **options)
    if not USE_NUMBA:
        return func
    options.setdefault("cache", True)
    return _numba.njit(**options)(func)
