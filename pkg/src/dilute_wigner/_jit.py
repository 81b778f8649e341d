"""Numba switch.

Setting ``DILUTE_WIGNER_NO_NUMBA=1`` (or running without numba installed)
routes every hot kernel to its pure-numpy twin instead of the ``@njit``
version. The flag is read once, at import.
"""
import os

_DISABLED = os.environ.get("DILUTE_WIGNER_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba as _nb
except ImportError:  # pragma: no cover - numba is a declared dependency
    _nb = None

NUMBA_ENABLED = (_nb is not None) and not _DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if _nb is not None:
        return _nb.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda func: func
