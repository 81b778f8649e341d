"""Scatter kept upper-triangle draws into a dense symmetric matrix."""
import numpy as np

from ._jit import NUMBA_ENABLED, njit


@njit(cache=True)
def _assemble_jit(n, rows, cols, vals):
    a = np.zeros((n, n))
    for t in range(vals.shape[0]):
        i = rows[t]
        j = cols[t]
        a[i, j] = vals[t]
        a[j, i] = vals[t]
    return a


def _assemble_numpy(n, rows, cols, vals):
    a = np.zeros((n, n))
    a[rows, cols] = vals
    a[cols, rows] = vals
    return a


assemble_symmetric = _assemble_jit if NUMBA_ENABLED else _assemble_numpy
