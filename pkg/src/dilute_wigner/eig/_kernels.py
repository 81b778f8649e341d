"""Numba kernels: Householder tridiagonalization and implicit-shift QL.

Loops are written row-major over the upper triangle so the inner loops run
over contiguous memory.
"""
import math

import numpy as np

from .._jit import njit

MAX_ITER = 30


@njit(cache=True)
def tridiagonalize(a, want_q):
    """Reduce symmetric ``a`` (overwritten) to tridiagonal form.

    Returns ``(d, e, q)`` with ``q.T @ A @ q = tridiag(d, e)``; ``e[i]``
    couples rows i and i+1 and ``e[n-1] = 0``. ``q`` is empty unless
    ``want_q``.
    """
    n = a.shape[0]
    d = np.empty(n)
    e = np.zeros(n)
    beta = np.zeros(n)
    w = np.empty(n)
    for k in range(n - 2):
        m = k + 1
        d[k] = a[k, k]
        alpha = 0.0
        for i in range(m, n):
            alpha += a[k, i] * a[k, i]
        alpha = math.sqrt(alpha)
        if alpha == 0.0:
            continue
        if a[k, m] > 0.0:
            alpha = -alpha
        # reflector v lives in a[k, m:]
        a[k, m] -= alpha
        vnorm2 = 0.0
        for i in range(m, n):
            vnorm2 += a[k, i] * a[k, i]
        b = 2.0 / vnorm2
        beta[k] = b
        for i in range(m, n):
            w[i] = 0.0
        # w = A v, reading the upper triangle only
        for i in range(m, n):
            vi = a[k, i]
            s = a[i, i] * vi
            for j in range(i + 1, n):
                aij = a[i, j]
                s += aij * a[k, j]
                w[j] += aij * vi
            w[i] += s
        kk = 0.0
        for i in range(m, n):
            w[i] *= b
            kk += w[i] * a[k, i]
        kk *= 0.5 * b
        for i in range(m, n):
            w[i] -= kk * a[k, i]
        for i in range(m, n):
            vi = a[k, i]
            wi = w[i]
            for j in range(i, n):
                a[i, j] -= vi * w[j] + wi * a[k, j]
        e[k] = alpha
    if n >= 2:
        d[n - 2] = a[n - 2, n - 2]
        e[n - 2] = a[n - 2, n - 1]
    d[n - 1] = a[n - 1, n - 1]

    if not want_q:
        return d, e, np.empty((0, 0))
    q = np.eye(n)
    s_col = np.empty(n)
    for k in range(n - 3, -1, -1):
        b = beta[k]
        if b == 0.0:
            continue
        m = k + 1
        for j in range(m, n):
            s_col[j] = 0.0
        for i in range(m, n):
            vi = a[k, i]
            for j in range(m, n):
                s_col[j] += vi * q[i, j]
        for i in range(m, n):
            bvi = b * a[k, i]
            for j in range(m, n):
                q[i, j] -= bvi * s_col[j]
    return d, e, q


@njit(cache=True)
def tql_implicit(d, e, zt, want_vectors):
    """Implicit-shift QL on tridiag(d, e), in place.

    ``d`` ends up holding the (unsorted) eigenvalues. When ``want_vectors``
    the plane rotations are applied to the rows of ``zt``, so row k becomes
    the eigenvector of ``d[k]``. Returns -1 on success, otherwise the index
    whose eigenvalue failed to converge within MAX_ITER sweeps.
    """
    n = d.shape[0]
    eps = np.finfo(np.float64).eps
    ncols = zt.shape[1]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                if abs(e[m]) <= eps * (abs(d[m]) + abs(d[m + 1])):
                    break
                m += 1
            if m == l:
                break
            if it == MAX_ITER:
                return l
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if want_vectors:
                    for k in range(ncols):
                        f = zt[i + 1, k]
                        zt[i + 1, k] = s * zt[i, k] + c * f
                        zt[i, k] = c * zt[i, k] - s * f
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1
