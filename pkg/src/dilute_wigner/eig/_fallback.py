"""Pure-numpy twins of the numba kernels (same algorithm, same outputs).

Householder steps are vectorized; the QL sweep is a Python loop with the
eigenvector rotations vectorized over rows.
"""
import math

import numpy as np

MAX_ITER = 30


def tridiagonalize(a, want_q):
    n = a.shape[0]
    d = np.empty(n)
    e = np.zeros(n)
    vs = []
    for k in range(n - 2):
        m = k + 1
        d[k] = a[k, k]
        x = a[k, m:].copy()
        alpha = math.sqrt(float(x @ x))
        if alpha == 0.0:
            vs.append(None)
            continue
        if x[0] > 0.0:
            alpha = -alpha
        v = x
        v[0] -= alpha
        b = 2.0 / float(v @ v)
        block = a[m:, m:]
        w = b * (block @ v)
        w -= (0.5 * b * float(w @ v)) * v
        block -= np.outer(v, w) + np.outer(w, v)
        e[k] = alpha
        vs.append((v, b))
    if n >= 2:
        d[n - 2] = a[n - 2, n - 2]
        e[n - 2] = a[n - 2, n - 1]
    d[n - 1] = a[n - 1, n - 1]
    if not want_q:
        return d, e, np.empty((0, 0))
    q = np.eye(n)
    for k in range(n - 3, -1, -1):
        if vs[k] is None:
            continue
        v, b = vs[k]
        m = k + 1
        sub = q[m:, m:]
        sub -= b * np.outer(v, v @ sub)
    return d, e, q


def tql_implicit(d, e, zt, want_vectors):
    n = d.shape[0]
    eps = np.finfo(np.float64).eps
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
            s = c = 1.0
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
                    lo = zt[i].copy()
                    hi = zt[i + 1]
                    zt[i] = c * lo - s * hi
                    zt[i + 1] = s * lo + c * hi
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1
