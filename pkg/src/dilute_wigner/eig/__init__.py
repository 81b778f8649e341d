"""Dense symmetric eigensolver and empirical spectral distribution tools.

``eigen_decompose`` runs Householder tridiagonalization followed by
implicit-shift QL with deflation. The kernels are numba-compiled unless
``DILUTE_WIGNER_NO_NUMBA`` is set, in which case the numpy twins in
``_fallback`` run. ``backend="lapack"`` hands the same job to
``numpy.linalg.eigh``, which is what the large Monte Carlo campaigns use.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .._jit import NUMBA_ENABLED
from ..ensemble import SymmetricMatrix
from . import _fallback

if NUMBA_ENABLED:
    from . import _kernels as _active
else:
    _active = _fallback

BACKENDS = ("native", "numpy", "lapack")


class EigenSolverError(RuntimeError):
    def __init__(self, index: int):
        super().__init__(f"QL iteration did not converge for eigenvalue index {index}")
        self.index = index


@dataclass(frozen=True, eq=False)
class SpectralSample:
    eigenvalues: np.ndarray
    vectors: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def has_vectors(self) -> bool:
        return self.vectors is not None


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # first component above 1e-12 in modulus is made positive
    big = np.abs(vectors) > 1e-12
    first = np.argmax(big, axis=0)
    signs = np.sign(vectors[first, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _native(a: np.ndarray, want_vectors: bool, kernels) -> tuple[np.ndarray, np.ndarray | None]:
    work = np.array(a, dtype=np.float64, order="C", copy=True)
    d, e, q = kernels.tridiagonalize(work, want_vectors)
    zt = np.ascontiguousarray(q.T) if want_vectors else np.empty((0, 0))
    status = kernels.tql_implicit(d, e, zt, want_vectors)
    if status >= 0:
        raise EigenSolverError(int(status))
    order = np.argsort(d, kind="stable")
    vals = d[order]
    vecs = zt[order].T.copy() if want_vectors else None
    return vals, vecs


def eigen_decompose(m: SymmetricMatrix | np.ndarray, want_vectors: bool = False,
                    backend: str = "native") -> SpectralSample:
    """Eigenvalues (ascending) and optionally orthonormal eigenvectors.

    ``backend``: ``"native"`` (numba kernels, or numpy if numba is switched
    off), ``"numpy"`` (force the numpy twins) or ``"lapack"``.
    Column k of ``vectors`` belongs to ``eigenvalues[k]``; each column has
    its first non-negligible component positive.
    """
    a = m.entries if isinstance(m, SymmetricMatrix) else np.asarray(m, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if backend == "native":
        vals, vecs = _native(a, want_vectors, _active)
    elif backend == "numpy":
        vals, vecs = _native(a, want_vectors, _fallback)
    elif backend == "lapack":
        if want_vectors:
            vals, vecs = np.linalg.eigh(a)
        else:
            vals, vecs = np.linalg.eigvalsh(a), None
    else:
        raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")
    if vecs is not None:
        vecs = _fix_signs(vecs)
    return SpectralSample(vals, vecs)


def empirical_cdf(s: SpectralSample | np.ndarray, lam):
    """(1/n) #{lambda_j <= lam}; right-continuous, vectorized in ``lam``."""
    ev = s.eigenvalues if isinstance(s, SpectralSample) else np.sort(np.asarray(s, dtype=float))
    out = np.searchsorted(ev, lam, side="right") / ev.size
    return float(out) if np.ndim(out) == 0 else out


def ks_distance(s: SpectralSample | np.ndarray, cdf: Callable) -> float:
    """Kolmogorov-Smirnov distance between the spectrum and a continuous cdf.

    Evaluated at the jump points: sup_j max(|j/n - F(l_j)|, |(j-1)/n - F(l_j)|).
    """
    ev = s.eigenvalues if isinstance(s, SpectralSample) else np.sort(np.asarray(s, dtype=float))
    n = ev.size
    f = np.asarray(cdf(ev), dtype=float)
    j = np.arange(1, n + 1)
    return float(max(np.max(np.abs(j / n - f)), np.max(np.abs((j - 1) / n - f))))
