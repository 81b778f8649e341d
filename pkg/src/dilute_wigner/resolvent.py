"""Resolvent observables evaluated from a spectral decomposition.

With H = U diag(l) U^T and G(z) = (H - z)^{-1}:

    g(z)         = (1/n) sum_k 1/(l_k - z)
    (1/n)Tr G^2  = (1/n) sum_k 1/(l_k - z)^2
    G(i,i)       = sum_k U(i,k)^2 / (l_k - z)
    (G^2)(i,i)   = sum_k U(i,k)^2 / (l_k - z)^2

B12, U12 and L are index averages built from the diagonal entries at two
spectral points.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .eig import SpectralSample
from .theory import DomainError


class UsageError(ValueError):
    """Inputs that do not fit the requested observable."""


@dataclass(frozen=True)
class SpectralPoint:
    z: complex
    v2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))

    @property
    def xi(self) -> complex:
        return -1.0 / self.z

    @property
    def in_lambda_v(self) -> bool:
        return abs(self.z.imag) >= 2.0 * math.sqrt(self.v2) + 1.0


def as_point(z, v2: float = 1.0, warn: bool = False) -> SpectralPoint:
    pt = z if isinstance(z, SpectralPoint) else SpectralPoint(complex(z), v2)
    if pt.z.imag == 0.0:
        raise DomainError(f"resolvent needs Im z != 0, got z={pt.z}")
    if warn and not pt.in_lambda_v:
        warnings.warn(f"z={pt.z} lies outside |Im z| >= 2v+1", stacklevel=3)
    return pt


def _weights(s: SpectralSample, z) -> np.ndarray:
    return 1.0 / (s.eigenvalues - as_point(z).z)


def trace_resolvent(s: SpectralSample, z) -> complex:
    """g(z) = (1/n) Tr G(z)."""
    return complex(np.mean(_weights(s, z)))


def trace_resolvent_sq(s: SpectralSample, z) -> complex:
    """(1/n) Tr G(z)^2; by symmetry of G also (1/n) sum_ij G(i,j)^2."""
    r = _weights(s, z)
    return complex(np.mean(r * r))


def _require_vectors(s: SpectralSample):
    if s.vectors is None:
        raise UsageError("diagonal resolvent entries need eigenvectors (want_vectors=True)")
    return s.vectors


def squared_vectors(s: SpectralSample) -> np.ndarray:
    """U**2, reusable across spectral points."""
    return _require_vectors(s) ** 2


def diag_resolvent(s: SpectralSample, z, usq: np.ndarray | None = None) -> np.ndarray:
    """Vector of G(i,i)."""
    if usq is None:
        usq = squared_vectors(s)
    return usq @ _weights(s, z)


def diag_resolvent_sq(s: SpectralSample, z, usq: np.ndarray | None = None) -> np.ndarray:
    """Vector of (G^2)(i,i)."""
    if usq is None:
        usq = squared_vectors(s)
    r = _weights(s, z)
    return usq @ (r * r)


def _check_lengths(*arrays):
    sizes = {np.shape(a) for a in arrays}
    if len(sizes) != 1:
        raise UsageError(f"length mismatch: {sorted(sizes)}")


def observable_B12(d1: np.ndarray, d2: np.ndarray) -> complex:
    """(1/n) sum_j G1(j,j) G2(j,j)."""
    _check_lengths(d1, d2)
    return complex(np.mean(d1 * d2))


def observable_U12(dsq1: np.ndarray, d2: np.ndarray) -> complex:
    """(1/n) sum_i (G1^2)(i,i) G2(i,i)."""
    _check_lengths(dsq1, d2)
    return complex(np.mean(dsq1 * d2))


def observable_L(dsq1: np.ndarray, d1: np.ndarray, d2: np.ndarray) -> complex:
    """(1/n^2) sum_ij (G1^2)(i,i) G1(j,j) G2(i,i) G2(j,j).

    The summand is an i-factor times a j-factor, so the double sum is the
    product U12 * B12 of the two single sums.
    """
    _check_lengths(dsq1, d1, d2)
    return observable_U12(dsq1, d2) * observable_B12(d1, d2)
