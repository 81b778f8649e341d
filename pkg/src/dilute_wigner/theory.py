"""Closed-form asymptotics for the dilute Wigner ensemble.

Everything here is a leading term: finite-n corrections of order 1/p or
o(1/n^2) are deliberately left out, and comparison tolerances belong to the
callers. All functions accept numpy arrays where that makes sense.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensemble import EntryLaw


class DomainError(ValueError):
    pass


class InconsistentMomentsError(ValueError):
    pass


@dataclass(frozen=True)
class TheoryParams:
    v2: float
    V4: float
    V6: float
    n: int
    p: float

    def __post_init__(self):
        if not self.v2 > 0:
            raise ValueError(f"v2 must be positive, got {self.v2}")
        if self.V4 < self.v2**2 * (1 - 1e-12):
            raise InconsistentMomentsError(f"V4={self.V4} < v2^2={self.v2**2}")
        if not (0 < self.p <= self.n):
            raise ValueError(f"need 0 < p <= n, got p={self.p}, n={self.n}")

    @classmethod
    def from_law(cls, law: EntryLaw, n: int, p: float) -> "TheoryParams":
        return cls(law.moment(2), law.moment(4), law.moment(6), n, p)


# --- Stieltjes transform of the semicircle law -------------------------------

def stieltjes_w(z, v2: float = 1.0, boundary: bool = False):
    """Herglotz solution of w = 1/(-z - v2 w).

    Off the real axis the root with Im w * Im z > 0 is returned. Real ``z``
    is only accepted with ``boundary=True`` and gives the limit w(lam + i0).
    """
    z = np.asarray(z, dtype=complex)
    real = z.imag == 0
    if np.any(real) and not boundary:
        raise DomainError("w(z) needs Im z != 0; pass boundary=True for the lam+i0 limit")
    # stable roots of v2 w^2 + z w + 1 = 0: big = q/v2, small = 1/q
    rt = np.sqrt(z * z - 4.0 * v2)
    sgn = np.where((np.conj(z) * rt).real >= 0, 1.0, -1.0)
    q = -(z + sgn * rt) / 2.0
    big = q / v2
    with np.errstate(divide="ignore", invalid="ignore"):
        small = 1.0 / q
    pick_big = (big.imag * z.imag) > 0
    w = np.where(pick_big, big, small)
    if np.any(real):
        lam = z.real
        inside = np.abs(lam) < 2.0 * math.sqrt(v2)
        with np.errstate(invalid="ignore"):
            w_in = (-lam + 1j * np.sqrt(np.maximum(4.0 * v2 - lam * lam, 0.0))) / (2.0 * v2)
            s_out = np.sqrt(np.maximum(lam * lam - 4.0 * v2, 0.0))
        # outside the support the real root that vanishes as |lam| -> inf
        w_out = (-lam + np.sign(lam) * s_out) / (2.0 * v2)
        w = np.where(real, np.where(inside, w_in, w_out), w)
    return w.item() if w.ndim == 0 else w


def w_prime(z, v2: float = 1.0):
    """dw/dz = w^2 / (1 - v2 w^2)."""
    w = stieltjes_w(z, v2)
    return w * w / (1.0 - v2 * w * w)


def semicircle_density(lam, v2: float = 1.0):
    lam = np.asarray(lam, dtype=float)
    out = np.sqrt(np.maximum(4.0 * v2 - lam * lam, 0.0)) / (2.0 * math.pi * v2)
    return out.item() if out.ndim == 0 else out


def semicircle_cdf(lam, v2: float = 1.0):
    lam = np.asarray(lam, dtype=float)
    two_v = 2.0 * math.sqrt(v2)
    x = np.clip(lam, -two_v, two_v)
    out = 0.5 + x * np.sqrt(4.0 * v2 - x * x) / (4.0 * math.pi * v2) + np.arcsin(x / two_v) / math.pi
    out = np.clip(out, 0.0, 1.0)
    return out.item() if out.ndim == 0 else out


def stieltjes_inversion(lam, eps: float, v2: float = 1.0):
    """(1/pi) Im w(lam + i eps); tends to the semicircle density as eps -> 0."""
    lam = np.asarray(lam, dtype=float)
    return np.imag(stieltjes_w(lam + 1j * eps, v2)) / math.pi


# --- covariance leading terms --------------------------------------------------

def S_diagonal(z, v2: float = 1.0):
    """S(z, z): the difference quotient replaced by w'(z)."""
    w = stieltjes_w(z, v2)
    one = 1.0 - v2 * w * w
    return (w * w / one) ** 2 / (one * one)


def S_leading(z1, z2, v2: float = 1.0):
    """[(w1 - w2)/(z1 - z2)]^2 / ((1 - v2 w1^2)(1 - v2 w2^2)).

    Coincident points fall through to :func:`S_diagonal`.
    """
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    w1, w2 = stieltjes_w(z1, v2), stieltjes_w(z2, v2)
    same = z1 == z2
    with np.errstate(divide="ignore", invalid="ignore"):
        dq = (w1 - w2) / (z1 - z2)
        val = dq * dq / ((1.0 - v2 * w1 * w1) * (1.0 - v2 * w2 * w2))
    out = np.where(same, S_diagonal(np.where(same, z1, 1j), v2), val)
    return out.item() if out.ndim == 0 else out


def T_leading(z1, z2, v2: float = 1.0):
    w1, w2 = stieltjes_w(z1, v2), stieltjes_w(z2, v2)
    return (w1 * w2) ** 3 / ((1.0 - v2 * w1 * w1) * (1.0 - v2 * w2 * w2))


def difference_quotient(z1, z2, v2: float = 1.0):
    """(w1 - w2)/(z1 - z2) in the cancellation-free form w1 w2 / (1 - v2 w1 w2)."""
    w1, w2 = stieltjes_w(z1, v2), stieltjes_w(z2, v2)
    return w1 * w2 / (1.0 - v2 * w1 * w2)


def C_leading(params: TheoryParams, z1, z2):
    """Leading term of Cov(g(z1), g(z2)) (no complex conjugation)."""
    n, p, v2 = params.n, params.p, params.v2
    return (2.0 * v2 / n**2) * S_leading(z1, z2, v2) + (
        2.0 * params.V4 / (n * p) - 6.0 * v2 * v2 / n**2
    ) * T_leading(z1, z2, v2)


# --- cumulants -------------------------------------------------------------------

def cumulants_from_moments(mu2: float, mu4: float, mu6: float) -> tuple[float, float, float]:
    """(K2, K4, K6) of a symmetric law from its even moments."""
    if mu2 < 0 or mu4 < 0 or mu6 < 0:
        raise InconsistentMomentsError("even moments must be nonnegative")
    if mu4 < mu2 * mu2 * (1 - 1e-12):
        raise InconsistentMomentsError(f"mu4={mu4} < mu2^2={mu2 * mu2}")
    if mu2 == 0 and (mu4 != 0 or mu6 != 0):
        raise InconsistentMomentsError("zero variance forces all moments to vanish")
    return mu2, mu4 - 3 * mu2**2, mu6 - 15 * mu4 * mu2 + 30 * mu2**3


def entry_cumulants(params: TheoryParams, diagonal: bool = False) -> tuple[float, float, float]:
    """Cumulants (K2, K4, K6) of one matrix entry H(i,j), dilution included."""
    n, p, v2, V4, V6 = params.n, params.p, params.v2, params.V4, params.V6
    f = 2.0 if diagonal else 1.0
    delta = V4 - 3 * v2**2 * p / n
    sigma = V6 - 15 * V4 * v2 * p / n + 30 * v2**3 * (p / n) ** 2
    return (v2 / n) * f, (delta / (n * p)) * f**2, (sigma / (n * p * p)) * f**3


def q_limit(z, v2: float = 1.0):
    """w / (1 - v2 w^2)."""
    w = stieltjes_w(z, v2)
    return w / (1.0 - v2 * w * w)


def q_finite(z, mean_g, v2: float = 1.0):
    """xi / (1 - 2 xi v2 E g) with xi = -1/z, for a measured E g."""
    xi = -1.0 / np.asarray(z, dtype=complex)
    out = xi / (1.0 - 2.0 * xi * v2 * mean_g)
    return out.item() if np.ndim(out) == 0 else out


# --- observable predictions -----------------------------------------------------

def predict_E_g(z, v2: float = 1.0):
    return stieltjes_w(z, v2)


def predict_E_trG2(z, v2: float = 1.0):
    w = stieltjes_w(z, v2)
    return w * w / (1.0 - v2 * w * w)


def predict_B12(z1, z2, v2: float = 1.0):
    return stieltjes_w(z1, v2) * stieltjes_w(z2, v2)


def predict_U12(z1, z2, v2: float = 1.0):
    w1, w2 = stieltjes_w(z1, v2), stieltjes_w(z2, v2)
    return w1 * w1 * w2 / (1.0 - v2 * w1 * w1)


def predict_L(z1, z2, v2: float = 1.0):
    w1, w2 = stieltjes_w(z1, v2), stieltjes_w(z2, v2)
    return w1**3 * w2**2 / (1.0 - v2 * w1 * w1)


PREDICTORS = {
    "g": predict_E_g,
    "trG2": predict_E_trG2,
    "B12": predict_B12,
    "U12": predict_U12,
    "L": predict_L,
}


# --- local scale --------------------------------------------------------------------

def density_density_leading(lambda1: float, lambda2: float, params: TheoryParams) -> float:
    """Formal leading term of Cov(rho(l1), rho(l2)) inside the bulk."""
    v2, n, p, V4 = params.v2, params.n, params.p, params.V4
    edge = 2.0 * math.sqrt(v2)
    for lam in (lambda1, lambda2):
        if not abs(lam) < edge:
            raise DomainError(f"lambda={lam} is not inside (-2v, 2v)")
    if lambda1 == lambda2:
        raise DomainError("density-density leading term is singular at lambda1 == lambda2")
    r1 = math.sqrt(4 * v2 - lambda1**2)
    r2 = math.sqrt(4 * v2 - lambda2**2)
    sine = -(4 * v2 - lambda1 * lambda2) / (math.pi**2 * (n * (lambda1 - lambda2)) ** 2 * r1 * r2)
    ratio = (2 * v2 - lambda1**2) * (2 * v2 - lambda2**2) / (r1 * r2)
    v8 = v2**4
    return (
        sine
        + V4 / (n * p * 2 * math.pi**2 * v8) * ratio
        - 3 * v2**2 / (n * n * 2 * math.pi**2 * v8) * ratio
    )


def universality_limit(s: float) -> float:
    """-1 / (pi^2 s^2)."""
    if s == 0:
        raise DomainError("s must be nonzero")
    return -1.0 / (math.pi**2 * s * s)


def edge_relations_check(lam: float, v2: float = 1.0) -> tuple[float, float]:
    """Residuals of v2 (Re w)^2 = lam^2/4v2 and v2 (Im w)^2 = 1 - lam^2/4v2 at lam + i0."""
    if not abs(lam) < 2.0 * math.sqrt(v2):
        raise DomainError(f"lambda={lam} is not inside (-2v, 2v)")
    w = stieltjes_w(complex(lam, 0.0), v2, boundary=True)
    r_re = abs(v2 * w.real**2 - lam * lam / (4 * v2))
    r_im = abs(v2 * w.imag**2 - (1 - lam * lam / (4 * v2)))
    return r_re, r_im
