"""Numerical checks of the cumulant expansion and the resolvent identities.

Scalar expectations are exact sums (discrete laws) or 64-node Gauss-Hermite
quadrature (Gaussian laws). Matrix identities are checked with explicit
inverses, independently of the eigendecomposition path.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from .ensemble import SymmetricMatrix

# F(x, r) -> r-th derivative of the test function at x
TestFunction = Callable[[np.ndarray, int], np.ndarray]

GH_NODES = 64


class NumericError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScalarLaw:
    """Either a finite discrete law or a centered Gaussian."""

    values: tuple[float, ...] = ()
    probs: tuple[float, ...] = ()
    sigma2: float | None = None

    def __post_init__(self):
        if self.sigma2 is None:
            if len(self.values) != len(self.probs) or not self.values:
                raise ValueError("discrete law needs matching values and probs")
            if abs(sum(self.probs) - 1.0) > 1e-12 or min(self.probs) < 0:
                raise ValueError("probabilities must be nonnegative and sum to 1")
        elif not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")

    @classmethod
    def gaussian(cls, sigma2: float = 1.0) -> "ScalarLaw":
        return cls(sigma2=float(sigma2))

    @classmethod
    def discrete(cls, pairs: Sequence[tuple[float, float]]) -> "ScalarLaw":
        return cls(tuple(float(x) for x, _ in pairs), tuple(float(w) for _, w in pairs))

    @classmethod
    def rademacher(cls) -> "ScalarLaw":
        return cls.discrete([(-1.0, 0.5), (1.0, 0.5)])

    def _nodes(self):
        if self.sigma2 is None:
            return np.array(self.values), np.array(self.probs)
        x, w = hermegauss(GH_NODES)
        return x * math.sqrt(self.sigma2), w / math.sqrt(2 * math.pi)

    def expect(self, f: Callable[[np.ndarray], np.ndarray]) -> complex:
        x, w = self._nodes()
        vals = np.asarray(f(x))
        if not np.all(np.isfinite(vals)):
            raise NumericError("integrand is not finite at the quadrature nodes")
        return complex(np.sum(w * vals))

    def moment(self, r: int) -> float:
        if r > 14:
            raise ValueError("moments are provided up to order 14")
        if self.sigma2 is not None:
            return 0.0 if r % 2 else self.sigma2 ** (r // 2) * float(np.prod(np.arange(r - 1, 0, -2)))
        return float(np.sum(np.array(self.probs) * np.array(self.values) ** r))

    def cumulants(self, order: int) -> list[float]:
        """[K_1, ..., K_order] from raw moments via the standard recursion."""
        mu = [self.moment(r) for r in range(order + 1)]
        k = [0.0] * (order + 1)
        for m in range(1, order + 1):
            k[m] = mu[m] - sum(math.comb(m - 1, j - 1) * k[j] * mu[m - j] for j in range(1, m))
        return k[1:]


def polynomial_function(coeffs: Sequence[float]) -> TestFunction:
    """F(x) = sum_k coeffs[k] x^k with exact derivatives."""
    base = np.polynomial.Polynomial(coeffs)

    def F(x, r=0):
        return base.deriv(r)(x) if r else base(x)

    return F


def resolvent_function(z: complex) -> TestFunction:
    """F(x) = 1/(x - z); F^(r)(x) = (-1)^r r! / (x - z)^(r+1)."""

    def F(x, r=0):
        return (-1) ** r * math.factorial(r) / (np.asarray(x) - z) ** (r + 1)

    return F


def cumulant_expansion_residual(law: ScalarLaw, F: TestFunction, q: int) -> float:
    """|E X F(X) - sum_{r<=q} K_{r+1}/r! E F^(r)(X)|."""
    if q < 0:
        raise ValueError("q must be nonnegative")
    k = law.cumulants(q + 1)
    lhs = law.expect(lambda x: x * F(x, 0))
    rhs = sum(k[r] / math.factorial(r) * law.expect(lambda x, r=r: F(x, r)) for r in range(q + 1))
    return abs(lhs - rhs)


def _entries(h) -> np.ndarray:
    return h.entries if isinstance(h, SymmetricMatrix) else np.asarray(h, dtype=float)


def resolvent(h, z: complex) -> np.ndarray:
    a = _entries(h)
    return np.linalg.inv(a - z * np.eye(a.shape[0]))


def resolvent_derivative_residual(h, jk: tuple[int, int], z: complex, step: float) -> float:
    """Max |central difference of G(s,t) - closed-form dG(s,t)/dh(j,k)|.

    The perturbation is symmetric: h(j,k) and h(k,j) move together.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if z.imag == 0:
        raise ValueError("need Im z != 0")
    a = _entries(h)
    j, k = jk
    e = np.zeros_like(a)
    e[j, k] = e[k, j] = 1.0
    g = resolvent(a, z)
    fd = (resolvent(a + step * e, z) - resolvent(a - step * e, z)) / (2 * step)
    delta = 1.0 if j == k else 0.0
    exact = -(np.outer(g[:, j], g[k, :]) + np.outer(g[:, k], g[j, :])) / (1.0 + delta)
    return float(np.max(np.abs(fd - exact)))


def resolvent_identity_residual(h1, h2, z1: complex, z2: complex) -> dict[str, float | None]:
    """Relative Frobenius residuals of the resolvent identities.

    ``perturbation``: A^{-1} = B^{-1} - B^{-1}(A - B)A^{-1} with A = h1 - z1, B = h2 - z1.
    ``expansion``: G = xi I - xi G h1 with xi = -1/z1 (the B = -z1 case).
    ``two_point``: G1 G2 = (G1 - G2)/(z1 - z2) for G_l = (h1 - z_l)^{-1}.
    ``trace``: Tr G1^2 G2 = Tr G1^2/(z1 - z2) - (Tr G1 - Tr G2)/(z1 - z2)^2.
    The last two are ``None`` (with a warning) when z1 == z2.
    """
    a1, a2 = _entries(h1), _entries(h2)
    n = a1.shape[0]
    eye = np.eye(n)
    g1 = resolvent(a1, z1)
    gt = resolvent(a2, z1)
    out: dict[str, float | None] = {}
    pert = gt - gt @ (a1 - a2) @ g1
    out["perturbation"] = float(np.linalg.norm(g1 - pert) / np.linalg.norm(g1))
    xi = -1.0 / z1
    out["expansion"] = float(np.linalg.norm(g1 - (xi * eye - xi * g1 @ a1)) / np.linalg.norm(g1))
    if z1 == z2:
        warnings.warn("z1 == z2: two-point identities skipped", stacklevel=2)
        out["two_point"] = None
        out["trace"] = None
        return out
    g2 = resolvent(a1, z2)
    lhs = g1 @ g2
    out["two_point"] = float(np.linalg.norm(lhs - (g1 - g2) / (z1 - z2)) / np.linalg.norm(lhs))
    tr_lhs = np.trace(g1 @ g1 @ g2)
    tr_rhs = np.trace(g1 @ g1) / (z1 - z2) - (np.trace(g1) - np.trace(g2)) / (z1 - z2) ** 2
    out["trace"] = float(abs(tr_lhs - tr_rhs) / abs(tr_lhs))
    return out


# --- the standard residual suite ------------------------------------------------

def entry_law(n: int, p: float, atom: float = 1.0) -> ScalarLaw:
    """Law of one off-diagonal entry a*d/sqrt(p) for a = +-atom, d ~ Bernoulli(p/n)."""
    r = p / n
    a = atom / math.sqrt(p)
    pairs = [(-a, r / 2), (a, r / 2)]
    if r < 1:
        pairs.insert(1, (0.0, 1.0 - r))
    return ScalarLaw.discrete(pairs)


def _grid(rng: np.random.Generator, size: int) -> np.ndarray:
    re = rng.uniform(-6.0, 6.0, size)
    im = rng.uniform(0.05, 6.0, size) * rng.choice([-1.0, 1.0], size)
    return re + 1j * im


def _row(identity: str, case: str, residual: float, tolerance: float) -> dict:
    return {"identity": identity, "case": case, "residual": float(residual),
            "tolerance": float(tolerance), "passed": bool(residual <= tolerance)}


def identity_suite(seed: int = 0, v2: float = 1.0) -> list[dict]:
    """Residual table for the Stieltjes, resolvent and cumulant identities.

    Each row carries the residual, its tolerance and a pass flag. Random
    inputs come from ``seed`` so the table is reproducible.
    """
    from . import theory

    rng = np.random.default_rng(seed)
    rows = []

    z = _grid(rng, 100)
    w = theory.stieltjes_w(z, v2)
    rows.append(_row("stieltjes_fixed_point", "100-point grid",
                     np.max(np.abs(w - 1.0 / (-z - v2 * w))), 1e-12))

    z1, z2 = _grid(rng, 200), _grid(rng, 200)
    keep = np.abs(z1 - z2) > 0.5
    z1, z2 = z1[keep][:100], z2[keep][:100]
    w1, w2 = theory.stieltjes_w(z1, v2), theory.stieltjes_w(z2, v2)
    dq = (w1 - w2) / (z1 - z2)
    rows.append(_row("difference_quotient", f"{z1.size} separated pairs",
                     np.max(np.abs(dq - theory.difference_quotient(z1, z2, v2))), 1e-12))

    h8 = rng.standard_normal((8, 8))
    h8 = (h8 + h8.T) / 4
    rows.append(_row("resolvent_derivative", "8x8 off-diagonal (2,5), step 1e-5",
                     resolvent_derivative_residual(h8, (2, 5), 1.5j, 1e-5), 1e-6))
    rows.append(_row("resolvent_derivative", "8x8 diagonal (3,3), step 1e-5",
                     resolvent_derivative_residual(h8, (3, 3), 1.5j, 1e-5), 1e-6))
    rows.append(_row("resolvent_derivative", "1x1 zero matrix, step 1e-4",
                     resolvent_derivative_residual(np.zeros((1, 1)), (0, 0), 3j, 1e-4), 1e-8))

    h6a = rng.standard_normal((6, 6))
    h6b = rng.standard_normal((6, 6))
    res = resolvent_identity_residual(h6a + h6a.T, h6b + h6b.T, 3j, -3j)
    for name, val in res.items():
        rows.append(_row(f"resolvent_{name}", "6x6, z1=3i, z2=-3i", val, 1e-10))

    g = ScalarLaw.gaussian(v2)
    for d in range(4):
        coeffs = [0.0] * d + [1.0]
        rows.append(_row("stein_gaussian", f"F=x^{d}, q=1",
                         cumulant_expansion_residual(g, polynomial_function(coeffs), 1), 1e-12))
    rows.append(_row("stein_gaussian", "F=1/(x-3i), q=1",
                     cumulant_expansion_residual(g, resolvent_function(3j), 1), 1e-12))

    decay_cases = [
        ("entry law n=100 p=10, F=1/(x-3i)", entry_law(100, 10), 3j),
        ("entry law n=300 p=54, F=1/(x-3i)", entry_law(300, 54), 3j),
        ("{+-1 w.p. 0.4, +-3 w.p. 0.1}, F=1/(x-5i)",
         ScalarLaw.discrete([(-3, .1), (-1, .4), (1, .4), (3, .1)]), 5j),
    ]
    for case, law, zz in decay_cases:
        r = [cumulant_expansion_residual(law, resolvent_function(zz), q) for q in (1, 3, 5)]
        # nonincreasing <=> every successive ratio is at most one
        ratio = max(r[1] / r[0], r[2] / r[1]) if r[0] > 0 and r[1] > 0 else 0.0
        rows.append(_row("remainder_decay", f"{case}, q=1,3,5", ratio, 1.0))
    return rows
