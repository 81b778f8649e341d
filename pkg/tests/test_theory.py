import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from dilute_wigner import theory as th
from dilute_wigner.ensemble import EntryLaw
from dilute_wigner.theory import DomainError, InconsistentMomentsError, TheoryParams

GAUSS_300 = TheoryParams(1.0, 3.0, 15.0, 300, 54)


def _w_mp(z, v2=1.0):
    """Herglotz root of v2 w^2 + z w + 1 = 0 in 50-digit arithmetic."""
    mpmath.mp.dps = 50
    z = mpmath.mpc(z)
    d = mpmath.sqrt(z * z - 4 * v2)
    for w in ((-z + d) / (2 * v2), (-z - d) / (2 * v2)):
        if mpmath.im(w) * mpmath.im(z) > 0:
            return complex(w)
    raise AssertionError("no Herglotz root")


# --- Stieltjes transform ---------------------------------------------------------

def test_w_hand_values():
    assert th.stieltjes_w(3j) == pytest.approx(0.302776j, abs=1e-6)
    assert th.stieltjes_w(3j) == pytest.approx((math.sqrt(13) - 3) / 2 * 1j, abs=1e-15)
    assert th.stieltjes_w(-3j) == pytest.approx(-0.302776j, abs=1e-6)
    assert th.stieltjes_w(0.0, boundary=True) == pytest.approx(1j)
    assert th.stieltjes_w(0.0, 4.0, boundary=True) == pytest.approx(0.5j)
    with pytest.raises(DomainError):
        th.stieltjes_w(1.0)


@given(re=st.floats(-8, 8), im=st.floats(1e-3, 8), sign=st.sampled_from([-1, 1]), v2=st.floats(0.2, 4))
@settings(max_examples=200, deadline=None)
def test_w_against_extended_precision(re, im, sign, v2):
    z = complex(re, sign * im)
    w = th.stieltjes_w(z, v2)
    assert w.imag * z.imag > 0
    assert abs(w - _w_mp(z, v2)) <= 1e-12 * max(1.0, abs(w))
    assert abs(w + 1 / (z + v2 * w)) <= 1e-12


def test_w_boundary_values():
    lam = np.linspace(-1.99, 1.99, 41)
    w = th.stieltjes_w(lam, boundary=True)
    assert np.all(w.imag >= 0)
    assert np.allclose(np.abs(w) ** 2, 1.0)
    assert np.max(np.abs(w + 1 / (lam + w))) <= 1e-12
    near = th.stieltjes_w(lam + 1e-12j)
    assert np.allclose(w, near, atol=1e-6)
    out = th.stieltjes_w(np.array([3.0, -3.0]), boundary=True)
    assert np.allclose(out, th.stieltjes_w(np.array([3.0 + 1e-14j, -3.0 + 1e-14j])), atol=1e-9)


def test_w_vectorized_grid_branch():
    re, im = np.meshgrid(np.linspace(-6, 6, 10), np.linspace(-6, 6, 10))
    z = (re + 1j * im).ravel()
    z = z[z.imag != 0]
    w = th.stieltjes_w(z)
    assert np.all(w.imag * z.imag > 0)
    assert np.max(np.abs(w + 1 / (z + w))) <= 1e-12


# --- semicircle ------------------------------------------------------------------

def test_semicircle_density_values():
    assert th.semicircle_density(0.0) == pytest.approx(1 / math.pi)
    assert th.semicircle_density(0.0) == pytest.approx(0.318310, abs=1e-6)
    assert th.semicircle_density(2.0) == 0.0
    assert th.semicircle_density(-3.0) == 0.0
    for v2 in (1.0, 2.5):
        total = integrate.quad(lambda x: th.semicircle_density(x, v2), -2 * math.sqrt(v2), 2 * math.sqrt(v2))[0]
        assert total == pytest.approx(1.0, abs=1e-10)


def test_density_is_boundary_im_w():
    lam = np.linspace(-1.9, 1.9, 17)
    assert np.allclose(th.semicircle_density(lam), th.stieltjes_w(lam, boundary=True).imag / math.pi)


def test_semicircle_cdf():
    assert th.semicircle_cdf(0.0) == pytest.approx(0.5)
    assert th.semicircle_cdf(2.0) == pytest.approx(1.0)
    assert th.semicircle_cdf(-2.5) == 0.0
    assert th.semicircle_cdf(9.0) == 1.0
    h = 1e-5
    for lam in np.linspace(-1.8, 1.8, 13):
        fd = (th.semicircle_cdf(lam + h) - th.semicircle_cdf(lam - h)) / (2 * h)
        assert fd == pytest.approx(th.semicircle_density(lam), abs=1e-7)
    grid = np.linspace(-2, 2, 9)
    quad = [integrate.quad(th.semicircle_density, -2, x)[0] for x in grid]
    assert np.allclose(th.semicircle_cdf(grid), quad, atol=1e-10)


def test_inversion_error_is_order_eps():
    lam = np.array([-1.2, 0.0, 0.7])
    errs = [np.max(np.abs(th.stieltjes_inversion(lam, eps) - th.semicircle_density(lam)))
            for eps in (1e-2, 1e-3, 1e-4)]
    assert errs[0] > errs[1] > errs[2]
    for eps, e in zip((1e-2, 1e-3, 1e-4), errs):
        assert e <= 2 * eps


# --- S, T, C ----------------------------------------------------------------------

def test_S_T_hand_values():
    assert th.S_leading(3j, -3j) == pytest.approx(0.0085470, abs=1e-7)
    assert th.T_leading(3j, -3j) == pytest.approx(0.00064648, abs=1e-7)
    assert th.T_leading(3j, -3j) == pytest.approx(abs(th.stieltjes_w(3j)) ** 6 / (1 + abs(th.stieltjes_w(3j)) ** 2) ** 2)
    assert th.difference_quotient(3j, -3j) == pytest.approx(0.100925, abs=1e-6)
    assert np.imag(th.S_leading(3j, -3j)) == pytest.approx(0.0, abs=1e-18)


@given(st.complex_numbers(max_magnitude=6), st.complex_numbers(max_magnitude=6))
@settings(max_examples=100, deadline=None)
def test_symmetries(z1, z2):
    if abs(z1.imag) < 0.1 or abs(z2.imag) < 0.1 or abs(z1 - z2) < 0.1:
        return
    assert th.S_leading(z1, z2) == pytest.approx(th.S_leading(z2, z1), rel=1e-10)
    assert th.T_leading(z1, z2) == pytest.approx(th.T_leading(z2, z1), rel=1e-12)
    w1, w2 = th.stieltjes_w(z1), th.stieltjes_w(z2)
    q1, q2 = th.q_limit(z1), th.q_limit(z2)
    assert th.T_leading(z1, z2) == pytest.approx(q1 * q2 * w1**2 * w2**2, rel=1e-12)
    assert th.difference_quotient(z1, z2) == pytest.approx((w1 - w2) / (z1 - z2), rel=1e-9, abs=1e-12)


def test_S_diagonal_is_limit():
    z = 0.5 + 3j
    assert th.S_leading(z, z) == th.S_diagonal(z)
    assert th.S_leading(z, z + 1e-6) == pytest.approx(th.S_diagonal(z), rel=1e-5)
    wp = th.w_prime(z)
    h = 1e-5
    fd = (th.stieltjes_w(z + h) - th.stieltjes_w(z - h)) / (2 * h)
    assert wp == pytest.approx(fd, rel=1e-8)


def test_C_leading_example():
    c = th.C_leading(GAUSS_300, 3j, -3j)
    s_part = 2 / 300**2 * th.S_leading(3j, -3j)
    assert s_part == pytest.approx(1.8993e-7, rel=1e-4)
    assert c - s_part == pytest.approx(1.9634e-7, rel=1e-4)
    assert c == pytest.approx(3.8627e-7, rel=1e-4)


def test_C_leading_full_dilution_matches_cumulant_form():
    n = 200
    for law in (EntryLaw.gaussian(), EntryLaw.rademacher(), EntryLaw.symmetric_uniform()):
        params = TheoryParams.from_law(law, n, n)
        k4 = law.V4 - 3 * law.v2**2
        z1, z2 = 0.3 + 3j, -1 - 4j
        expect = 2 / n**2 * (law.v2 * th.S_leading(z1, z2) + k4 * th.T_leading(z1, z2))
        assert th.C_leading(params, z1, z2) == pytest.approx(expect, rel=1e-12)
    gauss = TheoryParams.from_law(EntryLaw.gaussian(), n, n)
    assert th.C_leading(gauss, 3j, -3j) == pytest.approx(2 / n**2 * th.S_leading(3j, -3j), rel=1e-12)


def test_theory_params_validation():
    with pytest.raises(InconsistentMomentsError):
        TheoryParams(1.0, 0.5, 1.0, 10, 5)
    with pytest.raises(ValueError):
        TheoryParams(1.0, 3.0, 15.0, 10, 20)
    p = TheoryParams.from_law(EntryLaw.rademacher(), 100, 10)
    assert (p.v2, p.V4, p.V6) == (1.0, 1.0, 1.0)


# --- cumulants ---------------------------------------------------------------------

def test_cumulants_from_moments():
    assert th.cumulants_from_moments(1, 3, 15) == (1, 0, 0)
    assert th.cumulants_from_moments(1, 1, 1) == (1, -2, 16)
    assert th.cumulants_from_moments(0, 0, 0) == (0, 0, 0)
    with pytest.raises(InconsistentMomentsError):
        th.cumulants_from_moments(0, 1, 0)
    with pytest.raises(InconsistentMomentsError):
        th.cumulants_from_moments(1, 0.5, 1)


def test_entry_cumulants():
    p = TheoryParams(1.0, 3.0, 15.0, 100, 10)
    k2, k4, k6 = th.entry_cumulants(p)
    assert (k2, k4) == pytest.approx((0.01, 0.0027))
    assert k6 == pytest.approx((15 - 15 * 3 * 0.1 + 30 * 0.01) / (100 * 100))
    d2, d4, d6 = th.entry_cumulants(p, diagonal=True)
    assert (d2, d4, d6) == pytest.approx((2 * k2, 4 * k4, 8 * k6))
    assert th.entry_cumulants(TheoryParams(1.0, 3.0, 15.0, 50, 50))[1] == pytest.approx(0.0, abs=1e-18)


def test_entry_cumulants_against_exact_entry_law():
    # the entry a*d/sqrt(p) is discrete for Rademacher a; sum its moments directly
    n, p = 60, 7.5
    r, a = p / n, 1 / math.sqrt(p)
    mu = {k: r * a**k for k in (2, 4, 6)}
    exact = th.cumulants_from_moments(mu[2], mu[4], mu[6])
    model = th.entry_cumulants(TheoryParams(1.0, 1.0, 1.0, n, p))
    assert model == pytest.approx(exact, rel=1e-12)


# --- q and predictions --------------------------------------------------------------

def test_q_values_and_bound():
    assert th.q_limit(3j) == pytest.approx(0.277351j, abs=1e-6)
    assert th.q_finite(3j, th.stieltjes_w(3j)) == pytest.approx(th.q_limit(3j), rel=1e-15)
    for z in (3j, 2 + 3j, -5 - 3.5j, 10j):
        assert abs(th.q_limit(z)) <= 2 / abs(z.imag)


def test_predictions_match_stated_values():
    assert th.predict_E_g(3j) == pytest.approx(0.302776j, abs=1e-6)
    assert th.predict_E_trG2(3j) == pytest.approx(-0.0839752, abs=1e-6)
    assert th.predict_B12(3j, -3j) == pytest.approx(0.0916735, abs=1e-6)
    assert th.predict_U12(3j, -3j) == pytest.approx(0.0254258j, abs=1e-6)
    assert th.predict_L(3j, -3j) == pytest.approx(th.predict_U12(3j, -3j) * th.predict_B12(3j, -3j), rel=1e-14)
    # exact closed forms
    w = (math.sqrt(13) - 3) / 2
    assert th.predict_E_trG2(3j) == pytest.approx(-w * w / (1 + w * w), rel=1e-14)
    assert th.predict_U12(3j, -3j) == pytest.approx(w**3 / (1 + w * w) * 1j, rel=1e-14)
    assert set(th.PREDICTORS) == {"g", "trG2", "B12", "U12", "L"}


# --- local scale -----------------------------------------------------------------------

def test_density_density_example():
    n, p = 10_000, 1585
    val = th.density_density_leading(-5e-5, 5e-5, TheoryParams(1.0, 3.0, 15.0, n, p))
    assert val == pytest.approx(-0.101321, abs=1e-6)
    assert abs(val - th.universality_limit(1.0)) < 1e-5
    assert val - th.universality_limit(1.0) == pytest.approx(8e-9, abs=1e-9)


def test_density_density_structure():
    p = TheoryParams(1.0, 3.0, 15.0, 1000, 251)
    assert th.density_density_leading(0.3, -0.7, p) == pytest.approx(th.density_density_leading(-0.7, 0.3, p))
    with pytest.raises(DomainError):
        th.density_density_leading(2.0, 0.0, p)
    with pytest.raises(DomainError):
        th.density_density_leading(0.1, 0.1, p)
    # the third term is never positive at the origin
    no_v4 = TheoryParams(1.0, 1.0, 1.0, 1000, 1000)
    base = th.density_density_leading(-1e-4, 1e-4, no_v4)
    sine = -(4 - (-1e-4) * 1e-4) / (math.pi**2 * (1000 * 2e-4) ** 2 * (4 - 1e-8))
    second = 1 / (1000 * 1000 * 2 * math.pi**2) * (2 - 1e-8) ** 2 / (4 - 1e-8)
    assert base - sine - second <= 0


def test_universality_limit():
    assert th.universality_limit(1.0) == pytest.approx(-0.1013212, abs=1e-7)
    assert th.universality_limit(2.0) == pytest.approx(-0.0253303, abs=1e-7)
    for s in (0.5, 3.0, 7.0):
        assert th.universality_limit(s) * s * s == pytest.approx(-1 / math.pi**2)
    with pytest.raises(DomainError):
        th.universality_limit(0.0)


def test_universality_error_decreases():
    errs = []
    for n in (100, 1000, 10_000):
        p = n**0.8
        val = th.density_density_leading(-0.5 / n, 0.5 / n, TheoryParams(1.0, 3.0, 15.0, n, p))
        errs.append(abs(val - th.universality_limit(1.0)))
    assert errs[0] > errs[1] > errs[2]


@pytest.mark.parametrize("lam", [0.0, 1.0, -1.5, 1.999])
def test_edge_relations(lam):
    r_re, r_im = th.edge_relations_check(lam)
    assert r_re <= 1e-12 and r_im <= 1e-12
    r_re, r_im = th.edge_relations_check(lam * 1.5, v2=2.25)
    assert r_re <= 1e-12 and r_im <= 1e-12
    with pytest.raises(DomainError):
        th.edge_relations_check(2.0)
