from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from dielectric import special_functions as sf

# values frozen from 50-digit mpmath summation of the defining series
# (cross-checked at 200 digits)
PRABHAKAR_ORACLE = [
    (0.6, 1.2, 0.7, -1.5, 0.53239082589991829606),
    (0.9, 0.5, 2.5, 1.8, 65.073746092823830959),
    (1.3, 2.0, -0.4, -2.0, 1.2667385940241027878),
    (0.45, 0.45, 1.5, 0.5 + 1.2j, -0.8470714870579115652 - 0.37422393500755258364j),
    (0.75, 1.0, 0.3, -10.0, 0.41928892974071332833),
    (0.5, 1.0, 1.0, -30.0, 0.018795888861416751497),
    (0.8, 0.8, 0.7, -60.0, 0.015225380330944981629),
    (0.3, 1.0, 1.0, -100.0, 0.007658856222286641491),
]

KILBAS_SAIGO_ORACLE = [
    (0.6, 1.5, 0.25, -2.0, 0.23457765207751571948),
    (0.75, 1.25, -0.5, -3.0, -0.06991671696021128922),
]

LEVY_ORACLE = [
    (0.3, 1.0, 0.11715700256591614931),
    (0.3, 5.0, 0.019154354837293764881),
    (0.7, 0.5, 0.96511911846936176314),
    (0.7, 2.0, 0.107688344874337132),
]


def smirnov(r):
    return r ** -1.5 / (2 * np.sqrt(np.pi)) * np.exp(-1 / (4 * r))


class TestMittagLeffler:
    def test_exponential(self):
        assert sf.ml2(1, 1, 1).value == pytest.approx(math.e, rel=1e-15)

    def test_cosine(self):
        assert sf.ml2(2, 1, -1).value.real == pytest.approx(math.cos(1), rel=1e-14)

    def test_half_order_against_erfc(self):
        val = sf.ml2(0.5, 1, -1).value
        assert val.real == pytest.approx(math.e * special.erfc(1), rel=1e-14)
        assert val.real == pytest.approx(0.42758357615580700441, rel=1e-14)

    def test_error_estimate_is_finite(self):
        res = sf.ml2(0.5, 1, -1)
        assert np.isfinite(res.abs_err_est) and res.abs_err_est >= 0

    @pytest.mark.parametrize("alpha,beta,gamma,z,expected", PRABHAKAR_ORACLE)
    def test_prabhakar_against_oracle(self, alpha, beta, gamma, z, expected):
        val = sf.ml3(alpha, beta, gamma, z).value
        assert abs(val - expected) <= 1e-13 * abs(expected)

    def test_only_constant_term_at_zero(self):
        assert sf.ml3(0.7, 1.3, 2, 0).value.real == pytest.approx(1 / special.gamma(1.3), rel=1e-15)

    def test_gamma_one_reduces_to_ml2(self):
        assert sf.ml3(0.8, 0.8, 1, -0.5).value == pytest.approx(sf.ml2(0.8, 0.8, -0.5).value, rel=1e-15)

    def test_davidson_cole_kernel(self):
        got = sf.ml3(1, 0.6, 0.6, -2).value.real
        assert got == pytest.approx(math.exp(-2) / special.gamma(0.6), rel=1e-13)

    def test_beta_zero_has_no_constant_term(self):
        # E^g_{a,0}(z) = sum_{k>=1}; near z = 0 it is z * g / Gamma(a)
        z = 1e-8
        val = sf.ml3(0.7, 0.0, 1.3, z).value.real
        assert val == pytest.approx(1.3 * z / special.gamma(0.7), rel=1e-6)

    def test_negative_gamma_rising_factorial(self):
        # gamma = -1 truncates the series after the linear term
        z = -0.3
        val = sf.ml3(0.6, 0.4, -1.0, z).value.real
        assert val == pytest.approx(1 / special.gamma(0.4) - z / special.gamma(1.0), rel=1e-14)

    def test_vectorized(self):
        z = np.array([-1.0, -0.1, 0.5])
        out = sf.ml2(0.5, 1, z).value
        assert out.shape == (3,)

    def test_asymptotic_leading_term(self):
        t = 1e3
        one = sf.ml3_asymptotic(0.6, 1.0, 0.7, t, 1).value.real
        assert one == pytest.approx(t ** -0.42 / special.gamma(1 - 0.42), rel=1e-14)

    def test_asymptotic_critical_branch(self):
        a, g = 0.6, 0.7
        t = 50.0
        one = sf.ml3_asymptotic(a, a * g, g, t, 1).value.real
        assert one == pytest.approx(-g * t ** (-a * g - a) / special.gamma(-a), rel=1e-13)

    def test_asymptotic_matches_series(self):
        ref = sf.ml2(0.5, 1, -10).value.real
        got = sf.ml3_asymptotic(0.5, 1, 1, 100.0, 4).value.real
        assert abs(got - ref) <= 1e-6 * abs(ref)

    def test_nonpositive_alpha_rejected(self):
        with pytest.raises(ValueError):
            sf.ml2(0.0, 1, 1)

    def test_zero_gamma_rejected(self):
        with pytest.raises(ValueError):
            sf.ml3(0.5, 1, 0.0, 1)

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75, 1.0])
    def test_relaxation_kernel_positive_decreasing(self, alpha):
        t = np.geomspace(1e-3, 1e3, 60)
        vals = sf.ml2(alpha, 1, -(t ** alpha)).value.real
        # alpha = 1 underflows to exactly 0 beyond t ~ 745; check where representable
        keep = vals > 1e-300
        assert np.all(vals[keep] > 0)
        assert np.all(np.diff(vals) <= 0)


@settings(max_examples=60, deadline=None)
@given(
    alpha=st.floats(0.3, 2.0),
    beta=st.floats(0.2, 2.5),
    gamma=st.floats(-1.5, 2.5).filter(lambda g: abs(g) > 0.05),
    radius=st.floats(0.0, 2.0),
    angle=st.floats(-np.pi, np.pi),
)
def test_series_matches_direct_gamma_ratios(alpha, beta, gamma, radius, angle):
    z = radius * np.exp(1j * angle)
    k = np.arange(400)
    # independent coefficients: (gamma)_k / k! = binom(gamma + k - 1, k), then 1/Gamma(alpha k + beta)
    terms = special.binom(gamma + k - 1, k) * special.rgamma(alpha * k + beta) * z ** k
    ref = terms.sum()
    got = sf.ml3(alpha, beta, gamma, z).value
    scale = np.abs(terms).sum()
    assert abs(got - ref) <= 1e-12 * max(abs(ref), 1e-3 * scale)


class TestKilbasSaigo:
    def test_zero_argument(self):
        assert sf.kilbas_saigo(0.7, 1.3, 0.2, 0.0).value == 1.0

    def test_exponential(self):
        z = np.linspace(-3, 2, 7)
        np.testing.assert_allclose(sf.kilbas_saigo(1, 1, 0, z).value.real, np.exp(z), rtol=1e-14)

    def test_reduces_to_ml2(self):
        t = np.array([0.1, 1.0, 3.0])
        z = -(t ** 0.6)
        np.testing.assert_allclose(sf.kilbas_saigo(0.6, 1, 0, z).value, sf.ml2(0.6, 1, z).value,
                                   rtol=1e-13)

    def test_telescoping_to_shifted_exponential(self):
        # alpha=1, m=1/2, l=-1/2 gives c_n = 2^n / n!
        z = np.array([-1.5, 0.4])
        np.testing.assert_allclose(sf.kilbas_saigo(1, 0.5, -0.5, z).value.real, np.exp(2 * z),
                                   rtol=1e-14)

    @pytest.mark.parametrize("alpha,m,l,z,expected", KILBAS_SAIGO_ORACLE)
    def test_against_oracle(self, alpha, m, l, z, expected):
        assert sf.kilbas_saigo(alpha, m, l, z).value.real == pytest.approx(expected, rel=1e-12)

    def test_domain_error(self):
        # alpha (i m + l) = -1 at i = 0
        with pytest.raises(sf.DomainError):
            sf.kilbas_saigo(0.5, 1.0, -2.0, 0.3)


class TestLevy:
    def test_smirnov_value(self):
        assert sf.levy_extremal_density(0.5, 1.0) == pytest.approx(np.exp(-0.25) / (2 * np.sqrt(np.pi)),
                                                                 rel=1e-13)

    def test_smirnov_grid(self):
        r = np.geomspace(0.05, 20, 50)
        np.testing.assert_allclose(sf.levy_extremal_density(0.5, r), smirnov(r), rtol=1e-10)

    @pytest.mark.parametrize("gamma,r,expected", LEVY_ORACLE)
    def test_against_series_oracle(self, gamma, r, expected):
        assert sf.levy_extremal_density(gamma, r) == pytest.approx(expected, rel=1e-10)

    def test_laplace_identity(self):
        val, _ = integrate.quad(lambda r: np.exp(-r) * sf.levy_extremal_density(0.5, r), 0, np.inf,
                                epsabs=0, epsrel=1e-11, limit=200)
        assert val == pytest.approx(np.exp(-1), rel=1e-9)

    @pytest.mark.parametrize("gamma", [0.3, 0.5, 0.7])
    def test_unit_mass(self, gamma):
        f = lambda u: sf.levy_extremal_density(gamma, np.exp(u)) * np.exp(u)  # noqa: E731
        upper = 60.0
        val, _ = integrate.quad(f, -40, upper, epsabs=0, epsrel=1e-11, limit=400, points=[0.0])
        # heavy tail beyond e^upper from the leading term r^(-1-gamma) / (-Gamma(-gamma))
        val += np.exp(-gamma * upper) / special.gamma(1 - gamma)
        assert val == pytest.approx(1.0, abs=1e-8)

    def test_small_rate_is_negligible(self):
        # the large-r series must not be trusted before its terms decay
        val = sf.levy_extremal_density(0.6475717391772812, 0.0028005)
        assert 0 <= val < 1e-100

    @pytest.mark.parametrize("gamma", [0.0, 1.0, 1.2])
    def test_domain(self, gamma):
        with pytest.raises(sf.DomainError):
            sf.levy_extremal_density(gamma, 1.0)


@settings(max_examples=60, deadline=None)
@given(gamma=st.floats(0.05, 0.95), log_r=st.floats(-3, 3))
def test_levy_series_and_integral_agree(gamma, log_r):
    r = 10.0 ** log_r
    val, biggest = sf._levy_series(gamma, r)
    got = sf.levy_extremal_density(gamma, r)
    assert np.isfinite(got) and got >= 0
    if np.isfinite(val) and val > 1e-250 and biggest / val <= 1e4:
        ref = sf._levy_integral(gamma, r)[0]
        assert got == pytest.approx(ref, rel=1e-9)


class TestIncompleteGamma:
    def test_exponential(self):
        assert sf.upper_incomplete_gamma(1, 2) == pytest.approx(np.exp(-2), rel=1e-15)

    def test_full_gamma_at_zero(self):
        assert sf.upper_incomplete_gamma(0.7, 0) == pytest.approx(special.gamma(0.7), rel=1e-15)

    def test_quadrature_oracle(self):
        # adaptive quadrature of the defining integral
        assert sf.upper_incomplete_gamma(0.5, 1) == pytest.approx(0.2788055852806619765, rel=1e-14)

    def test_large_argument_asymptotics(self):
        z = 200.0
        ratio = sf.upper_incomplete_gamma(0.6, z) / (z ** -0.4 * np.exp(-z))
        assert ratio == pytest.approx(1.0, rel=5e-3)
