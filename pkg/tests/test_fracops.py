from __future__ import annotations

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from dielectric import fracops as fo
from dielectric import models as md


def _omega_oracle(alpha, gamma, lam, h, n):
    """Taylor coefficients of (((1 - x)^alpha + c) / (1 + c))^gamma, c = h^alpha lam, at 40 digits."""
    mp.mp.dps = 40
    c = mp.mpf(h) ** alpha * lam
    g = lambda x: (((1 - x) ** alpha + c) / (1 + c)) ** gamma  # noqa: E731
    return np.array([float(v) for v in mp.taylor(g, 0, n)])


def observed_order(errors, steps):
    e = np.log(np.asarray(errors))
    return np.polyfit(np.log(np.asarray(steps)), e, 1)[0]


class TestWeights:
    @pytest.mark.parametrize("alpha", [0.3, 0.6, 0.95])
    def test_gl_against_binomial(self, alpha):
        mp.mp.dps = 30
        ref = np.array([float((-1) ** k * mp.binomial(alpha, k)) for k in range(513)])
        np.testing.assert_allclose(fo.gl_weights(alpha, 512).weights, ref, rtol=1e-13, atol=0)

    def test_gl_integer_order(self):
        w = fo.gl_weights(1.0, 5).weights
        np.testing.assert_array_equal(w, [1, -1, 0, 0, 0, 0])

    def test_gl_weights_sum_to_zero(self):
        # sum of all weights is (1 - 1)^alpha = 0; the tail decays like k^(-1-alpha)
        w = fo.gl_weights(0.7, 20000).weights
        assert abs(w.sum()) < 20000 ** -0.7

    def test_bdf2_integer_order(self):
        np.testing.assert_allclose(fo.bdf2_weights(1.0, 4), [1.5, -2.0, 0.5, 0, 0], atol=1e-15)

    def test_bdf2_square(self):
        w = fo.bdf2_weights(0.5, 30)
        sq = np.convolve(w, w)[:31]
        ref = np.zeros(31)
        ref[:3] = [1.5, -2.0, 0.5]
        np.testing.assert_allclose(sq, ref, atol=1e-13)

    def test_prabhakar_reduces_to_gl(self):
        table = fo.prabhakar_weights(0.7, 1.0, 0.0, 0.01, 512)
        np.testing.assert_allclose(table.omega_caps, fo.gl_weights(0.7, 512).weights, rtol=0, atol=1e-13)
        assert table.prefactor == pytest.approx(0.01 ** -0.7)

    def test_prabhakar_against_power_series(self):
        table = fo.prabhakar_weights(0.8, 0.7, 1.0, 0.01, 64)
        ref = _omega_oracle(0.8, 0.7, 1.0, 0.01, 64)
        np.testing.assert_allclose(table.omega_caps, ref, rtol=1e-12, atol=1e-16)

    def test_validation(self):
        with pytest.raises(ValueError):
            fo.gl_weights(0.5, 0)
        with pytest.raises(ValueError):
            fo.prabhakar_weights(0.5, 1.0, 1.0, 0.0, 10)


class TestDerivatives:
    def test_caputo_of_power(self):
        # D^a t = t^(1-a) / Gamma(2-a); GL is first order
        a, h = 0.5, 1e-3
        t = h * np.arange(1001)
        got = fo.caputo_derivative(t, a, h)
        assert got[-1] == pytest.approx(1 / special.gamma(1.5), rel=2e-3)

    def test_bdf2_of_square(self):
        a, h = 0.5, 1e-3
        t = h * np.arange(1001)
        got = fo.caputo_derivative(t ** 2, a, h, scheme="bdf2")
        assert got[-1] == pytest.approx(2 / special.gamma(2.5), rel=1e-4)

    def test_constant_annihilated(self):
        assert np.all(fo.caputo_derivative(np.full(50, 3.0), 0.4, 0.1) == 0)
        assert np.all(fo.prabhakar_derivative(np.full(50, 3.0), 0.8, 0.7, 1.0, 0.1) == 0)

    def test_prabhakar_gamma_one_lam_zero_is_caputo(self):
        f = np.sin(np.linspace(0, 2, 200))
        h = 2 / 199
        np.testing.assert_allclose(fo.prabhakar_derivative(f, 0.6, 1.0, 0.0, h),
                                   fo.caputo_derivative(f, 0.6, h), rtol=1e-12, atol=1e-14)

    def test_davidson_cole_response_annihilated(self):
        # (D + 1/tau)^g applied to the DC response vanishes; error falls like h^g
        g, tau = 0.6, 1.0
        errs, hs = [], [2.0 ** -k for k in range(5, 11)]
        for h in hs:
            t = h * np.arange(int(2 / h) + 1)
            phi = np.zeros_like(t)
            phi[1:] = md.response(md.DavidsonCole(g, tau), t[1:])
            d = fo.prabhakar_derivative(phi, 1.0, g, 1 / tau, h, regularized=False)
            errs.append(np.max(np.abs(d[[int(0.5 / h), int(1 / h), int(2 / h)]])))
        assert np.all(np.diff(errs) < 0)
        assert observed_order(errs, hs) > 0.5

    def test_exponential_conjugation(self):
        # with alpha = 1 the weights act as e^(-t/tau) D^g e^(t/tau), up to O(h)
        g, tau = 0.6, 2.0
        gaps = []
        for h in (2.0 ** -6, 2.0 ** -8):
            t = h * np.arange(int(2 / h) + 1)
            f = np.sin(3 * t) + t ** 2
            w = fo.gl_weights(g, t.size - 1).weights
            conj = np.exp(-t / tau) * np.convolve(w, np.exp(t / tau) * f)[:t.size] / h ** g
            d = fo.prabhakar_derivative(f, 1.0, g, 1 / tau, h, regularized=False)
            gaps.append(np.max(np.abs(d - conj)))
        assert gaps[1] < gaps[0] / 3

    def test_prabhakar_rejects_large_order(self):
        with pytest.raises(ValueError):
            fo.prabhakar_derivative(np.ones(5), 0.9, 1.5, 1.0, 0.1)

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            fo.caputo_derivative(np.ones(5), 0.5, 0.1, scheme="l1")


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.05, 1.0), c1=st.floats(-5, 5), c2=st.floats(-5, 5), seed=st.integers(0, 2 ** 16))
def test_caputo_linear(a, c1, c2, seed):
    rng = np.random.default_rng(seed)
    f, g = rng.normal(size=(2, 64))
    lhs = fo.caputo_derivative(c1 * f + c2 * g, a, 0.05)
    rhs = c1 * fo.caputo_derivative(f, a, 0.05) + c2 * fo.caputo_derivative(g, a, 0.05)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-9)


STEPS = [2.0 ** -k for k in range(4, 11)]
CHECK = [0.5, 1.0, 2.0]


class TestEvolution:
    @pytest.mark.parametrize("model", [md.ColeCole(0.6, 1.0), md.HavriliakNegami(0.8, 0.7, 1.0),
                                       md.JWS(0.8, 0.7, 1.0), md.ExcessWing(0.8, 10.0, 1.0),
                                       md.Debye(1.0), md.DavidsonCole(0.6, 1.0)],
                             ids=["cc", "hn", "jws", "ew", "debye", "dc"])
    def test_first_order_convergence(self, model):
        errs = [fo.evolution_residual(model, CHECK, h) for h in STEPS]
        assert observed_order(errs, STEPS) >= 0.9

    def test_kww_exact(self):
        assert fo.evolution_residual(md.KWW(0.5, 1.0), CHECK, 2 ** -6) < 1e-12

    def test_off_grid_rejected(self):
        with pytest.raises(ValueError):
            fo.evolution_residual(md.ColeCole(0.5), [0.3], 0.25)


class TestConstitutive:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            fo.ConstitutiveConfig(1.0, 0.0, 0.0, 10)
        with pytest.raises(ValueError):
            fo.ConstitutiveConfig(1.0, 0.0, 0.1, fo.MAX_STEPS + 1)
        with pytest.raises(ValueError):
            fo.ConstitutiveConfig(-1.0, 0.0, 0.1, 10)

    def test_field_length_checked(self):
        cfg = fo.ConstitutiveConfig(1.0, 0.0, 0.1, 10)
        with pytest.raises(ValueError):
            fo.solve_polarization(md.Debye(), np.zeros(10), cfg)

    def test_unsupported(self):
        cfg = fo.ConstitutiveConfig(1.0, 1.0, 0.1, 10)
        with pytest.raises(md.UnsupportedModelError):
            fo.solve_polarization(md.KWW(0.5), np.zeros(11), cfg)

    def test_options_restricted(self):
        cfg = fo.ConstitutiveConfig(1.0, 1.0, 0.1, 10)
        with pytest.raises(ValueError):
            fo.solve_polarization(md.HavriliakNegami(0.8, 0.7), np.zeros(11), cfg, scheme="bdf2")

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.9])
    def test_cole_cole_free_decay(self, alpha):
        h = 1 / 1024
        cfg = fo.ConstitutiveConfig(1.0, 1.0, h, 2048)
        p = fo.solve_polarization(md.ColeCole(alpha, 1.0), np.zeros(2049), cfg, correct_start=True)
        ref = md.relaxation(md.ColeCole(alpha, 1.0), h * np.arange(2049))
        assert np.max(np.abs(p - ref)) < 1e-3

    def test_debye_step_second_order(self):
        errs = []
        hs = [2.0 ** -k for k in (6, 7, 8)]
        for h in hs:
            n = int(round(4 / h))
            cfg = fo.ConstitutiveConfig(2.0, 0.0, h, n)
            p = fo.solve_polarization(md.Debye(1.0), np.ones(n + 1), cfg, scheme="bdf2", correct_start=True)
            errs.append(np.max(np.abs(p - 2.0 * -np.expm1(-h * np.arange(n + 1)))))
        assert observed_order(errs, hs) > 1.8

    # plain GL converges only like h^(1 - alpha) for the excess wing, whose
    # solution is not smooth at the origin, so that case uses the start correction
    @pytest.mark.parametrize("model,correct", [(md.HavriliakNegami(0.8, 0.7), False), (md.JWS(0.8, 0.7), False),
                                               (md.DavidsonCole(0.6), False), (md.ExcessWing(0.6, 2.0, 1.0), True)],
                             ids=["hn", "jws", "dc", "ew"])
    def test_free_decay_follows_relaxation(self, model, correct):
        h = 2 ** -9
        n = 1024
        cfg = fo.ConstitutiveConfig(1.0, 1.0, h, n)
        p = fo.solve_polarization(model, np.zeros(n + 1), cfg, correct_start=correct)
        t = h * np.arange(n + 1)
        far = t >= 0.5
        assert np.max(np.abs(p[far] - md.relaxation(model, t[far]))) < 2e-2


MODELS_FOR_LINEARITY = [md.Debye(0.5), md.ColeCole(0.6), md.HavriliakNegami(0.8, 0.7), md.JWS(0.8, 0.7),
                        md.DavidsonCole(0.6), md.ExcessWing(0.6, 2.0, 1.0)]


@settings(max_examples=30, deadline=None)
@given(idx=st.integers(0, len(MODELS_FOR_LINEARITY) - 1), a=st.floats(-3, 3), b=st.floats(-3, 3),
       seed=st.integers(0, 2 ** 16))
def test_solver_linear_in_field_and_start(idx, a, b, seed):
    model = MODELS_FOR_LINEARITY[idx]
    rng = np.random.default_rng(seed)
    e1, e2 = rng.normal(size=(2, 65))
    p1, p2 = rng.normal(size=2)
    solve = lambda e, p: fo.solve_polarization(model, e, fo.ConstitutiveConfig(1.5, p, 0.05, 64))  # noqa: E731
    lhs = solve(a * e1 + b * e2, a * p1 + b * p2)
    rhs = a * solve(e1, p1) + b * solve(e2, p2)
    scale = 1 + np.max(np.abs(rhs))
    assert np.max(np.abs(lhs - rhs)) < 1e-10 * scale


@pytest.mark.parametrize("alpha,gamma,tau", [(0.8, 0.7, 2.0), (0.5, 1.5, 1.0)])
def test_hn_memory_operator_start_value(alpha, gamma, tau):
    # the kernel operator applied to phi_HN tends to tau^(-alpha*gamma) as t -> 0+
    from scipy import integrate

    from dielectric import special_functions as sf

    ag = alpha * gamma
    lam = tau ** -alpha
    model = md.HavriliakNegami(alpha, gamma, tau)

    def apply(t):
        def smooth(u):
            u = max(u, 1e-300)
            kernel = np.real(sf.ml3(alpha, 1 - ag, -gamma, -lam * (t - u) ** alpha).value)
            return kernel * md.response(model, u) * u ** (1 - ag)

        return integrate.quad(smooth, 0, t, weight="alg", wvar=(ag - 1, -ag), epsabs=0, epsrel=1e-10, limit=200)[0]

    h = 1e-2
    values = [apply(t) for t in (h, h / 2, h / 4)]
    np.testing.assert_allclose(values, tau ** -ag, rtol=1e-8)
