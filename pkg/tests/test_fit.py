from __future__ import annotations

import numpy as np
import pytest

from dielectric import fit as ft
from dielectric import models as md
from dielectric.special_functions import DomainError

OMEGA = np.logspace(-3, 3, 60)


def synthetic(model, omega=OMEGA, noise=0.0, seed=0):
    chi = md.susceptibility(model, omega)
    re, im = chi.real, -chi.imag
    if noise:
        rng = np.random.default_rng(seed)
        re = re * (1 + noise * rng.normal(size=re.size))
        im = im * (1 + noise * rng.normal(size=im.size))
    return ft.SpectrumDataset(omega, re, im)


def params(model):
    return np.array(list(ft._physical(model).values()))


def rel_err(fitted, true):
    a, b = params(fitted), params(true)
    return np.max(np.abs(a - b) / np.abs(b))


TRUE = [md.HavriliakNegami(0.8, 0.7, 1.0), md.ColeCole(0.8, 1.0), md.JWS(0.8, 0.7, 1.0),
        md.ExcessWing(0.8, 10.0, 1.0), md.DavidsonCole(0.6, 0.1), md.Debye(3.0)]


class TestDataset:
    def test_from_rows_and_chi(self):
        ds = ft.SpectrumDataset.from_rows([[1.0, 0.5, 0.5], [2.0, 0.2, 0.4]])
        assert len(ds) == 2
        assert ds.chi[0] == 0.5 - 0.5j

    @pytest.mark.parametrize("rows", [[[1.0, 0.5, 0.5], [1.0, 0.2, 0.4]],
                                      [[-1.0, 0.5, 0.5]],
                                      [[1.0, np.nan, 0.5]],
                                      [[1.0, 0.5]]])
    def test_rejects_bad_rows(self, rows):
        with pytest.raises(ft.FitError):
            ft.SpectrumDataset.from_rows(rows)

    def test_eps_pair(self):
        with pytest.raises(ft.FitError):
            ft.SpectrumDataset([1.0], [0.5], [0.5], eps_s=3.0)

    def test_normalize_permittivity(self):
        ds = ft.normalize_permittivity([[1.0, 6.0, 2.0], [10.0, 4.0, 1.0]], eps_s=10.0, eps_inf=2.0)
        np.testing.assert_allclose(ds.chi_re, [0.5, 0.25])
        np.testing.assert_allclose(ds.chi_im, [0.25, 0.125])
        assert (ds.eps_s, ds.eps_inf) == (10.0, 2.0)

    def test_normalize_needs_ordered_permittivities(self):
        with pytest.raises(DomainError):
            ft.normalize_permittivity([[1.0, 6.0, 2.0]], eps_s=2.0, eps_inf=2.0)


class TestConfig:
    def test_alias(self):
        assert ft.FitConfig("Havriliak_Negami").model_kind == "hn"

    @pytest.mark.parametrize("kwargs", [{"model_kind": "nope"}, {"model_kind": "cc", "weighting": "abs"},
                                        {"model_kind": "cc", "weighting": "custom"},
                                        {"model_kind": "cc", "multistart": 0},
                                        {"model_kind": "cc", "tol_step": 0.0}])
    def test_rejects(self, kwargs):
        with pytest.raises(ft.FitError):
            ft.FitConfig(**kwargs)


class TestInitGuess:
    def test_needs_span(self):
        ds = synthetic(md.ColeCole(0.8), np.logspace(0, 1, 10))
        with pytest.raises(ft.FitError):
            ft.init_guess(ds, "cc")

    def test_cole_cole_close(self):
        # three decades on each side of the peak leave the edge slopes near asymptotic
        guess = ft.init_guess(synthetic(md.ColeCole(0.7, 1.0)), "cc")
        assert guess.alpha == pytest.approx(0.7, abs=0.05)
        assert guess.tau == pytest.approx(1.0, rel=1e-6)

    @pytest.mark.parametrize("kind", ["debye", "cc", "dc", "hn", "jws", "kww", "cmv", "ew"])
    def test_admissible_for_every_kind(self, kind):
        assert md.validate(ft.init_guess(synthetic(md.HavriliakNegami(0.8, 0.7)), kind)) == []


class TestObjective:
    def test_zero_at_truth(self):
        m = md.HavriliakNegami(0.8, 0.7)
        assert ft.objective(m, synthetic(m)) == 0.0

    def test_uniform_weights_equal_unweighted(self):
        ds = synthetic(md.ColeCole(0.8), noise=0.01)
        m = md.ColeCole(0.75, 1.2)
        assert ft.objective(m, ds, np.ones(len(ds))) == ft.objective(m, ds)

    def test_custom_weight_length(self):
        ds = synthetic(md.ColeCole(0.8))
        with pytest.raises(ft.FitError):
            ft.fit(ds, ft.FitConfig("cc", weighting="custom", weights=(1.0, 2.0)))


class TestFit:
    @pytest.mark.parametrize("model", TRUE, ids=[m.kind for m in TRUE])
    def test_noiseless_recovery(self, model):
        res = ft.fit(synthetic(model), ft.FitConfig(model.kind, multistart=2))
        assert rel_err(res.model, model) < 1e-6
        assert res.converged

    def test_relative_weighting(self):
        model = md.HavriliakNegami(0.8, 0.7)
        res = ft.fit(synthetic(model), ft.FitConfig("hn", weighting="relative", multistart=2))
        assert rel_err(res.model, model) < 1e-6

    def test_history_non_increasing(self):
        res = ft.fit(synthetic(md.JWS(0.8, 0.7), noise=0.01), ft.FitConfig("jws"))
        assert np.all(np.diff(res.history) <= 0)
        assert res.history[-1] == pytest.approx(res.residual_norm)

    def test_idempotent_on_own_forward_model(self):
        first = ft.fit(synthetic(md.HavriliakNegami(0.8, 0.7), noise=0.01), ft.FitConfig("hn")).model
        again = ft.fit(synthetic(first), ft.FitConfig("hn")).model
        assert rel_err(again, first) < 1e-6

    @pytest.mark.parametrize("c", [1e-2, 37.0])
    def test_scale_equivariance(self, c):
        ds = synthetic(md.HavriliakNegami(0.8, 0.7), noise=0.01, seed=3)
        scaled = ft.SpectrumDataset(ds.omega * c, ds.chi_re, ds.chi_im)
        a = ft.fit(ds, ft.FitConfig("hn")).model
        b = ft.fit(scaled, ft.FitConfig("hn")).model
        assert b.tau * c == pytest.approx(a.tau, rel=1e-6)
        assert b.alpha == pytest.approx(a.alpha, rel=1e-6)
        assert b.gamma == pytest.approx(a.gamma, rel=1e-6)

    def test_deterministic(self):
        ds = synthetic(md.HavriliakNegami(0.8, 0.7), noise=0.01)
        r1 = ft.fit(ds, ft.FitConfig("hn", seed=5))
        r2 = ft.fit(ds, ft.FitConfig("hn", seed=5))
        assert r1.to_dict() == r2.to_dict()

    def test_debye_data_with_cole_cole(self):
        res = ft.fit(synthetic(md.Debye(1.0)), ft.FitConfig("cc", multistart=2))
        assert res.model.alpha == pytest.approx(1.0, abs=1e-6)

    def test_stderr_reported(self):
        res = ft.fit(synthetic(md.ColeCole(0.8), noise=0.01), ft.FitConfig("cc"))
        assert set(res.stderr) == set(ft._physical(res.model))
        assert all(np.isfinite(v) and v > 0 for v in res.stderr.values())

    def test_too_few_rows(self):
        ds = synthetic(md.HavriliakNegami(0.8, 0.7), np.logspace(-1, 1, 3))
        with pytest.raises(ft.FitError):
            ft.fit(ds, ft.FitConfig("hn"), start=md.HavriliakNegami(0.8, 0.7))
