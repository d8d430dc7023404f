import math

import numpy as np
import pytest

import sysrisk as sr


def random_subcritical_model(rng, c1_max=0.9):
    n1 = int(rng.integers(2, 8))
    n2 = int(rng.integers(2, 30))
    c1 = float(rng.uniform(0.3, c1_max))
    c2 = float(rng.uniform(0.2, 1.0)) * c1
    probe = sr.TwoTypeModel(n1=n1, n2=n2, c1=c1, c2=c2)
    kappa = float(rng.uniform(0.0, probe.kappa_max))
    return sr.TwoTypeModel(n1=n1, n2=n2, c1=c1, c2=c2, kappa=kappa)


class TestTwoTypeMatrix:
    def test_block_diagonal_at_zero_mixing(self):
        model = sr.TwoTypeModel(n1=2, n2=3, c1=1.0, c2=0.5)
        lam = sr.two_type_lambda_matrix(model).matrix
        assert np.allclose(lam[:2, :2], 0.5)
        assert np.allclose(lam[2:, 2:], 0.5 / 3)
        assert np.all(lam[:2, 2:] == 0.0)
        assert np.all(lam[2:, :2] == 0.0)

    def test_displayed_five_bank_form(self):
        # assortative part plus kappa times the mixing pattern, entrywise
        kappa = 0.05
        model = sr.TwoTypeModel(n1=2, n2=3, c1=1.0, c2=0.5, kappa=kappa)
        lam = sr.two_type_lambda_matrix(model).matrix
        base = np.zeros((5, 5))
        base[:2, :2] = 1.0 / 2
        base[2:, 2:] = 0.5 / 3
        delta = np.zeros((5, 5))
        delta[:2, :2] = -3.0 / 2
        delta[:2, 2:] = 1.0
        delta[2:, :2] = 1.0
        delta[2:, 2:] = -2.0 / 3
        assert np.allclose(lam, base + kappa * delta, atol=1e-15)

    def test_row_sums_invariant_in_kappa(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            model = random_subcritical_model(rng)
            lam = sr.two_type_lambda_matrix(model).matrix
            sums = lam.sum(axis=1)
            assert np.allclose(sums[:model.n1], model.c1, atol=1e-12)
            assert np.allclose(sums[model.n1:], model.c2, atol=1e-12)

    def test_mixing_pattern_columns_annihilate(self):
        model0 = sr.TwoTypeModel(n1=3, n2=7, c1=0.9, c2=0.4)
        kappa = model0.kappa_max / 2
        model1 = sr.TwoTypeModel(n1=3, n2=7, c1=0.9, c2=0.4, kappa=kappa)
        delta = (sr.two_type_lambda_matrix(model1).matrix
                 - sr.two_type_lambda_matrix(model0).matrix) / kappa
        assert np.abs(delta.sum(axis=0)).max() < 1e-12

    def test_kappa_out_of_range(self):
        with pytest.raises(sr.KappaOutOfRange):
            sr.TwoTypeModel(n1=5, n2=50, c1=2.0, c2=0.5, kappa=0.05)
        with pytest.raises(sr.KappaOutOfRange):
            sr.TwoTypeModel(n1=5, n2=50, c1=2.0, c2=0.5, kappa=-0.01)


class TestTwoTypeSpectralRadius:
    def test_paper_values(self):
        base = sr.TwoTypeModel(n1=5, n2=50, c1=2.0, c2=0.5)
        assert sr.two_type_spectral_radius(base) == 2.0
        assert base.kappa_max == pytest.approx(0.04, abs=1e-15)
        mixed = sr.TwoTypeModel(n1=5, n2=50, c1=2.0, c2=0.5, kappa=0.04)
        assert abs(sr.two_type_spectral_radius(mixed) - 0.8) < 1e-12

    def test_matches_power_iteration(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            model = random_subcritical_model(rng, c1_max=1.8)
            closed = sr.two_type_spectral_radius(model)
            numeric = sr.two_type_lambda_matrix(model).spectral_radius()
            assert abs(closed - numeric) < 1e-10


class TestTwoTypePsi:
    def test_reduces_to_constant_leverage(self):
        model = sr.TwoTypeModel(n1=4, n2=4, c1=0.5, c2=0.5)
        assert abs(sr.two_type_psi(model, 300) - 2.0) < 1e-12

    def test_weighted_closed_form_vs_numeric_series(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            model = random_subcritical_model(rng)
            base = sr.TwoTypeModel(n1=model.n1, n2=model.n2, c1=model.c1,
                                   c2=model.c2)
            closed = sr.two_type_psi(base, 200)
            expected = sum((base.n1 * base.c1**t + base.n2 * base.c2**t)
                           for t in range(200)) / base.n_banks
            assert abs(closed - expected) < 1e-10
            # force the numeric path with an explicitly zero-kappa matrix
            lm = sr.two_type_lambda_matrix(base)
            w = lm.equity_weights.copy()
            total = float(w.sum())
            for _ in range(1, 200):
                w = lm.matrix.T @ w
                total += float(w.sum())
            assert abs(closed - total) < 1e-10

    def test_monotone_in_kappa(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            model = random_subcritical_model(rng)
            grid = np.linspace(0.0, model.kappa_max, 10)
            psis = [sr.two_type_psi(
                sr.TwoTypeModel(n1=model.n1, n2=model.n2, c1=model.c1,
                                c2=model.c2, kappa=float(k)), 600)
                for k in grid]
            for a, b in zip(psis, psis[1:]):
                assert b <= a + 1e-10


class TestTwoTypeExposureMatrix:
    def test_valid_and_diagonal_free(self):
        m = sr.two_type_exposure_matrix(
            sr.TwoTypeModel(n1=5, n2=50, c1=0.9, c2=0.5, kappa=0.005))
        assert sr.validate_exposures(m).ok
        assert np.all(np.diagonal(m.alpha) == 0.0)

    def test_psi_preserved_by_diagonal_clearing(self):
        for kappa in (0.0, 0.004, 0.008):
            model = sr.TwoTypeModel(n1=4, n2=9, c1=0.8, c2=0.36, kappa=kappa)
            with_self_links = sr.two_type_psi(model, 150)
            cleared = sr.two_type_exposure_matrix(model)
            report = sr.psi_full(cleared, 150)
            assert abs(report.psi_total - with_self_links) < 1e-12

    def test_single_bank_type_rejected(self):
        model = sr.TwoTypeModel(n1=1, n2=8, c1=0.9, c2=0.4)
        with pytest.raises(ValueError):
            sr.two_type_exposure_matrix(model)


class TestConstantLeverage:
    def test_zero_leverage(self):
        assert sr.constant_leverage_psi(0.0, 100) == 1.0

    def test_half_leverage(self):
        assert abs(sr.constant_leverage_psi(0.5, 200) - 2.0) < 1e-12
        assert sr.constant_leverage_psi_limit(0.5) == 2.0
        assert math.isinf(sr.constant_leverage_psi_limit(1.0))

    def test_stochastic_matrix_identity(self, rng):
        # under constant asset leverage, alpha/(e*C) is row-stochastic and
        # stays row-stochastic under powers
        from conftest import constant_asset_leverage_bank_set, \
            random_walk_alpha
        C = 0.6
        bs = constant_asset_leverage_bank_set(rng, 8, C)
        m = random_walk_alpha(sr.initial_feasible_matrix(bs), rng, 100)
        s = m.alpha / (bs.e[:, None] * C)
        power = np.eye(8)
        for _ in range(10):
            power = s @ power
            assert np.abs(power.sum(axis=1) - 1.0).max() < 1e-12
