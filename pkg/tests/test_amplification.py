import math

import numpy as np
import pytest

import sysrisk as sr
from conftest import (
    constant_asset_leverage_bank_set,
    random_bank_set,
    random_walk_alpha,
)


def direct_series_terms(m, t_terms):
    """Independent oracle: explicit matrix powers, right-multiplied."""
    lm = sr.lambda_from_exposures(m)
    e = lm.equity_weights
    ones = np.ones(m.n_banks)
    power = np.eye(m.n_banks)
    terms = []
    for _ in range(t_terms):
        terms.append(float(e @ (power @ ones)))
        power = lm.matrix @ power
    return terms


class TestPsiLocalTerms:
    def test_no_interbank_market(self):
        bs = sr.build_bank_set([1.0, 2.0], [0.0, 0.0], [0.0, 0.0])
        assert sr.psi_local_terms(bs) == (0.0, 0.0)

    def test_constant_leverage_powers(self):
        for n in (2, 7, 30):
            bs = sr.build_bank_set(np.ones(n), np.full(n, 0.5),
                                   np.full(n, 0.5))
            psi_1, psi_2 = sr.psi_local_terms(bs)
            assert abs(psi_1 - 0.5) < 1e-14
            assert abs(psi_2 - 0.25) < 1e-14

    def test_two_type_hand_computation(self):
        bs = sr.two_type_bank_set(
            sr.TwoTypeModel(n1=5, n2=50, c1=2.0, c2=0.5))
        psi_1, psi_2 = sr.psi_local_terms(bs)
        assert abs(psi_1 - 35.0 / 55.0) < 1e-14
        assert abs(psi_2 - 32.5 / 55.0) < 1e-14

    def test_independent_of_exposure_layout(self, rng):
        bs = random_bank_set(rng, 9)
        m1 = sr.initial_feasible_matrix(bs)
        m2 = random_walk_alpha(m1, rng, 300)
        assert sr.psi_local_terms(m1.bank_set) == sr.psi_local_terms(m2.bank_set)
        r1 = sr.psi_full(m1, 50)
        r2 = sr.psi_full(m2, 50)
        assert abs(r1.psi_1 - r2.psi_1) < 1e-12
        assert abs(r1.psi_2 - r2.psi_2) < 1e-12


class TestRiskMatrix:
    def test_zero_liabilities(self):
        bs = sr.build_bank_set([1.0, 1.0, 1.0], [0.2, 0.2, 0.2],
                               [0.6, 0.0, 0.0])
        r3 = sr.risk_matrix(bs)
        assert np.all(r3[1:, :] == 0.0)

    def test_two_bank_substitution(self):
        bs = sr.build_bank_set([1.0, 1.0], [0.5, 0.5], [0.5, 0.5])
        r3 = sr.risk_matrix(bs)
        assert r3[0, 0] == 0.0 and r3[1, 1] == 0.0
        assert abs(r3[0, 1] - 0.25) < 1e-15
        assert abs(r3[1, 0] - 0.25) < 1e-15

    def test_psi3_matches_series_term(self, rng):
        bs = random_bank_set(rng, 6)
        m = random_walk_alpha(sr.initial_feasible_matrix(bs), rng, 100)
        r3 = sr.risk_matrix(bs)
        contracted = float(np.sum(m.alpha * r3))
        report = sr.psi_full(m, 10)
        assert abs(report.psi_3 - contracted) < 1e-13
        assert abs(direct_series_terms(m, 4)[3] - contracted) < 1e-13


class TestPsiFull:
    def test_zero_matrix(self):
        bs = sr.build_bank_set([1.0, 2.0], [0.0, 0.0], [0.0, 0.0])
        report = sr.psi_full(sr.ExposureMatrix(np.zeros((2, 2)), bs), 50)
        assert abs(report.psi_total - 1.0) < 1e-14
        assert report.psi_1 == report.psi_2 == report.psi_3 == 0.0
        assert report.psi_res == 0.0
        assert report.spectral_radius == 0.0

    def test_constant_leverage_limit(self, rng):
        bs = random_bank_set(rng, 8, lev_low=0.5, lev_high=0.5)
        m = random_walk_alpha(sr.initial_feasible_matrix(bs), rng, 200)
        report = sr.psi_full(m, 200)
        assert abs(report.psi_total - 2.0) < 1e-9

    def test_truncation_self_consistency_illustrative(self):
        bs = sr.generate_population(sr.PopulationSpec(
            kind="pareto_uniform", n_banks=30, rng_seed=7))
        m = sr.initial_feasible_matrix(bs)
        r200 = sr.psi_full(m, 200)
        r400 = sr.psi_full(m, 400)
        assert abs(r200.psi_total - r400.psi_total) < 1e-6
        assert r200.truncation_bound < 1e-6

    def test_decomposition_identity_and_direct_oracle(self, rng):
        for _ in range(10):
            bs = random_bank_set(rng, 7)
            m = random_walk_alpha(sr.initial_feasible_matrix(bs), rng, 100)
            report = sr.psi_full(m, 60)
            ident = (1.0 + report.psi_1 + report.psi_2 + report.psi_3
                     + report.psi_res)
            assert abs(ident - report.psi_total) < 1e-12
            direct = math.fsum(direct_series_terms(m, 60))
            assert abs(report.psi_total - direct) < 1e-11

    def test_matches_uniform_shock_propagation(self, rng):
        bs = random_bank_set(rng, 9)
        m = sr.initial_feasible_matrix(bs)
        lm = sr.lambda_from_exposures(m)
        psi = 0.005
        h_inf = sr.h_infinity_exact(lm, np.full(9, psi))
        ratio = float(h_inf @ bs.e) / psi
        report = sr.psi_full(m, 300)
        assert abs(report.psi_total - ratio) < 1e-10

    def test_supercritical_warns_but_reports(self):
        bs = sr.generate_population(sr.PopulationSpec(
            kind="grid", n_banks=30, rescale=2.0))
        m = sr.initial_feasible_matrix(bs)
        with pytest.warns(sr.SupercriticalWarning):
            report = sr.psi_full(m, 6)
        assert report.spectral_radius > 1.0
        assert math.isinf(report.truncation_bound)
        assert math.isfinite(report.psi_total)
        assert report.supercritical

    def test_requires_four_terms(self, rng):
        bs = random_bank_set(rng, 4)
        m = sr.initial_feasible_matrix(bs)
        with pytest.raises(ValueError):
            sr.psi_full(m, 3)


class TestConstantLeverageInvariance:
    def test_asset_side(self, rng):
        C = 0.5
        tail = sum(C**t for t in range(3, 400))
        for _ in range(5):
            bs = constant_asset_leverage_bank_set(rng, 10, C)
            m = random_walk_alpha(sr.initial_feasible_matrix(bs), rng, 150)
            report = sr.psi_full(m, 400)
            assert abs(report.psi_3 + report.psi_res - tail) < 1e-9

    def test_liability_side(self, rng):
        # L_i = C * E_i with varied assets: transpose construction
        C = 0.5
        tail = sum(C**t for t in range(3, 400))
        for _ in range(5):
            bs_t = constant_asset_leverage_bank_set(rng, 10, C)
            bs = sr.build_bank_set(bs_t.equity, bs_t.interbank_liabilities,
                                   bs_t.interbank_assets)
            m = random_walk_alpha(sr.initial_feasible_matrix(bs), rng, 150)
            report = sr.psi_full(m, 400)
            assert abs(report.psi_3 + report.psi_res - tail) < 1e-9


class TestHInfinityGeneral:
    def test_zero_shock(self, rng):
        bs = random_bank_set(rng, 5)
        m = sr.initial_feasible_matrix(bs)
        res = sr.h_infinity_general(m, np.zeros(5))
        assert res.exact == 0.0
        assert res.three_term == 0.0

    def test_zero_matrix_weighted_sum(self):
        bs = sr.build_bank_set([1.0, 3.0], [0.0, 0.0], [0.0, 0.0])
        m = sr.ExposureMatrix(np.zeros((2, 2)), bs)
        h1 = np.array([0.1, 0.2])
        res = sr.h_infinity_general(m, h1)
        assert abs(res.exact - float(bs.e @ h1)) < 1e-15
        assert abs(res.higher_order_gap) < 1e-15

    def test_uniform_shock_consistency(self, rng):
        bs = random_bank_set(rng, 8)
        m = sr.initial_feasible_matrix(bs)
        psi = 0.01
        res = sr.h_infinity_general(m, np.full(8, psi))
        report = sr.psi_full(m, 300)
        assert abs(res.exact - psi * report.psi_total) < 1e-10
        # the three-term expansion misses only third order and beyond
        assert abs(res.three_term
                   - psi * (1.0 + report.psi_1 + report.psi_2)) < 1e-12
