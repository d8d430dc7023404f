
import numpy as np
import pytest

import sysrisk as sr
from conftest import random_bank_set, random_walk_alpha


def two_type_exposures(n1, n2, c1, c2, kappa):
    model = sr.TwoTypeModel(n1=n1, n2=n2, c1=c1, c2=c2, kappa=kappa)
    return sr.two_type_exposure_matrix(model)


class TestScalarAssortativity:
    def test_same_type_links_only(self):
        # block-diagonal mixing: perfectly assortative by leverage
        m = two_type_exposures(6, 10, 0.8, 0.3, kappa=0.0)
        res = sr.scalar_assortativity(m, "leverage", n_bins=2)
        assert abs(res.r - 1.0) < 1e-12
        assert res.variance >= 0.0

    def test_cross_type_links_only(self):
        # equal classes at maximal mixing: all edges cross the classes
        m = two_type_exposures(5, 5, 0.6, 0.6, kappa=0.6 / 5)
        res = sr.scalar_assortativity(
            m, np.r_[np.zeros(5), np.ones(5)], n_bins=2)
        assert abs(res.r + 1.0) < 1e-12

    def test_affine_relabeling_invariance(self, rng):
        bs = random_bank_set(rng, 12)
        m = random_walk_alpha(sr.initial_feasible_matrix(bs), rng, 400)
        base = sr.scalar_assortativity(m, "leverage", n_bins=8)
        scaled = sr.scalar_assortativity(m, 3.5 * bs.leverage - 1.2, n_bins=8)
        assert abs(base.r - scaled.r) < 1e-12

    def test_variance_shrinks_with_edge_count(self):
        small = two_type_exposures(4, 6, 0.8, 0.3, kappa=0.02)
        large = two_type_exposures(16, 24, 0.8, 0.3, kappa=0.005)
        v_small = sr.scalar_assortativity(small, "leverage", n_bins=2).variance
        v_large = sr.scalar_assortativity(large, "leverage", n_bins=2).variance
        assert v_large < v_small

    def test_degenerate_property(self, rng):
        bs = random_bank_set(rng, 6, lev_low=0.5, lev_high=0.5)
        m = sr.initial_feasible_matrix(bs)
        with pytest.raises(sr.DegenerateProperty):
            sr.scalar_assortativity(m, "leverage")

    def test_too_few_edges(self):
        bs = sr.build_bank_set(np.ones(4), np.zeros(4), np.zeros(4))
        m = sr.ExposureMatrix(np.zeros((4, 4)), bs)
        with pytest.raises(sr.DegenerateProperty):
            sr.scalar_assortativity(m, np.arange(4.0))

    def test_distinct_source_target_properties(self, rng):
        bs = random_bank_set(rng, 10)
        m = random_walk_alpha(sr.initial_feasible_matrix(bs), rng, 200)
        res = sr.scalar_assortativity(m, "liability_leverage", "leverage",
                                      n_bins=5)
        assert -1.0 - 1e-12 <= res.r <= 1.0 + 1e-12
        assert res.source_property == "liability_leverage"
        assert res.target_property == "leverage"

    def test_bad_bin_count(self, rng):
        bs = random_bank_set(rng, 6)
        m = sr.initial_feasible_matrix(bs)
        with pytest.raises(ValueError):
            sr.scalar_assortativity(m, "leverage", n_bins=1)


class TestEdgeCorrelation:
    def test_sign_matches_assortativity_on_two_type(self):
        assort = two_type_exposures(6, 10, 0.8, 0.3, kappa=0.0)
        assert sr.edge_property_correlation(assort, "leverage",
                                            "leverage") > 0.9
        mixed = two_type_exposures(5, 5, 0.6, 0.6, kappa=0.12)
        vals = np.r_[np.zeros(5), np.ones(5)]
        assert sr.edge_property_correlation(mixed, vals, vals) < -0.9

    def test_degenerate(self, rng):
        bs = random_bank_set(rng, 6)
        m = sr.initial_feasible_matrix(bs)
        with pytest.raises(sr.DegenerateProperty):
            sr.edge_property_correlation(m, np.full(6, 1.0), "leverage")


class TestNetworkSummary:
    def test_empty_network(self):
        bs = sr.build_bank_set(np.ones(5), np.zeros(5), np.zeros(5))
        summary = sr.network_summary(sr.ExposureMatrix(np.zeros((5, 5)), bs))
        assert summary.edge_count == 0
        assert summary.mean_degree == 0.0
        assert summary.reciprocal_pairs == 0
        assert summary.total_assets == 0.0

    def test_strictly_asymmetric_has_no_reciprocal_pairs(self):
        tri = np.triu(np.full((5, 5), 0.1), k=1)
        bs = sr.build_bank_set(np.ones(5), tri.sum(axis=1), tri.sum(axis=0))
        summary = sr.network_summary(
            sr.ExposureMatrix(tri / bs.total_equity, bs))
        assert summary.reciprocal_pairs == 0
        assert summary.edge_count == 10
        assert summary.mean_degree == 2.0

    def test_counts_match_naive_recount(self, rng):
        bs = random_bank_set(rng, 12)
        m = random_walk_alpha(sr.initial_feasible_matrix(bs), rng, 300)
        summary = sr.network_summary(m)
        eps = bs.zero_threshold()
        edges = sum(1 for i in range(12) for j in range(12)
                    if m.alpha[i, j] > eps)
        recips = sum(1 for i in range(12) for j in range(i + 1, 12)
                     if m.alpha[i, j] > eps and m.alpha[j, i] > eps)
        assert summary.edge_count == edges
        assert summary.mean_degree == edges / 12
        assert summary.reciprocal_pairs == recips

    def test_balance_sheet_totals(self, rng):
        bs = random_bank_set(rng, 8)
        m = sr.initial_feasible_matrix(bs)
        summary = sr.network_summary(m)
        assert abs(summary.total_assets
                   - float(np.sum(bs.interbank_assets))) < 1e-12
        assert abs(summary.max_liabilities
                   - float(np.max(bs.interbank_liabilities))) < 1e-12
        # A = L per bank here, so the correlation is exactly 1
        assert abs(summary.assets_liabilities_correlation - 1.0) < 1e-12
