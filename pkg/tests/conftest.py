"""Shared fixtures and network factories for the test suite."""
import numpy as np
import pytest

import sysrisk as sr
from sysrisk.optimizer import propose_d_move


def random_bank_set(rng, n, lev_low=0.2, lev_high=0.8):
    """Varied equities with A_i = L_i = leverage * E_i (market closes)."""
    equity = rng.uniform(0.5, 2.0, size=n)
    lev = rng.uniform(lev_low, lev_high, size=n)
    flows = lev * equity
    return sr.build_bank_set(equity, flows, flows)


def random_walk_alpha(m, rng, n_moves, full_transfer_prob=0.5):
    """Random feasible matrix: accepted D-moves from a feasible start.

    Every step re-validates, so this doubles as a feasibility oracle.
    """
    for _ in range(n_moves):
        move = propose_d_move(m, rng, full_transfer_prob=full_transfer_prob)
        if move is not None:
            m = sr.apply_d_move(m, move)
    return m


def constant_asset_leverage_bank_set(rng, n, C):
    """A_i = C * E_i with unrelated (renormalized) liabilities."""
    equity = rng.uniform(0.5, 2.0, size=n)
    assets = C * equity
    liabilities = rng.uniform(0.1, 1.0, size=n)
    liabilities *= assets.sum() / liabilities.sum()
    return sr.build_bank_set(equity, assets, liabilities)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
