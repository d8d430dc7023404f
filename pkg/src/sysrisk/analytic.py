"""Closed-form reference models: constant-leverage networks and the
two-type block model interpolating between fully assortative and fully
disassortative mixing."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BankSet, ExposureMatrix, LambdaMatrix
from .errors import KappaOutOfRange


@dataclass(frozen=True)
class TwoTypeModel:
    """n1 high-leverage banks (c1) and n2 low-leverage banks (c2 <= c1).

    All banks share one equity value; assets equal liabilities per bank.
    ``kappa`` interpolates from same-type-only lending (0) to the most
    cross-type lending the sign constraints allow (kappa_max).
    """

    n1: int
    n2: int
    c1: float
    c2: float
    kappa: float = 0.0
    equity: float = 1.0

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("both bank types need at least one member")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("leverages must be positive")
        if self.c2 > self.c1:
            raise ValueError("c2 must not exceed c1")
        if self.equity <= 0:
            raise ValueError("equity must be positive")
        kmax = self.kappa_max
        if not 0.0 <= self.kappa <= kmax * (1.0 + 1e-12):
            raise KappaOutOfRange(
                f"kappa={self.kappa!r} outside [0, {kmax!r}]"
            )

    @property
    def kappa_max(self) -> float:
        return min(self.c1 / self.n2, self.c2 / self.n1)

    @property
    def n_banks(self) -> int:
        return self.n1 + self.n2


def two_type_bank_set(model: TwoTypeModel) -> BankSet:
    n = model.n_banks
    equity = np.full(n, model.equity)
    lev = np.concatenate([np.full(model.n1, model.c1),
                          np.full(model.n2, model.c2)])
    return BankSet(equity=equity, interbank_assets=lev * model.equity,
                   interbank_liabilities=lev * model.equity)


def two_type_lambda_matrix(model: TwoTypeModel) -> LambdaMatrix:
    """Explicit propagation matrix: same-type blocks plus the kappa mixing.

    Self-links are permitted here (the block form is simplest with them);
    see :func:`two_type_exposure_matrix` for the optimizer-ready variant.
    Row sums equal c1 for the first n1 rows and c2 for the rest, at every
    admissible kappa.
    """
    n1, n2 = model.n1, model.n2
    n = n1 + n2
    mat = np.zeros((n, n))
    # clamp: at kappa_max the same-type fill is exactly zero up to rounding
    mat[:n1, :n1] = max(model.c1 / n1 - model.kappa * n2 / n1, 0.0)
    mat[:n1, n1:] = model.kappa
    mat[n1:, :n1] = model.kappa
    mat[n1:, n1:] = max(model.c2 / n2 - model.kappa * n1 / n2, 0.0)
    e = np.full(n, 1.0 / n)
    return LambdaMatrix(mat, e, copy=False)


def two_type_spectral_radius(model: TwoTypeModel) -> float:
    """Dominant eigenvalue from the type-constant eigenvector ansatz."""
    u = model.c1 - model.kappa * model.n2
    v = model.c2 - model.kappa * model.n1
    return (u + v) / 2.0 + math.sqrt((u - v) ** 2 / 4.0
                                     + model.kappa**2 * model.n1 * model.n2)


def two_type_psi(model: TwoTypeModel, t_terms: int) -> float:
    """Shock multiplier of the two-type model, truncated at t_terms.

    At kappa = 0 the blocks decouple and the equity-weighted geometric sums
    (n1 c1^t + n2 c2^t) / (n1 + n2) give the answer directly; for kappa > 0
    the series is evaluated numerically on the explicit matrix.
    """
    if t_terms < 1:
        raise ValueError("t_terms must be >= 1")
    n = model.n_banks
    if model.kappa == 0.0:
        total = 0.0
        p1 = 1.0
        p2 = 1.0
        for _ in range(t_terms):
            total += model.n1 * p1 + model.n2 * p2
            p1 *= model.c1
            p2 *= model.c2
        return total / n
    lm = two_type_lambda_matrix(model)
    w = lm.equity_weights.copy()
    mat_t = lm.matrix.T
    total = float(w.sum())
    for _ in range(1, t_terms):
        w = mat_t @ w
        total += float(w.sum())
    return total


def _clear_block_diagonal(alpha: np.ndarray, idx: np.ndarray) -> None:
    """Drain diagonal mass of one same-type block onto in-block links.

    Pairs of positive diagonal entries swap onto each other's off-diagonal
    cells; an odd leftover is pushed onto the largest in-block cell. All
    receiving cells stay inside the block, so per-row block sums (and with
    them the multiplier series) are unchanged.
    """
    pos = [int(i) for i in idx if alpha[i, i] > 0.0]
    if not pos:
        return
    if idx.size < 2:
        raise ValueError("cannot clear a self-link in a single-bank type")
    while len(pos) >= 2:
        i, j = pos[0], pos[1]
        d = min(alpha[i, i], alpha[j, j])
        alpha[i, i] -= d
        alpha[j, j] -= d
        alpha[i, j] += d
        alpha[j, i] += d
        pos = [k for k in pos if alpha[k, k] > 0.0]
    if pos:
        i = pos[0]
        d = float(alpha[i, i])
        best = None
        best_val = -math.inf
        for j in idx:
            for k in idx:
                if j != k and j != i and k != i and alpha[j, k] > best_val:
                    best = (int(j), int(k))
                    best_val = float(alpha[j, k])
        if best is None or best_val < d:
            raise ValueError("no in-block cell can absorb the leftover "
                             "diagonal entry")
        j, k = best
        alpha[i, i] -= d
        alpha[j, k] -= d
        alpha[i, k] += d
        alpha[j, i] += d


def two_type_exposure_matrix(model: TwoTypeModel) -> ExposureMatrix:
    """Optimizer-ready exposure matrix: self-links drained within each type.

    The conversion keeps margins and the multiplier series exactly; it
    needs at least two banks per type whose diagonal is occupied.
    """
    bs = two_type_bank_set(model)
    lm = two_type_lambda_matrix(model)
    n = model.n_banks
    alpha = lm.matrix / n  # alpha_ij = Lambda_ij * e_i with e_i = 1/N
    _clear_block_diagonal(alpha, np.arange(model.n1))
    _clear_block_diagonal(alpha, np.arange(model.n1, n))
    return ExposureMatrix(alpha, bs, copy=False)


def constant_leverage_psi(C: float, t_terms: int) -> float:
    """Truncated multiplier series sum_{t < t_terms} C^t.

    Holds for any feasible exposure matrix whose asset leverage (or whose
    liability leverage) is the same constant C across banks.
    """
    if C < 0:
        raise ValueError("leverage must be non-negative")
    if t_terms < 1:
        raise ValueError("t_terms must be >= 1")
    total = 0.0
    p = 1.0
    for _ in range(t_terms):
        total += p
        p *= C
    return total


def constant_leverage_psi_limit(C: float) -> float:
    """Geometric limit 1 / (1 - C); infinite at or above the critical point."""
    if C < 0:
        raise ValueError("leverage must be non-negative")
    return 1.0 / (1.0 - C) if C < 1.0 else math.inf
