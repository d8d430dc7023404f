"""Metropolis search over feasible exposure matrices.

Moves are four-cell updates that conserve every row and column sum, so the
chain walks the polytope of matrices compatible with fixed single-bank
totals. The figure of merit is the truncated shock multiplier, optionally
penalized for mean degree and for reciprocal (symmetric) exposure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels, amplification, metrics
from .amplification import PsiReport
from .core import BankSet, ExposureMatrix, _perron_radius
from .errors import DegenerateProperty, InfeasibleMargins

# Exact margin re-projection cadence; four-cell updates accumulate rounding.
REPROJECT_EVERY = 100

GEOMETRIC = "geometric"


@dataclass
class AnnealConfig:
    """Hyper-parameters of one annealing chain.

    ``beta`` is either a constant acceptance sharpness or the string
    ``"geometric"`` for the rising schedule 10 * N^2 * 100^(n / sweeps).
    ``trial_terms`` truncates the multiplier series during update trials;
    ``final_terms`` is used for the per-sweep trace and the final report.
    """

    direction: str
    beta: float | str = 1e6
    beta_k: float = 0.0
    beta_asym: float = 0.0
    sweeps: int = 1000
    trial_terms: int = 50
    final_terms: int = 200
    rng_seed: int = 0
    full_transfer_prob: float = 0.5

    def __post_init__(self):
        if self.direction not in ("minimize", "maximize"):
            raise ValueError(f"direction must be minimize or maximize, "
                             f"got {self.direction!r}")
        if isinstance(self.beta, str):
            if self.beta != GEOMETRIC:
                raise ValueError(f"unknown beta schedule {self.beta!r}")
        elif not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.beta_k < 0 or self.beta_asym < 0:
            raise ValueError("penalty weights must be non-negative")
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.trial_terms < 1:
            raise ValueError("trial_terms must be >= 1")
        if self.final_terms < 4:
            raise ValueError("final_terms must be >= 4")
        if self.trial_terms > self.final_terms:
            raise ValueError("trial_terms must not exceed final_terms")
        if not 0.0 <= self.full_transfer_prob <= 1.0:
            raise ValueError("full_transfer_prob must lie in [0, 1]")

    @property
    def sign(self) -> float:
        return 1.0 if self.direction == "maximize" else -1.0

    def beta_at(self, sweep: int, n_banks: int) -> float:
        if self.beta == GEOMETRIC:
            return 10.0 * n_banks**2 * 100.0 ** (sweep / self.sweeps)
        return float(self.beta)


@dataclass(frozen=True)
class SweepRecord:
    """Observables captured once per completed sweep."""

    sweep: int
    psi: float
    spectral_radius: float
    assortativity: float
    mean_degree: float
    acceptance_rate: float


@dataclass
class AnnealTrace:
    records: list = field(default_factory=list)

    COLUMNS = ("n", "psi", "lambda", "assortativity", "mean_degree",
               "acceptance_rate")

    def rows(self):
        for rec in self.records:
            yield (rec.sweep, rec.psi, rec.spectral_radius,
                   rec.assortativity, rec.mean_degree, rec.acceptance_rate)

    def __len__(self):
        return len(self.records)


class AnnealResult(NamedTuple):
    exposures: ExposureMatrix
    trace: AnnealTrace
    report: PsiReport


@dataclass(frozen=True)
class DMove:
    """Four-cell update: +d at (i1,j1) and (i2,j2), -d at (i1,j2) and (i2,j1)."""

    i1: int
    j1: int
    i2: int
    j2: int
    d: float


def initial_feasible_matrix(bs: BankSet) -> ExposureMatrix:
    """Feasible starting matrix for given margins.

    Proportional fill a_i * l_j / sum(a) satisfies both margin families but
    puts mass on the diagonal. Paired four-cell moves between the two
    largest diagonal entries drain the diagonal one entry per move; a
    possible final lone entry is pushed onto the largest eligible
    off-diagonal cell.
    """
    a = bs.a
    l = bs.l
    n = bs.n_banks
    total = float(a.sum())
    if total == 0.0:
        return ExposureMatrix(np.zeros((n, n)), bs)
    alpha = np.outer(a, l) / total
    while True:
        diag = np.diagonal(alpha)
        pos = np.nonzero(diag > 0.0)[0]
        if pos.size <= 1:
            break
        order = pos[np.argsort(diag[pos])]
        i1 = int(order[-1])
        i2 = int(order[-2])
        d = float(alpha[i2, i2])  # the smaller of the two largest
        alpha[i1, i1] -= d
        alpha[i2, i2] -= d
        alpha[i1, i2] += d
        alpha[i2, i1] += d
    rem = np.nonzero(np.diagonal(alpha) > 0.0)[0]
    if rem.size == 1:
        i1 = int(rem[0])
        d0 = float(alpha[i1, i1])
        eligible = alpha.copy()
        eligible[i1, :] = -1.0
        eligible[:, i1] = -1.0
        np.fill_diagonal(eligible, -1.0)
        flat = int(np.argmax(eligible))
        i2, j2 = divmod(flat, n)
        if eligible[i2, j2] < d0:
            raise InfeasibleMargins(
                "no off-diagonal cell can absorb the final diagonal entry; "
                "margin vectors are too concentrated"
            )
        alpha[i1, i1] -= d0
        alpha[i2, j2] -= d0
        alpha[i1, j2] += d0
        alpha[i2, i1] += d0
    return ExposureMatrix(alpha, bs, copy=False)


def propose_d_move(m: ExposureMatrix, rng: np.random.Generator, *,
                   full_transfer_prob: float = 0.5) -> DMove | None:
    """Draw one candidate four-cell move, or None when the donors are empty.

    The rectangle (two rows, two columns) is uniform over all choices whose
    four cells are off-diagonal, which requires at least 4 banks. The
    transferred mass is the full donor minimum with probability
    ``full_transfer_prob``, otherwise uniform below it.
    """
    n = m.n_banks
    if n < 4:
        raise ValueError("four-cell moves need at least 4 banks")
    eps = m.bank_set.zero_threshold()
    alpha = m.alpha
    while True:
        i1, i2, j1, j2 = (int(x) for x in rng.integers(0, n, size=4))
        if (i1 != i2 and j1 != j2 and i1 != j1 and i2 != j2
                and i1 != j2 and i2 != j1):
            break
    m_d = min(float(alpha[i1, j2]), float(alpha[i2, j1]))
    if m_d <= eps:
        return None
    if rng.random() < full_transfer_prob:
        d = m_d
    else:
        d = float(rng.random()) * m_d
    return DMove(i1, j1, i2, j2, d)


def apply_d_move_inplace(alpha: np.ndarray, move: DMove) -> None:
    alpha[move.i1, move.j1] += move.d
    alpha[move.i2, move.j2] += move.d
    alpha[move.i1, move.j2] -= move.d
    alpha[move.i2, move.j1] -= move.d


def apply_d_move(m: ExposureMatrix, move: DMove) -> ExposureMatrix:
    """Copy-and-replace application of a move; margins are conserved."""
    alpha = m.alpha.copy()
    apply_d_move_inplace(alpha, move)
    return ExposureMatrix(alpha, m.bank_set, copy=False)


def objective(m: ExposureMatrix, cfg: AnnealConfig) -> float:
    """F = (+/-) Psi_trial - beta_k * mean degree - beta_asym * symmetry ratio.

    The symmetry ratio sum a_ij a_ji / sum a_ij^2 is 0 for strictly
    asymmetric matrices and 1 for symmetric ones. Degree counting treats
    sub-threshold residue as zero.
    """
    bs = m.bank_set
    n = bs.n_banks
    e = np.ascontiguousarray(bs.e)
    w = np.empty(n)
    wn = np.empty(n)
    return float(_kernels.objective_value(
        np.ascontiguousarray(m.alpha), e, 1.0 / e, cfg.sign, cfg.beta_k,
        cfg.beta_asym, cfg.trial_terms, bs.zero_threshold(), w, wn,
    ))


def reproject_margins(alpha: np.ndarray, a: np.ndarray, l: np.ndarray,
                      eps_zero: float, passes: int = 2) -> None:
    """Snap sub-threshold residue to zero and re-fit margins in place.

    Iterative proportional fitting restricted to the current support; two
    row/column passes push both margin families back to working precision.
    """
    alpha[alpha <= eps_zero] = 0.0
    for _ in range(passes):
        rows = alpha.sum(axis=1)
        scale = np.ones_like(rows)
        np.divide(a, rows, out=scale, where=rows > 0.0)
        alpha *= scale[:, None]
        cols = alpha.sum(axis=0)
        scale = np.ones_like(cols)
        np.divide(l, cols, out=scale, where=cols > 0.0)
        alpha *= scale[None, :]


def anneal(bs: BankSet, cfg: AnnealConfig,
           initial: ExposureMatrix | None = None,
           on_sweep=None) -> AnnealResult:
    """Run one annealing chain of ``cfg.sweeps`` sweeps (N^2 trials each).

    The running objective is resynchronized by a from-scratch evaluation at
    every sweep boundary, and margins are exactly re-projected every
    ``REPROJECT_EVERY`` sweeps. Observables (multiplier at ``final_terms``,
    spectral radius, leverage assortativity, mean degree, acceptance rate)
    are recorded once per sweep and also passed to ``on_sweep`` when given,
    so callers can stream the trace. Fixed seeds give bit-identical traces.
    """
    n = bs.n_banks
    if n < 4:
        raise ValueError("annealing needs at least 4 banks")
    if initial is None:
        initial = initial_feasible_matrix(bs)
    else:
        # re-validate against these margins
        initial = ExposureMatrix(initial.alpha, bs)
    alpha = np.array(initial.alpha, dtype=float, order="C", copy=True)
    a = bs.a
    l = bs.l
    e = np.ascontiguousarray(bs.e)
    inv_e = 1.0 / e
    eps = bs.zero_threshold()
    state = _kernels.make_rng_state(cfg.rng_seed)
    w = np.empty(n)
    wn = np.empty(n)
    sign = cfg.sign
    try:
        node_bins = metrics.bin_nodes(bs.leverage, metrics.DEFAULT_BINS)
    except DegenerateProperty:
        node_bins = None

    trace = AnnealTrace()
    f_cur = 0.0
    for sweep in range(cfg.sweeps):
        beta = cfg.beta_at(sweep, n)
        f_cur = float(_kernels.objective_value(
            alpha, e, inv_e, sign, cfg.beta_k, cfg.beta_asym,
            cfg.trial_terms, eps, w, wn))
        f_cur, accepted = _kernels.anneal_sweep(
            alpha, e, inv_e, beta, sign, cfg.beta_k, cfg.beta_asym,
            cfg.trial_terms, eps, cfg.full_transfer_prob, state, f_cur, w, wn)
        if (sweep + 1) % REPROJECT_EVERY == 0:
            reproject_margins(alpha, a, l, eps)
        psi_val = float(_kernels.psi_series(alpha, e, inv_e,
                                            cfg.final_terms, w, wn))
        lam, _ = _perron_radius(alpha * inv_e[:, None])
        support = alpha > eps
        if node_bins is not None:
            r = metrics.assortativity_from_support(support, node_bins,
                                                   node_bins)[0]
        else:
            r = math.nan
        record = SweepRecord(
            sweep=sweep,
            psi=psi_val,
            spectral_radius=lam,
            assortativity=r,
            mean_degree=float(support.sum()) / n,
            acceptance_rate=accepted / (n * n),
        )
        trace.records.append(record)
        if on_sweep is not None:
            on_sweep(record)
    final = ExposureMatrix(alpha, bs, copy=False)
    report = amplification.psi_full(final, cfg.final_terms)
    return AnnealResult(final, trace, report)
