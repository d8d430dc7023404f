"""Macroeconomic shock multiplier: series evaluation and its decomposition
into node-local terms, the lowest-order network term, and the residual."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import BankSet, ExposureMatrix, lambda_from_exposures
from .errors import SupercriticalWarning
from . import propagation


@dataclass(frozen=True)
class PsiReport:
    """Shock multiplier with its decomposition.

    psi_total = 1 + psi_1 + psi_2 + psi_3 + psi_res, where psi_1 and psi_2
    depend only on single-bank sums, psi_3 is the lowest-order term seeing
    the exposure matrix, and psi_res collects everything from order four up
    to the truncation horizon. truncation_bound is the geometric tail bound
    on the discarded remainder (infinite when the series diverges).
    """

    psi_total: float
    psi_1: float
    psi_2: float
    psi_3: float
    psi_res: float
    terms_used: int
    spectral_radius: float
    truncation_bound: float

    @property
    def supercritical(self) -> bool:
        return self.spectral_radius >= 1.0

    def as_dict(self) -> dict:
        return {
            "psi_total": self.psi_total,
            "psi_1": self.psi_1,
            "psi_2": self.psi_2,
            "psi_3": self.psi_3,
            "psi_res": self.psi_res,
            "terms_used": self.terms_used,
            "spectral_radius": self.spectral_radius,
            "truncation_bound": self.truncation_bound,
        }


def psi_local_terms(bs: BankSet) -> tuple[float, float]:
    """First- and second-order multiplier terms.

    Both depend only on the per-bank asset and liability sums, not on who
    lends to whom.
    """
    total = bs.total_equity
    psi_1 = float(bs.interbank_assets.sum()) / total
    psi_2 = float(np.sum(bs.interbank_assets * bs.interbank_liabilities
                         / bs.equity)) / total
    return psi_1, psi_2


def risk_matrix(bs: BankSet) -> np.ndarray:
    """Pairwise risk weights L_i A_j / (E_i E_j) with zero diagonal.

    Contracting this with the exposure matrix gives the third-order
    multiplier term.
    """
    r3 = np.outer(bs.interbank_liabilities / bs.equity,
                  bs.interbank_assets / bs.equity)
    np.fill_diagonal(r3, 0.0)
    return r3


def series_terms(m: ExposureMatrix, t_terms: int) -> np.ndarray:
    """Terms s_t = sum_ij e_i (Lambda^t)_ij for t = 0 .. t_terms-1.

    Computed by iterated left-multiplication of the weight row vector,
    O(N^2) per term.
    """
    lm = lambda_from_exposures(m)
    w = lm.equity_weights.copy()
    mat_t = lm.matrix.T
    terms = np.empty(t_terms)
    terms[0] = w.sum()
    for t in range(1, t_terms):
        w = mat_t @ w
        terms[t] = w.sum()
    return terms


def psi_full(m: ExposureMatrix, t_terms: int) -> PsiReport:
    """Evaluate the shock multiplier series and split out its components.

    Warns (and reports an infinite tail bound) when the propagation matrix
    is supercritical; the truncated sum is still returned since optimization
    in that regime needs a finite figure of merit.
    """
    if t_terms < 4:
        raise ValueError("t_terms must be >= 4 to separate the decomposition")
    terms = series_terms(m, t_terms)
    lam = lambda_from_exposures(m).spectral_radius()
    if lam < 1.0:
        bound = float(terms[-1]) * lam / (1.0 - lam)
    else:
        bound = math.inf
        warnings.warn(
            f"spectral radius {lam!r} >= 1: multiplier series diverges, "
            f"returning the {t_terms}-term truncation",
            SupercriticalWarning,
            stacklevel=2,
        )
    return PsiReport(
        psi_total=math.fsum(terms),
        psi_1=float(terms[1]),
        psi_2=float(terms[2]),
        psi_3=float(terms[3]),
        psi_res=math.fsum(terms[4:]),
        terms_used=t_terms,
        spectral_radius=lam,
        truncation_bound=bound,
    )


@dataclass(frozen=True)
class SystemLossReport:
    """Exact asymptotic aggregate loss next to its three-term approximation.

    ``higher_order_gap`` is the part of the exact loss that the node-local
    expansion misses (third order and up in the exposure matrix). Diagnostic
    only; optimization always uses the exact series.
    """

    exact: float
    three_term: float
    higher_order_gap: float


def h_infinity_general(m: ExposureMatrix, h1) -> SystemLossReport:
    """Asymptotic aggregate loss for an arbitrary initial shock.

    The exact value comes from the linear fixed-point solve; the comparison
    value truncates the expansion after the first exposure-aware term.
    """
    bs = m.bank_set
    lm = lambda_from_exposures(m)
    h1 = np.asarray(h1, dtype=float)
    h_inf = propagation.h_infinity_exact(lm, h1)
    exact = float(h_inf @ bs.e)
    e = bs.e
    l = bs.l
    term0 = float(e @ h1)
    term1 = float(l @ h1)
    term2 = float((l / e) @ (m.alpha @ h1))
    three_term = term0 + term1 + term2
    return SystemLossReport(
        exact=exact,
        three_term=three_term,
        higher_order_gap=exact - three_term,
    )
