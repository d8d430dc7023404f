"""Balance-sheet data, exposure matrices, and the stress-propagation matrix.

All internal arithmetic is dimensionless: exposures, assets and liabilities
are divided by total system equity. Currency values appear only at the I/O
boundary.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    ExposureConstraintError,
    MarketImbalance,
    NonPositiveEquity,
)

# Relative tolerance for market closure and margin checks.
REL_TOL = 1e-9

# Entries below ZERO_SNAP_FACTOR * max(a_i) count as exact zeros for degree
# counting; four-cell moves leave floating-point residue that must not
# inflate the support.
ZERO_SNAP_FACTOR = 1e-12


def _as_vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be a 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class BankSet:
    """Per-bank balance sheet: equity, interbank assets, interbank liabilities.

    Vectors are currency-valued; the dimensionless forms (each divided by
    total system equity) are exposed as ``e``, ``a`` and ``l``.
    """

    equity: np.ndarray
    interbank_assets: np.ndarray
    interbank_liabilities: np.ndarray

    def __post_init__(self):
        eq = _as_vector(self.equity, "equity")
        assets = _as_vector(self.interbank_assets, "interbank_assets")
        liabs = _as_vector(self.interbank_liabilities, "interbank_liabilities")
        if not (eq.shape == assets.shape == liabs.shape):
            raise DimensionMismatch(
                f"length mismatch: equity {eq.shape[0]}, assets {assets.shape[0]}, "
                f"liabilities {liabs.shape[0]}"
            )
        if eq.shape[0] < 2:
            raise DimensionMismatch("need at least 2 banks")
        if np.any(eq <= 0):
            bad = int(np.argmin(eq))
            raise NonPositiveEquity(f"equity[{bad}] = {eq[bad]} is not positive")
        if np.any(assets < 0) or np.any(liabs < 0):
            raise ValueError("interbank assets/liabilities must be non-negative")
        total_a = float(assets.sum())
        total_l = float(liabs.sum())
        scale = max(total_a, total_l)
        if scale > 0 and abs(total_a - total_l) > REL_TOL * scale:
            raise MarketImbalance(
                f"sum(assets)={total_a!r} != sum(liabilities)={total_l!r}"
            )
        for arr, fld in ((eq, "equity"), (assets, "interbank_assets"),
                         (liabs, "interbank_liabilities")):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, fld, arr)

    @property
    def n_banks(self) -> int:
        return self.equity.shape[0]

    @property
    def total_equity(self) -> float:
        return float(self.equity.sum())

    @property
    def e(self) -> np.ndarray:
        """Dimensionless equity shares E_i / sum(E)."""
        return self.equity / self.total_equity

    @property
    def a(self) -> np.ndarray:
        """Dimensionless asset margins A_i / sum(E)."""
        return self.interbank_assets / self.total_equity

    @property
    def l(self) -> np.ndarray:
        """Dimensionless liability margins L_i / sum(E)."""
        return self.interbank_liabilities / self.total_equity

    @property
    def leverage(self) -> np.ndarray:
        """Interbank leverage A_i / E_i."""
        return self.interbank_assets / self.equity

    @property
    def liability_leverage(self) -> np.ndarray:
        """Liabilities over equity, L_i / E_i."""
        return self.interbank_liabilities / self.equity

    def zero_threshold(self) -> float:
        """Support cut-off below which exposure entries count as zero."""
        a = self.a
        return ZERO_SNAP_FACTOR * float(a.max()) if a.size else 0.0


def build_bank_set(equity, assets, liabilities) -> BankSet:
    """Validate raw balance-sheet vectors and assemble a :class:`BankSet`."""
    return BankSet(
        equity=_as_vector(equity, "equity"),
        interbank_assets=_as_vector(assets, "assets"),
        interbank_liabilities=_as_vector(liabilities, "liabilities"),
    )


@dataclass(frozen=True)
class ConstraintViolation:
    """One violated exposure constraint: family, location, and residual."""

    family: str  # "diagonal" | "negative" | "row_sum" | "col_sum"
    index: tuple
    residual: float

    def __str__(self):
        return f"{self.family} at {self.index}: residual {self.residual:.3e}"


@dataclass(frozen=True)
class ValidationReport:
    """Every violated exposure constraint, with its residual."""

    violations: tuple = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def worst_residual(self, family: str | None = None) -> float:
        picks = [v.residual for v in self.violations
                 if family is None or v.family == family]
        return max(picks) if picks else 0.0

    def __str__(self):
        if self.ok:
            return "all exposure constraints satisfied"
        return "; ".join(str(v) for v in self.violations)


class ExposureMatrix:
    """Non-negative dimensionless exposure matrix with zero diagonal.

    Row sums are tied to the asset margins a_i and column sums to the
    liability margins l_j of the bound :class:`BankSet`. Instances are
    immutable; derive modified matrices by copy-and-replace.
    """

    __slots__ = ("alpha", "bank_set")

    def __init__(self, alpha, bank_set: BankSet, *, validate: bool = True,
                 copy: bool = True):
        arr = np.array(alpha, dtype=float, copy=copy)
        if arr.shape != (bank_set.n_banks, bank_set.n_banks):
            raise DimensionMismatch(
                f"exposure matrix shape {arr.shape} does not match "
                f"{bank_set.n_banks} banks"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("exposure matrix contains non-finite entries")
        arr.setflags(write=False)
        self.alpha = arr
        self.bank_set = bank_set
        if validate:
            report = self.validate()
            if not report.ok:
                raise ExposureConstraintError(str(report), report=report)

    @property
    def n_banks(self) -> int:
        return self.bank_set.n_banks

    def validate(self, rel_tol: float = REL_TOL) -> ValidationReport:
        """Check diagonal, sign, and both margin families; report residuals."""
        return validate_margins(self.alpha, self.bank_set.a, self.bank_set.l,
                                rel_tol=rel_tol)

    def support(self) -> np.ndarray:
        """Boolean edge mask with sub-threshold residue treated as zero."""
        return self.alpha > self.bank_set.zero_threshold()

    def with_alpha(self, alpha, *, validate: bool = True) -> "ExposureMatrix":
        return ExposureMatrix(alpha, self.bank_set, validate=validate)


def validate_margins(alpha: np.ndarray, a: np.ndarray, l: np.ndarray,
                     rel_tol: float = REL_TOL) -> ValidationReport:
    """Report-style validation of a raw exposure array against margins."""
    violations = []
    n = alpha.shape[0]
    diag = np.diagonal(alpha)
    for i in np.nonzero(diag != 0.0)[0]:
        violations.append(ConstraintViolation("diagonal", (int(i), int(i)),
                                              abs(float(diag[i]))))
    neg_i, neg_j = np.nonzero(alpha < 0.0)
    for i, j in zip(neg_i, neg_j):
        violations.append(ConstraintViolation("negative", (int(i), int(j)),
                                              -float(alpha[i, j])))
    row = alpha.sum(axis=1)
    col = alpha.sum(axis=0)
    row_scale = np.maximum(np.abs(a), 1.0)
    col_scale = np.maximum(np.abs(l), 1.0)
    for i in range(n):
        res = abs(float(row[i] - a[i]))
        if res > rel_tol * row_scale[i]:
            violations.append(ConstraintViolation("row_sum", (int(i),), res))
        res = abs(float(col[i] - l[i]))
        if res > rel_tol * col_scale[i]:
            violations.append(ConstraintViolation("col_sum", (int(i),), res))
    return ValidationReport(tuple(violations))


def validate_exposures(m: ExposureMatrix) -> ValidationReport:
    """Constraint report for an exposure matrix (empty report = feasible)."""
    return m.validate()


class LambdaMatrix:
    """Stress-propagation matrix with entries alpha_ij / e_i.

    Row i sums to the interbank leverage A_i/E_i. Also carries the equity
    weights e_i needed to aggregate losses, and caches its spectral radius.
    """

    __slots__ = ("matrix", "equity_weights", "_radius", "_converged")

    def __init__(self, matrix, equity_weights, *, copy: bool = True):
        mat = np.array(matrix, dtype=float, copy=copy)
        e = np.array(equity_weights, dtype=float, copy=copy)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionMismatch(f"propagation matrix must be square, got {mat.shape}")
        if e.shape != (mat.shape[0],):
            raise DimensionMismatch("equity weight vector does not match matrix size")
        if not np.all(np.isfinite(mat)):
            raise ValueError("propagation matrix contains non-finite entries")
        mat.setflags(write=False)
        e.setflags(write=False)
        self.matrix = mat
        self.equity_weights = e
        self._radius = None
        self._converged = True

    @property
    def n_banks(self) -> int:
        return self.matrix.shape[0]

    @property
    def radius_converged(self) -> bool:
        """False when the cached spectral radius is only a best estimate."""
        return self._converged

    def row_leverage(self) -> np.ndarray:
        """Row sums, equal to A_i/E_i for matrices built from exposures."""
        return self.matrix.sum(axis=1)

    def spectral_radius(self) -> float:
        """Largest eigenvalue magnitude (Perron root for non-negative input).

        Power iteration with Rayleigh stopping; falls back to a shifted
        iteration when the plain one stagnates. Warns ``ConvergenceFailure``
        and returns the best estimate if neither converges.
        """
        if self._radius is None:
            lam, ok = _perron_radius(self.matrix)
            self._radius = lam
            self._converged = ok
            if not ok:
                warnings.warn(
                    f"power iteration did not converge; best estimate {lam!r}",
                    ConvergenceFailure,
                    stacklevel=2,
                )
        return self._radius


def lambda_from_exposures(m: ExposureMatrix) -> LambdaMatrix:
    """Scale each exposure row by 1/e_i to obtain the propagation matrix."""
    e = m.bank_set.e
    return LambdaMatrix(m.alpha / e[:, None], e, copy=False)


def spectral_radius(lm: LambdaMatrix) -> float:
    """Spectral radius of a propagation matrix (cached on the instance)."""
    return lm.spectral_radius()


def _power_iteration(mat: np.ndarray, tol: float, max_iter: int):
    """Rayleigh-quotient power iteration.

    Returns (estimate, converged). Reports non-convergence when estimates
    oscillate with period two, which happens for imprimitive non-negative
    matrices whose dominant eigenvalue is not unique in magnitude.
    """
    n = mat.shape[0]
    v = np.full(n, 1.0 / n)
    prev = np.inf
    prev2 = np.inf
    osc_hits = 0
    lam = 0.0
    for _ in range(max_iter):
        mv = mat @ v
        norm = float(np.linalg.norm(mv))
        if norm == 0.0:
            return 0.0, True  # v reached the kernel exactly: nilpotent matrix
        lam = float(v @ mv) / float(v @ v)
        v = mv / norm
        scale = max(abs(lam), 1e-300)
        if abs(lam - prev) < tol * scale:
            return lam, True
        if abs(lam - prev2) < tol * scale:
            osc_hits += 1
            if osc_hits >= 8:
                return lam, False  # period-2 stagnation
        else:
            osc_hits = 0
        prev2 = prev
        prev = lam
    return lam, False


def _perron_radius(mat: np.ndarray, tol: float = 1e-12,
                   max_iter: int = 100_000):
    """Spectral radius of a non-negative matrix, with shifted fallback."""
    lam, ok = _power_iteration(mat, tol, max_iter)
    if ok:
        return max(lam, 0.0), True
    # Shift by s > 0: eigenvalues move to lambda_i + s, making the Perron
    # root strictly dominant in magnitude; undo the shift afterwards.
    shift = 0.5 * float(mat.sum(axis=1).max())
    if shift <= 0.0:
        shift = 1.0
    shifted = mat + shift * np.eye(mat.shape[0])
    lam2, ok2 = _power_iteration(shifted, tol, max_iter)
    return max(lam2 - shift, 0.0), ok2
