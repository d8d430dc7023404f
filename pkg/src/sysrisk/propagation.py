"""Linear distress propagation: the shock recursion, its fixed point, and
the inverse problem of finding initial shocks for a target final state."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LambdaMatrix
from .errors import SupercriticalSystem

# Propagation stops once any |h_i| exceeds this; supercritical runs must
# terminate cleanly instead of overflowing.
DIVERGENCE_GUARD = 1e12

# Margin below 1 at which the fixed-point solve is refused.
CRITICAL_MARGIN = 1e-9


@dataclass(frozen=True)
class PropagationState:
    """Distress snapshot at iteration t.

    ``h`` is the relative equity loss per bank (not clamped at 1);
    ``aggregate_loss`` is the equity-weighted total sum_i h_i e_i.
    """

    t: int
    h: np.ndarray
    aggregate_loss: float

    @property
    def bankrupt(self) -> np.ndarray:
        """Banks whose relative loss has reached full equity."""
        return self.h >= 1.0


def _check_shock(lm: LambdaMatrix, h1) -> np.ndarray:
    h1 = np.asarray(h1, dtype=float)
    if h1.shape != (lm.n_banks,):
        raise ValueError(f"shock vector shape {h1.shape} does not match "
                         f"{lm.n_banks} banks")
    if not np.all(np.isfinite(h1)):
        raise ValueError("shock vector contains non-finite entries")
    return h1


def propagate(lm: LambdaMatrix, h1, t_max: int) -> list[PropagationState]:
    """Iterate the distress recursion for t = 1 .. t_max.

    The state at time t accumulates sum_{s<t} of the matrix powers applied
    to the initial shock, via repeated matrix-vector products. Values are
    not clamped at 1; bankruptcy shows up through the per-state flag.
    Stops early (returning the states computed so far) once any component
    would pass the divergence guard, which happens for spectral radius >= 1
    and large t_max.
    """
    h1 = _check_shock(lm, h1)
    if np.any(h1 < 0):
        raise ValueError("initial shock must be non-negative")
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    mat = lm.matrix
    e = lm.equity_weights
    h = h1.copy()
    term = h1.copy()
    states = [PropagationState(1, h.copy(), float(h @ e))]
    for t in range(2, t_max + 1):
        term = mat @ term
        nxt = h + term
        if not np.all(np.isfinite(nxt)) or float(np.abs(nxt).max()) > DIVERGENCE_GUARD:
            break
        h = nxt
        states.append(PropagationState(t, h.copy(), float(h @ e)))
    return states


def h_infinity_exact(lm: LambdaMatrix, h1) -> np.ndarray:
    """Fixed point of the recursion, from a direct linear solve.

    Solves (I - Lambda) h_inf = h(1) with LU factorization. Requires the
    spectral radius to be below 1, otherwise the series has no finite limit.
    """
    h1 = _check_shock(lm, h1)
    lam = lm.spectral_radius()
    if lam >= 1.0 - CRITICAL_MARGIN:
        raise SupercriticalSystem(
            f"spectral radius {lam!r} >= 1: distress series diverges"
        )
    n = lm.n_banks
    system = np.eye(n) - lm.matrix
    return np.linalg.solve(system, h1)


@dataclass(frozen=True)
class InitialShock:
    """Initial shock reproducing a target final state, with feasibility flags.

    A negative component means that the target cannot be reached with
    non-negative initial shocks.
    """

    shock: np.ndarray
    feasible: np.ndarray

    @property
    def all_feasible(self) -> bool:
        return bool(self.feasible.all())


def initial_shock_from_target(lm: LambdaMatrix, h_inf) -> InitialShock:
    """Map a target final distress back to the initial shock producing it.

    Plain matrix-vector product h(1) = (I - Lambda) h_inf; no inversion.
    Components are returned as-is, flagged infeasible where negative.
    """
    h_inf = np.asarray(h_inf, dtype=float)
    if h_inf.shape != (lm.n_banks,):
        raise ValueError("target vector length does not match bank count")
    if np.any(h_inf < 0) or np.any(h_inf >= 1.0):
        raise ValueError("target distress must satisfy 0 <= h_inf_i < 1")
    shock = h_inf - lm.matrix @ h_inf
    return InitialShock(shock=shock, feasible=shock >= 0.0)


@dataclass(frozen=True)
class ShockSampleSummary:
    """Per-component ranges of initial shocks mapped from uniform targets."""

    minimum: np.ndarray
    maximum: np.ndarray
    mean: np.ndarray
    nonnegative_fraction: float
    n_samples: int


def sample_no_bankruptcy_shocks(lm: LambdaMatrix, n_samples: int,
                                rng_seed: int) -> ShockSampleSummary:
    """Monte Carlo sweep of the no-bankruptcy region.

    Draws final-state components i.i.d. uniform on [0, 1), maps each draw
    through the inverse relation, and summarizes the resulting initial
    shocks per component. Components are sampled independently; correlated
    sampling is not explored here.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(rng_seed)
    targets = rng.random((n_samples, lm.n_banks))
    shocks = targets - targets @ lm.matrix.T
    return ShockSampleSummary(
        minimum=shocks.min(axis=0),
        maximum=shocks.max(axis=0),
        mean=shocks.mean(axis=0),
        nonnegative_fraction=float(np.mean(np.all(shocks >= 0.0, axis=1))),
        n_samples=n_samples,
    )
