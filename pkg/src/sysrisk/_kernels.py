"""Compiled inner loops for the annealing search.

A sweep performs N^2 four-cell update trials; each trial re-evaluates the
truncated multiplier series on the candidate matrix, so the compiled path
is what makes sweep counts in the thousands practical. The RNG is an
explicit xorshift128+ with its state passed in, so chains are reproducible
bit-for-bit and nothing leaks through global state.
"""
from __future__ import annotations

import numpy as np
from numba import njit

_SHIFT_A = np.uint64(23)
_SHIFT_B = np.uint64(17)
_SHIFT_C = np.uint64(26)
_MANTISSA_SHIFT = np.uint64(11)
_INV_2_53 = 1.0 / 9007199254740992.0

_MASK64 = (1 << 64) - 1


def make_rng_state(seed: int) -> np.ndarray:
    """Expand a seed into xorshift128+ state via splitmix64."""
    z = seed & _MASK64
    state = np.empty(2, dtype=np.uint64)
    for i in range(2):
        z = (z + 0x9E3779B97F4A7C15) & _MASK64
        t = z
        t = ((t ^ (t >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        t = ((t ^ (t >> 27)) * 0x94D049BB133111EB) & _MASK64
        state[i] = (t ^ (t >> 31)) & _MASK64
    if state[0] == 0 and state[1] == 0:
        state[0] = np.uint64(0x9E3779B97F4A7C15)
    return state


@njit(cache=True, inline="always")
def _next_u64(state):
    s1 = state[0]
    s0 = state[1]
    result = s0 + s1
    state[0] = s0
    s1 = s1 ^ (s1 << _SHIFT_A)
    state[1] = s1 ^ s0 ^ (s1 >> _SHIFT_B) ^ (s0 >> _SHIFT_C)
    return result


@njit(cache=True, inline="always")
def rand_uniform(state):
    """Uniform double in [0, 1)."""
    return (_next_u64(state) >> _MANTISSA_SHIFT) * _INV_2_53


@njit(cache=True, inline="always")
def _rand_below(state, n):
    return int(rand_uniform(state) * n)


@njit(cache=True, nogil=True, fastmath=True)
def psi_series(alpha, e, inv_e, t_terms, w, wn):
    """Truncated multiplier series evaluated directly on the exposure array.

    w and wn are length-N scratch vectors.
    """
    n = e.shape[0]
    total = 0.0
    s = 0.0
    for i in range(n):
        w[i] = e[i]
        s += e[i]
    total = s
    for _ in range(1, t_terms):
        for j in range(n):
            wn[j] = 0.0
        for i in range(n):
            ui = w[i] * inv_e[i]
            if ui != 0.0:
                for j in range(n):
                    wn[j] += ui * alpha[i, j]
        s = 0.0
        for j in range(n):
            w[j] = wn[j]
            s += wn[j]
        total += s
    return total


@njit(cache=True, nogil=True, fastmath=True)
def objective_value(alpha, e, inv_e, sign, beta_k, beta_asym, t_terms,
                    eps_zero, w, wn):
    """F = sign * Psi_trial - beta_k * mean_degree - beta_asym * symmetry."""
    psi = psi_series(alpha, e, inv_e, t_terms, w, wn)
    n = alpha.shape[0]
    edges = 0
    num = 0.0
    den = 0.0
    for i in range(n):
        for j in range(n):
            x = alpha[i, j]
            if x > eps_zero:
                edges += 1
            den += x * x
            num += x * alpha[j, i]
    sym = num / den if den > 0.0 else 0.0
    return sign * psi - beta_k * edges / n - beta_asym * sym


@njit(cache=True, nogil=True)
def metropolis_accept(delta_f, beta, state):
    """Accept with probability min(1, exp(beta * delta_f))."""
    if delta_f >= 0.0:
        return True
    return rand_uniform(state) < np.exp(beta * delta_f)


@njit(cache=True, nogil=True, fastmath=True)
def anneal_sweep(alpha, e, inv_e, beta, sign, beta_k, beta_asym, t_terms,
                 eps_zero, full_transfer_prob, state, f_current, w, wn):
    """One sweep of N^2 four-cell Metropolis trials, mutating alpha in place.

    Proposals draw a uniformly random off-diagonal 2x2 rectangle; the two
    donor cells bound the transferable mass. Empty donors make the trial a
    null proposal (it still consumes sweep budget). Rejected moves restore
    the four cells to their saved values, so rejection is bit-exact.

    Returns (updated objective value, accepted move count).
    """
    n = alpha.shape[0]
    accepted = 0
    for _ in range(n * n):
        while True:
            i1 = _rand_below(state, n)
            i2 = _rand_below(state, n)
            j1 = _rand_below(state, n)
            j2 = _rand_below(state, n)
            if (i1 != i2 and j1 != j2 and i1 != j1 and i2 != j2
                    and i1 != j2 and i2 != j1):
                break
        lo = alpha[i1, j2]
        hi = alpha[i2, j1]
        m_d = lo if lo < hi else hi
        if m_d <= eps_zero:
            continue
        if rand_uniform(state) < full_transfer_prob:
            d = m_d
        else:
            d = rand_uniform(state) * m_d
        a11 = alpha[i1, j1]
        a22 = alpha[i2, j2]
        a12 = alpha[i1, j2]
        a21 = alpha[i2, j1]
        alpha[i1, j1] = a11 + d
        alpha[i2, j2] = a22 + d
        alpha[i1, j2] = a12 - d
        alpha[i2, j1] = a21 - d
        f_new = objective_value(alpha, e, inv_e, sign, beta_k, beta_asym,
                                t_terms, eps_zero, w, wn)
        if metropolis_accept(f_new - f_current, beta, state):
            f_current = f_new
            accepted += 1
        else:
            alpha[i1, j1] = a11
            alpha[i2, j2] = a22
            alpha[i1, j2] = a12
            alpha[i2, j1] = a21
    return f_current, accepted
