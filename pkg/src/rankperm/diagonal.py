"""Diagonal products and the maximum diagonal product of a nonnegative matrix."""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DimensionMismatch, DimensionTooLarge
from .matrix import Matrix, Permutation

N_MAX_NAIVE = 9
TIE_TOL = 1e-12


def diagonal_product(A: Matrix, sigma: Permutation):
    """prod_i a[i, sigma(i)]."""
    if len(sigma) != A.n:
        raise DimensionMismatch(f"permutation of size {len(sigma)} for a {A.n}x{A.n} matrix")
    one = Fraction(1) if A.is_exact else 1.0
    return math.prod((A.data[i, sigma(i)] for i in range(A.n)), start=one)


def _log_costs(A: Matrix) -> np.ndarray:
    """Negative log weights; zero entries become +inf (excluded arcs)."""
    cost = np.full((A.n, A.n), np.inf)
    for (i, j), x in np.ndenumerate(A.data):
        if x > 0:
            if A.is_exact:
                cost[i, j] = math.log(x.denominator) - math.log(x.numerator)
            else:
                cost[i, j] = -math.log(x)
    return cost


def _solve(cost: np.ndarray):
    try:
        rows, cols = linear_sum_assignment(cost)
    except ValueError:  # no finite perfect matching: every diagonal hits a zero
        return None, math.inf
    return tuple(int(c) for c in cols[np.argsort(rows)]), float(cost[rows, cols].sum())


def _runner_up(cost: np.ndarray, best: tuple[int, ...]) -> float:
    """Cheapest assignment that differs from ``best`` in at least one arc."""
    out = math.inf
    for i, j in enumerate(best):
        banned = cost.copy()
        banned[i, j] = np.inf
        _, c = _solve(banned)
        out = min(out, c)
    return out


def max_diagonal_product(A: Matrix, resolve_ties: bool = True):
    """Largest diagonal product and a permutation attaining it.

    Solved as a maximum-weight assignment on log-entries.  In exact mode the
    winning product is re-evaluated exactly.  When the best two assignments
    are within ``TIE_TOL`` in log space and n <= 9, the answer is settled by
    enumeration so that ties resolve to the lexicographically smallest sigma.
    ``resolve_ties=False`` skips that check (used inside the search loop).
    """
    cost = _log_costs(A)
    best, best_cost = _solve(cost)
    if best is None:
        zero = Fraction(0) if A.is_exact else 0.0
        return zero, Permutation.identity(A.n)
    if resolve_ties and A.n <= N_MAX_NAIVE and A.n > 1:
        if _runner_up(cost, best) - best_cost <= TIE_TOL:
            return max_diagonal_naive(A)
    sigma = Permutation(best)
    return diagonal_product(A, sigma), sigma


def max_diagonal_naive(A: Matrix, n_max: int = N_MAX_NAIVE):
    """Brute force over all n! permutations, lexicographically smallest sigma on ties."""
    if A.n > n_max:
        raise DimensionTooLarge(A.n, n_max)
    rows = A.data.tolist()
    one = Fraction(1) if A.is_exact else 1.0
    best_val, best_sigma = None, None
    for sigma in permutations(range(A.n)):
        val = math.prod((rows[i][sigma[i]] for i in range(A.n)), start=one)
        if best_val is None or val > best_val:
            best_val, best_sigma = val, sigma
    return best_val, Permutation(best_sigma)
