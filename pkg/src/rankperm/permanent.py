"""Permanents: Ryser's formula with Gray-code updates, plus a brute-force oracle."""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import permutations

import numpy as np

from .errors import DimensionTooLarge
from .matrix import CompositionVector, Matrix

N_MAX_FLOAT = 20
N_MAX_EXACT = 14
N_MAX_NAIVE = 9

_CHUNK = 1 << 8


def _gray_steps(n: int):
    """Column index and +1/-1 direction of every Gray-code step g = 1 .. 2^n - 1,
    together with the parity sign (-1)^(n - |S|) of the subset reached."""
    g = np.arange(1, 1 << n, dtype=np.int64)
    gray = g ^ (g >> 1)
    prev = (g - 1) ^ ((g - 1) >> 1)
    flipped = gray ^ prev
    col = np.log2(flipped).astype(np.int64)
    added = (gray & flipped) != 0
    popcount = np.zeros_like(gray)
    x = gray.copy()
    while np.any(x):
        popcount += x & 1
        x >>= 1
    sign = np.where((n - popcount) % 2 == 0, 1, -1)
    return col, np.where(added, 1, -1), sign, gray


_STEP_CACHE: dict[int, tuple] = {}


def _steps(n: int):
    if n not in _STEP_CACHE:
        _STEP_CACHE[n] = _gray_steps(n)
    return _STEP_CACHE[n]


def _ryser_kernel(a: np.ndarray):
    """Ryser inclusion-exclusion over column subsets visited in Gray-code order.

    ``a`` is float64 or an object array of Python ints; the row sums are
    carried incrementally, one column added or removed per step.  The same
    traversal serves both scalar types.
    """
    n = a.shape[0]
    col, direction, sign, gray = _steps(n)
    zero = 0 if a.dtype == object else 0.0
    sign = sign.astype(a.dtype)
    cols = a.T
    total = zero
    for start in range(0, len(col), _CHUNK):
        stop = min(start + _CHUNK, len(col))
        if start == 0:
            base = np.array([zero] * n, dtype=a.dtype)
        else:
            # re-anchor at the exact subset sum to stop drift in float mode
            members = [j for j in range(n) if (int(gray[start - 1]) >> j) & 1]
            base = a[:, members].sum(axis=1)
        deltas = cols[col[start:stop]] * direction[start:stop, None]
        rowsums = np.cumsum(deltas, axis=0) + base
        total = total + np.dot(sign[start:stop], np.prod(rowsums, axis=1))
    return total


def permanent_ryser(A: Matrix, n_max: int | None = None):
    """per(A) in O(2^n n) time; exact (Fraction) in exact mode, float otherwise."""
    n = A.n
    if n_max is None:
        n_max = N_MAX_EXACT if A.is_exact else N_MAX_FLOAT
    if n > n_max:
        raise DimensionTooLarge(n, n_max)
    if not A.is_exact:
        return float(_ryser_kernel(A.data))
    # per is linear in each row: clear denominators row-wise, work on integers.
    rows = A.data.tolist()
    scale = 1
    ints = np.empty((n, n), dtype=object)
    for i, row in enumerate(rows):
        d = math.lcm(*(x.denominator for x in row))
        scale *= d
        for j, x in enumerate(row):
            ints[i, j] = x.numerator * (d // x.denominator)
    return Fraction(int(_ryser_kernel(ints)), scale)


def permanent_naive(A: Matrix, n_max: int = N_MAX_NAIVE):
    """Sum of all n! diagonal products; the oracle for :func:`permanent_ryser`."""
    n = A.n
    if n > n_max:
        raise DimensionTooLarge(n, n_max)
    rows = A.data.tolist()
    total = Fraction(0) if A.is_exact else 0.0
    for sigma in permutations(range(n)):
        total += math.prod((rows[i][sigma[i]] for i in range(n)), start=Fraction(1) if A.is_exact else 1.0)
    return total


def permanent_block(rvec: CompositionVector) -> Fraction:
    """Closed-form per(J_r): product of m!/m^m over the parts."""
    out = Fraction(1)
    for m in rvec.parts:
        out *= Fraction(math.factorial(m), m**m)
    return out
