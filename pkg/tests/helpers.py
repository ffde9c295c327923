from fractions import Fraction

import numpy as np

from rankperm.matrix import CompositionVector, Matrix, Permutation


def random_rational_matrix(rng, n, zero_prob=0.2, max_num=9, max_den=6, positive=False):
    rows = []
    for _ in range(n):
        row = []
        for _ in range(n):
            if not positive and rng.random() < zero_prob:
                row.append(Fraction(0))
            else:
                row.append(Fraction(int(rng.integers(1, max_num + 1)), int(rng.integers(1, max_den + 1))))
        rows.append(row)
    return Matrix(rows, "exact")


def random_composition(rng, n):
    """Uniform random composition of n (cut points chosen independently)."""
    cuts = [i for i in range(1, n) if rng.random() < 0.5]
    bounds = [0] + cuts + [n]
    return CompositionVector(b - a for a, b in zip(bounds, bounds[1:]))


def all_compositions(n):
    for mask in range(1 << (n - 1)):
        parts, last = [], 0
        for i in range(1, n):
            if mask >> (i - 1) & 1:
                parts.append(i - last)
                last = i
        parts.append(n - last)
        yield parts


def diag(values):
    n = len(values)
    return Matrix([[values[i] if i == j else 0 for j in range(n)] for i in range(n)], "exact")


def rand_perm(rng, n):
    return Permutation.random(n, rng)


# acceptance criteria results, printed by the terminal-summary hook in conftest
ACCEPTANCE = []
