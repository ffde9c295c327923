"""Dense square matrices in exact-rational or floating-point mode.

Exact matrices hold :class:`fractions.Fraction` entries in a numpy object
array; float matrices hold a float64 array.  The mode is a property of the
whole matrix, never of single entries.  Every verdict about the conjectured
bounds is taken in exact mode; float mode only exists for fast search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidRank,
    NotExactMode,
    RankPermError,
    ZeroColSum,
    ZeroRowSum,
)

EXACT = "exact"
FLOAT = "float"

TOL_STOCH = 1e-9
TOL_RANK = 1e-9
MAX_DENOMINATOR = 10**6


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer, Rational)) and not isinstance(x, bool):
        return Fraction(int(x)) if isinstance(x, (int, np.integer)) else Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot store {x!r} ({type(x).__name__}) in an exact matrix")


class Matrix:
    """Immutable n x n matrix carrying a scalar mode ("exact" or "float")."""

    __slots__ = ("data", "mode")

    def __init__(self, entries, mode: str | None = None):
        if isinstance(entries, Matrix):
            entries = entries.data
        if mode is None:
            mode = _infer_mode(entries)
        if mode == EXACT:
            rows = [list(r) for r in entries]
            data = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
            for i, row in enumerate(rows):
                if len(row) != len(rows):
                    raise DimensionMismatch("matrix must be square")
                for j, x in enumerate(row):
                    data[i, j] = _to_fraction(x)
        elif mode == FLOAT:
            data = np.array(entries, dtype=np.float64)
            if not np.all(np.isfinite(data)):
                raise RankPermError("float matrix entries must be finite")
        else:
            raise ValueError(f"unknown mode {mode!r}")
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] < 1:
            raise DimensionMismatch(f"expected a nonempty square matrix, got shape {data.shape}")
        data.flags.writeable = False
        self.data = data
        self.mode = mode

    @classmethod
    def _wrap(cls, data: np.ndarray, mode: str) -> "Matrix":
        obj = cls.__new__(cls)
        data = np.array(data, dtype=object if mode == EXACT else np.float64)
        data.flags.writeable = False
        obj.data = data
        obj.mode = mode
        return obj

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def is_exact(self) -> bool:
        return self.mode == EXACT

    @property
    def T(self) -> "Matrix":
        return Matrix._wrap(self.data.T, self.mode)

    def __getitem__(self, idx):
        return self.data[idx]

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.n != other.n:
            raise DimensionMismatch(f"cannot multiply {self.n}x{self.n} by {other.n}x{other.n}")
        if self.is_exact and other.is_exact:
            return Matrix._wrap(self.data.dot(other.data), EXACT)
        return Matrix._wrap(self.to_float().data @ other.to_float().data, FLOAT)

    def __mul__(self, c) -> "Matrix":
        if self.is_exact and not isinstance(c, float):
            return Matrix._wrap(self.data * _to_fraction(c), EXACT)
        return Matrix._wrap(self.to_float().data * float(c), FLOAT)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.mode == other.mode and self.n == other.n and bool(np.all(self.data == other.data))

    __hash__ = None

    def __repr__(self) -> str:
        return f"Matrix({self.tolist()!r}, mode={self.mode!r})"

    def tolist(self) -> list:
        return self.data.tolist()

    def to_float(self) -> "Matrix":
        if not self.is_exact:
            return self
        return Matrix._wrap(self.data.astype(np.float64), FLOAT)

    def permute(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> "Matrix":
        """Reindex rows and/or columns: ``result[i, j] = self[rows[i], cols[j]]``."""
        data = self.data
        if rows is not None:
            data = data[list(rows), :]
        if cols is not None:
            data = data[:, list(cols)]
        return Matrix._wrap(data, self.mode)


def _infer_mode(entries) -> str:
    if isinstance(entries, np.ndarray) and entries.dtype != object:
        return FLOAT if entries.dtype.kind == "f" else EXACT
    flat = [x for row in entries for x in row]
    if any(isinstance(x, (float, np.floating)) for x in flat):
        return FLOAT
    return EXACT


def exact(rows) -> Matrix:
    return Matrix(rows, EXACT)


def identity(n: int, mode: str = EXACT) -> Matrix:
    if mode == EXACT:
        return Matrix([[int(i == j) for j in range(n)] for i in range(n)], EXACT)
    return Matrix(np.eye(n), FLOAT)


def uniform(n: int) -> Matrix:
    """J_n: the n x n matrix with every entry 1/n."""
    return Matrix([[Fraction(1, n)] * n for _ in range(n)], EXACT)


# -- sums, predicates, normalizations -------------------------------------


def row_sums(A: Matrix) -> list:
    return [sum(A.data[i, :].tolist(), _zero(A)) for i in range(A.n)]


def col_sums(A: Matrix) -> list:
    return [sum(A.data[:, j].tolist(), _zero(A)) for j in range(A.n)]


def _zero(A: Matrix):
    return Fraction(0) if A.is_exact else 0.0


def is_nonnegative(A: Matrix) -> bool:
    return bool(np.all(A.data >= 0))


def is_row_stochastic(A: Matrix, tol: float = TOL_STOCH) -> bool:
    if not is_nonnegative(A):
        return False
    if A.is_exact:
        return all(r == 1 for r in row_sums(A))
    return all(abs(r - 1.0) <= tol for r in row_sums(A))


def is_col_stochastic(A: Matrix, tol: float = TOL_STOCH) -> bool:
    return is_row_stochastic(A.T, tol)


def is_doubly_stochastic(A: Matrix, tol: float = TOL_STOCH) -> bool:
    return is_row_stochastic(A, tol) and is_col_stochastic(A, tol)


def has_zero_line(A: Matrix) -> bool:
    """True when some row or some column of a nonnegative matrix is identically zero."""
    return any(r == 0 for r in row_sums(A)) or any(c == 0 for c in col_sums(A))


def normalize_rows(A: Matrix) -> Matrix:
    sums = row_sums(A)
    for i, r in enumerate(sums):
        if r == 0:
            raise ZeroRowSum(i)
    data = np.empty_like(A.data)
    for i, r in enumerate(sums):
        data[i, :] = A.data[i, :] / r
    return Matrix._wrap(data, A.mode)


def normalize_cols(A: Matrix) -> Matrix:
    try:
        return normalize_rows(A.T).T
    except ZeroRowSum as exc:
        raise ZeroColSum(exc.index) from None


# -- rank --------------------------------------------------------------------


def _integer_rows(A: Matrix) -> list[list[int]]:
    """Clear denominators row by row; row scaling by a nonzero factor keeps rank."""
    rows = []
    for row in A.data.tolist():
        d = math.lcm(*(x.denominator for x in row))
        rows.append([x.numerator * (d // x.denominator) for x in row])
    return rows


def _bareiss_rank(M: list[list[int]]) -> int:
    M = [row[:] for row in M]
    m = len(M)
    ncols = len(M[0]) if M else 0
    rank, prev = 0, 1
    for col in range(ncols):
        pivot = next((i for i in range(rank, m) if M[i][col] != 0), None)
        if pivot is None:
            continue
        M[rank], M[pivot] = M[pivot], M[rank]
        p = M[rank][col]
        for i in range(rank + 1, m):
            a = M[i][col]
            row_i, row_p = M[i], M[rank]
            for j in range(col + 1, ncols):
                row_i[j] = (row_i[j] * p - a * row_p[j]) // prev
            row_i[col] = 0
        prev = p
        rank += 1
        if rank == m:
            break
    return rank


def rank(A: Matrix, tol: float = TOL_RANK) -> int:
    """Exact rank (fraction-free elimination) or numerical rank (relative SVD cutoff)."""
    if A.is_exact:
        return _bareiss_rank(_integer_rows(A))
    s = np.linalg.svd(A.data, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def rationalize(A: Matrix, max_denominator: int = MAX_DENOMINATOR) -> Matrix:
    """Nearest fractions with bounded denominator, negatives clamped to 0.

    No renormalization is applied, so the result may miss stochasticity by a
    few units of ``1/max_denominator``; callers re-test what they need.
    """
    if A.is_exact:
        return A
    rows = [
        [max(Fraction(x).limit_denominator(max_denominator), Fraction(0)) for x in row]
        for row in A.data.tolist()
    ]
    return Matrix(rows, EXACT)


def require_exact(A: Matrix) -> None:
    if not A.is_exact:
        raise NotExactMode("exact-mode matrix required; rationalize float input first")


# -- compositions and permutations -----------------------------------------


@dataclass(frozen=True)
class CompositionVector:
    """Positive parts summing to n, kept in nondecreasing order."""

    parts: tuple[int, ...]

    def __init__(self, parts: Iterable[int]):
        parts = tuple(sorted(int(p) for p in parts))
        if not parts or parts[0] < 1:
            raise ValueError(f"composition parts must be positive integers, got {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def n(self) -> int:
        return sum(self.parts)

    @property
    def s(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.parts)) + ")"

    def offsets(self) -> list[int]:
        out, acc = [], 0
        for m in self.parts:
            out.append(acc)
            acc += m
        return out


def composition_for(n: int, k: int) -> CompositionVector:
    """The balanced k-part composition of n: n = r*k + s with s parts equal to r+1."""
    if not 1 <= k <= n:
        raise InvalidRank(n, k)
    r, s = divmod(n, k)
    return CompositionVector([r] * (k - s) + [r + 1] * s)


def composition_matrix(rvec: CompositionVector) -> Matrix:
    """Block-diagonal direct sum of J_m over the parts m."""
    n = rvec.n
    data = np.full((n, n), Fraction(0), dtype=object)
    for off, m in zip(rvec.offsets(), rvec.parts):
        data[off:off + m, off:off + m] = Fraction(1, m)
    return Matrix._wrap(data, EXACT)


@dataclass(frozen=True)
class Permutation:
    """A permutation of {0..n-1}; ``images[i]`` is sigma(i).

    User-facing text (``one_line`` / ``parse``) is 1-based.
    """

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(x) for x in self.images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a permutation of 0..{len(images) - 1}: {images}")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        try:
            images = [int(tok) - 1 for tok in text.replace(" ", "").split(",") if tok]
            return cls(tuple(images))
        except ValueError as exc:
            raise ValueError(f"bad permutation {text!r}: {exc}") from None

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Permutation":
        return cls(tuple(int(x) for x in rng.permutation(n)))

    @classmethod
    def from_matrix(cls, M: Matrix) -> "Permutation":
        images = []
        for i in range(M.n):
            ones = [j for j in range(M.n) if M[i, j] != 0]
            if len(ones) != 1 or M[i, ones[0]] != 1:
                raise ValueError(f"row {i + 1} is not a unit row")
            images.append(ones[0])
        return cls(tuple(images))

    def __len__(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    @property
    def n(self) -> int:
        return len(self.images)

    @property
    def matrix(self) -> Matrix:
        """pi(sigma) with entry (i, j) equal to 1 iff sigma(i) = j."""
        n = len(self.images)
        return Matrix([[int(self.images[i] == j) for j in range(n)] for i in range(n)], EXACT)

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    def one_line(self) -> str:
        return ",".join(str(x + 1) for x in self.images)


def conjugate_extremal(rvec: CompositionVector, P: Permutation, Q: Permutation) -> Matrix:
    """P . J_r . Q for permutations P, Q."""
    if not (len(P) == len(Q) == rvec.n):
        raise DimensionMismatch(f"permutations of size {len(P)}, {len(Q)} vs composition of {rvec.n}")
    return P.matrix @ composition_matrix(rvec) @ Q.matrix
