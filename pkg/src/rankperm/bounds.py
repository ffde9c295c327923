"""Conjectured upper bounds for the permanent and for diagonal products over
rank-bounded matrices, and the decision procedures for their equality cases."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .diagonal import diagonal_product
from .errors import InvalidRank, MissingSigma, NotNonnegative
from .matrix import (
    CompositionVector,
    Matrix,
    Permutation,
    col_sums,
    composition_for,
    has_zero_line,
    is_nonnegative,
    normalize_cols,
    normalize_rows,
    require_exact,
    row_sums,
)
from .permanent import permanent_ryser

PERMANENT = "permanent"
DIAGONAL = "diagonal"

_KIND_ALIASES = {
    "per": PERMANENT,
    "permanent": PERMANENT,
    "diag": DIAGONAL,
    "diagonal": DIAGONAL,
    "maxdiag": DIAGONAL,
}

ZERO_LINE = "zero-line"
ROW_FORM = "row-form"
COL_FORM = "col-form"
BOTH_FORMS = "both-forms"
NONE = "none"

CASE_NUMBER = {ZERO_LINE: 1, ROW_FORM: 2, COL_FORM: 3, BOTH_FORMS: 4, NONE: None}


def normalize_kind(kind: str) -> str:
    try:
        return _KIND_ALIASES[kind]
    except KeyError:
        raise ValueError(f"unknown kind {kind!r}; expected per or diag") from None


@dataclass(frozen=True)
class BoundReport:
    n: int
    k: int
    r: int
    s: int
    composition: CompositionVector
    kind: str
    stochastic_bound: Fraction
    formulation: str = "stochastic"
    scale: Fraction | float = Fraction(1)

    @property
    def total(self):
        """The bound itself: scale times the stochastic bound."""
        if isinstance(self.scale, float):
            return self.scale * float(self.stochastic_bound)
        return self.scale * self.stochastic_bound


def _split(n: int, k: int) -> tuple[int, int]:
    if not 1 <= k <= n:
        raise InvalidRank(n, k)
    return divmod(n, k)


def bound_permanent_stochastic(n: int, k: int) -> BoundReport:
    """(r!/r^r)^(k-s) * ((r+1)!/(r+1)^(r+1))^s with n = r*k + s."""
    r, s = _split(n, k)
    value = (Fraction(math.factorial(r), r**r) ** (k - s)
             * Fraction(math.factorial(r + 1), (r + 1) ** (r + 1)) ** s)
    return BoundReport(n, k, r, s, composition_for(n, k), PERMANENT, value)


def bound_diagonal_stochastic(n: int, k: int) -> BoundReport:
    """(1/r^r)^(k-s) * (1/(r+1)^(r+1))^s with n = r*k + s."""
    r, s = _split(n, k)
    value = Fraction(1, r**r) ** (k - s) * Fraction(1, (r + 1) ** (r + 1)) ** s
    return BoundReport(n, k, r, s, composition_for(n, k), DIAGONAL, value)


def bound_stochastic(n: int, k: int, kind: str) -> BoundReport:
    if normalize_kind(kind) == PERMANENT:
        return bound_permanent_stochastic(n, k)
    return bound_diagonal_stochastic(n, k)


def _prod(values, one):
    return math.prod(values, start=one)


def bound_nonnegative(A: Matrix, k: int, kind: str) -> BoundReport:
    """Bound for a nonnegative matrix: min(prod of row sums, prod of column sums)
    times the stochastic bound."""
    if not is_nonnegative(A):
        raise NotNonnegative("bound_nonnegative needs a nonnegative matrix")
    base = bound_stochastic(A.n, k, kind)
    one = Fraction(1) if A.is_exact else 1.0
    scale = min(_prod(row_sums(A), one), _prod(col_sums(A), one))
    return BoundReport(base.n, base.k, base.r, base.s, base.composition, base.kind,
                       base.stochastic_bound, "nonnegative", scale)


# -- equality cases ------------------------------------------------------------


@dataclass(frozen=True)
class EqualityVerdict:
    holds: bool
    case: str
    witnesses: dict = field(default_factory=dict)

    @property
    def case_number(self):
        return CASE_NUMBER[self.case]


def _row_pattern(row) -> tuple[frozenset, int] | None:
    """Support of a row whose nonzeros all equal 1/m, m the support size."""
    support = frozenset(j for j, x in enumerate(row) if x != 0)
    m = len(support)
    if m == 0 or any(row[j] != Fraction(1, m) for j in support):
        return None
    return support, m


def _block_layout(classes: list[tuple[list[int], frozenset]]):
    """Order classes by (size, smallest column) and give each a block offset."""
    classes = sorted(classes, key=lambda c: (len(c[1]), min(c[1])))
    offset = 0
    for rows, support in classes:
        yield offset, rows, sorted(support)
        offset += len(support)


def is_PJQ_form(A: Matrix, rvec: CompositionVector) -> EqualityVerdict:
    """Decide whether A = P . J_r . Q for permutation matrices P, Q.

    Every row must be uniform on its support; rows sharing a support of size
    m form a class of exactly m rows; supports of different classes are
    disjoint; class sizes match the parts of ``rvec``.  On success the
    witnesses ``P`` and ``Q`` satisfy ``P.matrix @ J_r @ Q.matrix == A``.
    """
    require_exact(A)
    if rvec.n != A.n:
        return EqualityVerdict(False, NONE)
    rows = A.data.tolist()
    classes: dict[frozenset, list[int]] = {}
    for i, row in enumerate(rows):
        pattern = _row_pattern(row)
        if pattern is None:
            return EqualityVerdict(False, NONE)
        classes.setdefault(pattern[0], []).append(i)
    seen: set[int] = set()
    for support, members in classes.items():
        if len(members) != len(support) or seen & support:
            return EqualityVerdict(False, NONE)
        seen |= support
    if sorted(len(s) for s in classes) != list(rvec.parts):
        return EqualityVerdict(False, NONE)

    p_images = [0] * A.n
    q_images = [0] * A.n
    for offset, members, support in _block_layout([(m, s) for s, m in classes.items()]):
        for pos, i in enumerate(sorted(members)):
            p_images[i] = offset + pos
        for pos, j in enumerate(support):
            q_images[offset + pos] = j
    return EqualityVerdict(True, ROW_FORM, {"P": Permutation(tuple(p_images)),
                                            "Q": Permutation(tuple(q_images))})


def is_conjugate_form(A: Matrix, rvec: CompositionVector, sigma: Permutation) -> EqualityVerdict:
    """Decide whether A = P^t . J_r . P . pi(sigma) for a permutation matrix P.

    Equivalently B = A . pi(sigma)^t is the block matrix of an equivalence
    relation: positive diagonal, each row uniform on its class, classes
    partitioning the indices with sizes equal to the parts of ``rvec``.
    The witness ``P`` satisfies ``P.matrix.T @ J_r @ P.matrix == B``.
    """
    require_exact(A)
    if rvec.n != A.n or len(sigma) != A.n:
        return EqualityVerdict(False, NONE)
    B = A.permute(cols=sigma.images)
    rows = B.data.tolist()
    supports = []
    for i, row in enumerate(rows):
        pattern = _row_pattern(row)
        if pattern is None or i not in pattern[0]:
            return EqualityVerdict(False, NONE)
        supports.append(pattern[0])
    for i, support in enumerate(supports):
        if any(supports[j] != support for j in support):
            return EqualityVerdict(False, NONE)
    classes = {s: sorted(s) for s in supports}
    if sorted(len(s) for s in classes) != list(rvec.parts):
        return EqualityVerdict(False, NONE)

    position = [0] * A.n
    for offset, members, _ in _block_layout([(m, s) for s, m in classes.items()]):
        for pos, i in enumerate(members):
            position[i] = offset + pos
    # P = pi(rho) with rho^{-1}(i) = position[i]
    P = Permutation(tuple(position)).inverse()
    return EqualityVerdict(True, ROW_FORM, {"P": P, "sigma": sigma})


def _extremal_form(M: Matrix, rvec: CompositionVector, kind: str, sigma):
    if kind == PERMANENT:
        return is_PJQ_form(M, rvec)
    return is_conjugate_form(M, rvec, sigma)


def equality_case_nonnegative(A: Matrix, k: int, kind: str,
                              sigma: Permutation | None = None) -> EqualityVerdict:
    """Which of the four equality conditions (if any) a nonnegative matrix meets.

    1. a zero row or zero column;
    2. 0 < prod(row sums) < prod(col sums) and the row-normalized matrix is extremal;
    3. 0 < prod(col sums) < prod(row sums) and the column-normalized matrix is extremal;
    4. 0 < prod(row sums) = prod(col sums) and both normalizations are extremal.

    "Extremal" means P.J.Q form for the permanent and P^t.J.P.pi(sigma) form
    for the sigma-diagonal product, with J built from the balanced k-part
    composition of n.  The cases are tested exactly as stated, without merging.
    """
    kind = normalize_kind(kind)
    if not is_nonnegative(A):
        raise NotNonnegative("equality cases are defined for nonnegative matrices")
    require_exact(A)
    if kind == DIAGONAL and sigma is None:
        raise MissingSigma("the diagonal equality case needs a permutation sigma")
    rvec = composition_for(A.n, k)
    if has_zero_line(A):
        return EqualityVerdict(True, ZERO_LINE)
    prod_r = _prod(row_sums(A), Fraction(1))
    prod_c = _prod(col_sums(A), Fraction(1))
    if 0 < prod_r < prod_c:
        v = _extremal_form(normalize_rows(A), rvec, kind, sigma)
        if v.holds:
            return EqualityVerdict(True, ROW_FORM, {"row": v.witnesses})
    elif 0 < prod_c < prod_r:
        v = _extremal_form(normalize_cols(A), rvec, kind, sigma)
        if v.holds:
            return EqualityVerdict(True, COL_FORM, {"col": v.witnesses})
    elif 0 < prod_r == prod_c:
        vr = _extremal_form(normalize_rows(A), rvec, kind, sigma)
        vc = _extremal_form(normalize_cols(A), rvec, kind, sigma)
        if vr.holds and vc.holds:
            return EqualityVerdict(True, BOTH_FORMS, {"row": vr.witnesses, "col": vc.witnesses})
    return EqualityVerdict(False, NONE)


def objective_value(A: Matrix, kind: str, sigma: Permutation | None = None):
    """per(A) for the permanent; the sigma-diagonal product for the diagonal kind."""
    if normalize_kind(kind) == PERMANENT:
        return permanent_ryser(A)
    if sigma is None:
        raise MissingSigma("the diagonal objective needs a permutation sigma")
    return diagonal_product(A, sigma)


@dataclass(frozen=True)
class AttainmentCheck:
    verdict: EqualityVerdict
    value: Fraction
    bound: Fraction
    attained: bool

    @property
    def consistent(self) -> bool:
        """False flags a disagreement between the stated equality conditions
        and the exact comparison of value against bound."""
        return self.verdict.holds == self.attained


def check_attainment(A: Matrix, k: int, kind: str,
                     sigma: Permutation | None = None) -> AttainmentCheck:
    """Equality verdict plus the exact value/bound comparison it should agree with."""
    verdict = equality_case_nonnegative(A, k, kind, sigma)
    value = objective_value(A, kind, sigma)
    bound = bound_nonnegative(A, k, kind).total
    return AttainmentCheck(verdict, value, bound, value == bound)
