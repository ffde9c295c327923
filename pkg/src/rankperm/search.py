"""Hill-climbing search for large permanents / diagonal products over
row-stochastic matrices of bounded rank, with exact re-certification.

Feasible points are parameterized as products B @ C of an n x k and a k x n
row-stochastic matrix, so every iterate is row-stochastic with rank <= k.
This reaches exactly the matrices of nonnegative rank <= k; see SCOPE_NOTE.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .bounds import (
    DIAGONAL,
    PERMANENT,
    BoundReport,
    bound_nonnegative,
    bound_stochastic,
    normalize_kind,
)
from .diagonal import max_diagonal_product
from .errors import InvalidRank, RationalizationFailed
from .matrix import (
    FLOAT,
    MAX_DENOMINATOR,
    TOL_STOCH,
    Matrix,
    is_row_stochastic,
    rank,
    rationalize,
)
from .permanent import permanent_ryser

MATCHES = "MATCHES"
BELOW = "BELOW"
CANDIDATE_VIOLATION = "CANDIDATE_VIOLATION"
CERTIFIED_VIOLATION = "CERTIFIED_VIOLATION"

MATCH_TOL = 1e-6

SCOPE_NOTE = (
    "searched row-stochastic B@C factorizations (nonnegative rank <= k); column-stochastic "
    "side covered by transposition; real-rank <= k matrices of larger nonnegative rank not explored"
)


@dataclass(frozen=True)
class SearchConfig:
    n: int
    k: int
    objective: str = PERMANENT
    restarts: int = 50
    iterations: int = 2000
    step: float = 1.0
    decay: float = 0.997
    seed: int = 0
    margin: float = 1e-7

    def __post_init__(self):
        object.__setattr__(self, "objective", normalize_kind(self.objective))
        if not 1 <= self.k <= self.n:
            raise InvalidRank(self.n, self.k)
        if self.restarts < 1 or self.iterations < 1:
            raise ValueError("restarts and iterations must be >= 1")
        if not 0 < self.decay <= 1:
            raise ValueError("step decay must lie in (0, 1]")
        if self.step <= 0:
            raise ValueError("initial step must be positive")

    def as_dict(self) -> dict:
        return {
            "n": self.n, "k": self.k, "objective": self.objective,
            "restarts": self.restarts, "iterations": self.iterations,
            "step": self.step, "decay": self.decay, "seed": self.seed, "margin": self.margin,
        }


@dataclass
class FactorPair:
    B: np.ndarray  # n x k, rows on the simplex
    C: np.ndarray  # k x n, rows on the simplex

    @property
    def product(self) -> np.ndarray:
        return self.B @ self.C


@dataclass
class SearchOutcome:
    best_matrix: Matrix
    value: float | Fraction
    bound: BoundReport
    gap: float | Fraction
    verdict: str
    seed: int
    trace: list = field(default_factory=list)
    config: SearchConfig | None = None
    factors: FactorPair | None = None
    exact_matrix: Matrix | None = None
    explanation: str = ""


def _simplex_rows(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    x = rng.standard_exponential((rows, cols))
    return x / x.sum(axis=1, keepdims=True)


def random_factor_pair(n: int, k: int, rng: np.random.Generator) -> FactorPair:
    """B (n x k) and C (k x n) with uniformly distributed simplex rows."""
    if not 1 <= k <= n:
        raise InvalidRank(n, k)
    return FactorPair(_simplex_rows(rng, n, k), _simplex_rows(rng, k, n))


def objective_function(objective: str):
    """Float-mode objective evaluated on a raw n x n array."""
    if normalize_kind(objective) == PERMANENT:
        return lambda a: permanent_ryser(Matrix._wrap(a, FLOAT))
    return lambda a: float(max_diagonal_product(Matrix._wrap(a, FLOAT), resolve_ties=False)[0])


def _climb(config: SearchConfig, restart: int, check_feasibility: bool = False,
           record_history: bool = False) -> dict:
    """One restart: coordinate bumps on B or C, strict-improvement acceptance."""
    n, k = config.n, config.k
    rng = np.random.default_rng([config.seed, restart])
    f = objective_function(config.objective)
    pair = random_factor_pair(n, k, rng)
    B, C = pair.B, pair.C
    value = initial = f(B @ C)
    history = [value] if record_history else None
    step = config.step
    accepted = 0
    for _ in range(config.iterations):
        idx = int(rng.integers(2 * n * k))
        bump = rng.uniform(-step, step)
        step *= config.decay
        M = B if idx < n * k else C
        i, j = divmod(idx % (n * k), M.shape[1])
        row = M[i].copy()
        row[j] = max(row[j] + bump, 0.0)
        total = row.sum()
        if total <= 0:
            continue
        old = M[i].copy()
        M[i] = row / total
        A = B @ C
        candidate = f(A)
        if candidate > value:
            value = candidate
            accepted += 1
            if check_feasibility:
                Am = Matrix._wrap(A, FLOAT)
                assert is_row_stochastic(Am, TOL_STOCH), "iterate left the row-stochastic set"
                assert rank(Am) <= k, "iterate exceeded the rank bound"
        else:
            M[i] = old
        if record_history:
            history.append(value)
    out = {"restart": restart, "value": value, "initial": initial, "accepted": accepted,
           "B": B, "C": C}
    if record_history:
        out["history"] = history
    return out


def _climb_star(args):
    return _climb(*args)


def _verdict(value: float, bound: float, margin: float, match_tol: float = MATCH_TOL) -> str:
    if value > bound + margin:
        return CANDIDATE_VIOLATION
    if abs(value - bound) <= match_tol:
        return MATCHES
    return BELOW


def local_search(config: SearchConfig, workers: int = 1, check_feasibility: bool = False,
                 record_history: bool = False) -> SearchOutcome:
    """Best objective value found over ``config.restarts`` seeded hill climbs.

    Each restart owns the rng stream seeded by (seed, restart index), so the
    outcome does not depend on ``workers``.  Ties between restarts go to the
    lower restart index.
    """
    jobs = [(config, r, check_feasibility, record_history) for r in range(config.restarts)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_climb_star, jobs))
    else:
        runs = [_climb_star(job) for job in jobs]
    best = runs[0]
    for run in runs[1:]:
        if run["value"] > best["value"]:
            best = run
    bound = bound_stochastic(config.n, config.k, config.objective)
    bound_f = float(bound.stochastic_bound)
    trace = []
    for run in runs:
        entry = {"restart": run["restart"], "initial": run["initial"], "best": run["value"],
                 "accepted": run["accepted"]}
        if record_history:
            entry["history"] = run["history"]
        trace.append(entry)
    factors = FactorPair(best["B"], best["C"])
    return SearchOutcome(
        best_matrix=Matrix(factors.product, FLOAT),
        value=best["value"],
        bound=bound,
        gap=bound_f - best["value"],
        verdict=_verdict(best["value"], bound_f, config.margin),
        seed=config.seed,
        trace=trace,
        config=config,
        factors=factors,
    )


def _exact_simplex_rows(M: np.ndarray, max_denominator: int):
    rows = []
    for row in M.tolist():
        fr = [max(Fraction(x).limit_denominator(max_denominator), Fraction(0)) for x in row]
        total = sum(fr)
        if total == 0:
            raise RationalizationFailed("a factor row rationalized to zero")
        rows.append([x / total for x in fr])
    return rows


def _rationalize_factors(factors: FactorPair, max_denominator: int) -> Matrix:
    B = np.array(_exact_simplex_rows(factors.B, max_denominator), dtype=object)
    C = np.array(_exact_simplex_rows(factors.C, max_denominator), dtype=object)
    return Matrix(B.dot(C).tolist(), "exact")


def certify_candidate(A_float: Matrix, k: int, objective: str, bound: BoundReport,
                      factors: FactorPair | None = None,
                      max_denominator: int = MAX_DENOMINATOR,
                      match_tol: float = MATCH_TOL) -> SearchOutcome:
    """Re-check a float candidate in exact arithmetic.

    The matrix is rationalized entrywise; if that breaks the rank bound, the
    factors (when given) are rationalized instead, each row renormalized
    exactly, and multiplied out, which keeps rank <= k by construction.  The
    exact objective is compared with the exact nonnegative-formulation bound
    of the rationalized matrix (identical to the stochastic bound whenever
    that matrix is exactly row-stochastic).  Only a strict exact excess is
    reported as CERTIFIED_VIOLATION.
    """
    kind = normalize_kind(objective)
    A_exact = rationalize(A_float, max_denominator)
    route = "entrywise rationalization"
    if rank(A_exact) > k:
        if factors is None:
            raise RationalizationFailed(
                f"rationalized matrix has rank {rank(A_exact)} > {k} and no factors were given")
        A_exact = _rationalize_factors(factors, max_denominator)
        route = "rationalized factors"
        if rank(A_exact) > k:
            raise RationalizationFailed(f"rank still exceeds {k} after factor rationalization")
    if kind == PERMANENT:
        value = permanent_ryser(A_exact)
    else:
        value = max_diagonal_product(A_exact)[0]
    exact_bound = bound_nonnegative(A_exact, k, kind)
    bound_value = exact_bound.total
    if value > bound_value:
        verdict = CERTIFIED_VIOLATION
        explanation = f"exact value exceeds exact bound ({route})"
    elif value == bound_value or abs(value - bound_value) <= match_tol:
        verdict = MATCHES
        explanation = f"downgraded: exact value does not exceed the bound ({route})"
    else:
        verdict = BELOW
        explanation = f"downgraded: exact value is below the bound ({route})"
    return SearchOutcome(
        best_matrix=A_float,
        value=value,
        bound=exact_bound,
        gap=bound_value - value,
        verdict=verdict,
        seed=0,
        factors=factors,
        exact_matrix=A_exact,
        explanation=explanation,
    )


def search_and_certify(config: SearchConfig, workers: int = 1) -> SearchOutcome:
    """local_search, followed by exact certification of any candidate violation."""
    outcome = local_search(config, workers=workers)
    if outcome.verdict != CANDIDATE_VIOLATION:
        return outcome
    try:
        cert = certify_candidate(outcome.best_matrix, config.k, config.objective,
                                 outcome.bound, outcome.factors)
    except RationalizationFailed as exc:
        outcome.explanation = f"certification failed: {exc}"
        return outcome
    cert.seed = outcome.seed
    cert.trace = outcome.trace
    cert.config = config
    return cert


OBJECTIVES = (PERMANENT, DIAGONAL)


def cell_seed(master_seed: int, n: int, k: int, objective: str) -> int:
    """Deterministic 63-bit seed for one (n, k, objective) cell."""
    tag = OBJECTIVES.index(normalize_kind(objective))
    ss = np.random.SeedSequence([master_seed, n, k, tag])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def sweep(n_max: int, objectives=OBJECTIVES, template: SearchConfig | None = None,
          workers: int = 1) -> list[SearchOutcome]:
    """Search every cell 1 <= k <= n <= n_max for each objective."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    template = template or SearchConfig(1, 1)
    master = template.seed
    outcomes = []
    for n in range(1, n_max + 1):
        for k in range(1, n + 1):
            for objective in objectives:
                config = replace(template, n=n, k=k, objective=objective,
                                 seed=cell_seed(master, n, k, objective))
                outcomes.append(search_and_certify(config, workers=workers))
    return outcomes
