from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

import rankperm.search as search_mod
from rankperm.bounds import bound_stochastic
from rankperm.errors import InvalidRank, RationalizationFailed
from rankperm.matrix import (
    CompositionVector,
    Matrix,
    Permutation,
    composition_for,
    composition_matrix,
    conjugate_extremal,
    is_row_stochastic,
    rank,
    uniform,
)
from rankperm.search import (
    BELOW,
    CANDIDATE_VIOLATION,
    CERTIFIED_VIOLATION,
    MATCHES,
    FactorPair,
    SearchConfig,
    cell_seed,
    certify_candidate,
    local_search,
    objective_function,
    random_factor_pair,
    search_and_certify,
    sweep,
)


def test_random_factor_pair_shapes():
    pair = random_factor_pair(3, 3, np.random.default_rng(5))
    assert pair.B.shape == (3, 3) and pair.C.shape == (3, 3)
    assert np.allclose(pair.B.sum(axis=1), 1, atol=1e-9)
    assert np.allclose(pair.C.sum(axis=1), 1, atol=1e-9)
    again = random_factor_pair(3, 3, np.random.default_rng(5))
    assert np.array_equal(pair.B, again.B) and np.array_equal(pair.C, again.C)


def test_random_factor_pair_rank_one():
    pair = random_factor_pair(5, 1, np.random.default_rng(0))
    assert np.array_equal(pair.B, np.ones((5, 1)))
    A = pair.product
    assert np.allclose(A, A[0])
    with pytest.raises(InvalidRank):
        random_factor_pair(3, 4, np.random.default_rng(0))


def test_config_validation():
    with pytest.raises(InvalidRank):
        SearchConfig(3, 0)
    with pytest.raises(ValueError):
        SearchConfig(3, 2, restarts=0)
    with pytest.raises(ValueError):
        SearchConfig(3, 2, decay=1.5)
    assert SearchConfig(3, 2, objective="per").objective == "permanent"
    assert SearchConfig(3, 2, objective="maxdiag").objective == "diagonal"


def test_search_permanent_3_2():
    out = local_search(SearchConfig(3, 2, "per", restarts=20, iterations=2000, seed=7))
    assert out.verdict == MATCHES
    assert abs(out.value - 0.5) <= 1e-6
    assert out.bound.stochastic_bound == Fraction(1, 2)


def test_search_permanent_4_1():
    out = local_search(SearchConfig(4, 1, "per", restarts=20, iterations=2000, seed=1))
    assert out.verdict == MATCHES
    assert out.value == pytest.approx(3 / 32, abs=1e-6)


def test_search_maxdiag_2_2():
    out = local_search(SearchConfig(2, 2, "maxdiag", restarts=10, iterations=1000, seed=3))
    assert out.value == pytest.approx(1.0, abs=1e-6)
    assert out.verdict == MATCHES


def test_feasibility_is_preserved():
    cfg = SearchConfig(4, 2, "per", restarts=3, iterations=400, seed=11)
    out = local_search(cfg, check_feasibility=True)
    assert is_row_stochastic(out.best_matrix)
    assert rank(out.best_matrix) <= 2


def test_monotone_acceptance():
    out = local_search(SearchConfig(4, 3, "maxdiag", restarts=3, iterations=500, seed=2),
                       record_history=True)
    for entry in out.trace:
        h = entry["history"]
        assert all(b >= a for a, b in zip(h, h[1:]))
        assert h[-1] == entry["best"]


def test_determinism_and_parallel_agreement():
    cfg = SearchConfig(4, 2, "per", restarts=4, iterations=300, seed=99)
    a, b = local_search(cfg), local_search(cfg)
    c = local_search(cfg, workers=2)
    for other in (b, c):
        assert other.value == a.value
        assert other.trace == a.trace
        assert np.array_equal(other.best_matrix.data, a.best_matrix.data)


def test_certify_extremal_downgrades():
    J12 = composition_matrix(CompositionVector([1, 2])).to_float()
    out = certify_candidate(J12, 2, "per", bound_stochastic(3, 2, "per"))
    assert out.verdict == MATCHES and out.value == Fraction(1, 2)
    J3 = uniform(3).to_float()
    out = certify_candidate(J3, 1, "per", bound_stochastic(3, 1, "per"))
    assert out.verdict == MATCHES and out.value == Fraction(2, 9) == out.bound.total


def test_certify_below():
    A = Matrix(np.full((3, 3), 1 / 3))
    out = certify_candidate(A, 2, "per", bound_stochastic(3, 2, "per"))
    assert out.verdict == BELOW and out.exact_matrix == uniform(3)


def test_certify_rank_failure():
    I3 = Matrix(np.eye(3))
    with pytest.raises(RationalizationFailed):
        certify_candidate(I3, 2, "per", bound_stochastic(3, 2, "per"))
    # factors with inner dimension 3 cannot repair a rank-2 claim either
    bad = FactorPair(np.eye(3), np.eye(3))
    with pytest.raises(RationalizationFailed):
        certify_candidate(I3, 2, "per", bound_stochastic(3, 2, "per"), factors=bad)


def test_certify_repairs_rank_through_factors():
    rng = np.random.default_rng(4)
    pair = random_factor_pair(4, 2, rng)
    A = Matrix(pair.product + 1e-9 * rng.random((4, 4)))
    assert rank(Matrix(A.data), tol=1e-12) > 2
    out = certify_candidate(A, 2, "per", bound_stochastic(4, 2, "per"), factors=pair)
    assert rank(out.exact_matrix) <= 2
    assert out.verdict in (MATCHES, BELOW)
    assert "factors" in out.explanation


def test_certified_violation_gate(monkeypatch):
    # a deliberately wrong (halved) bound must produce a certified violation
    real = search_mod.bound_nonnegative

    def halved(A, k, kind):
        rep = real(A, k, kind)
        return replace(rep, scale=rep.scale / 2)

    monkeypatch.setattr(search_mod, "bound_nonnegative", halved)
    J12 = composition_matrix(CompositionVector([1, 2])).to_float()
    out = certify_candidate(J12, 2, "per", bound_stochastic(3, 2, "per"))
    assert out.verdict == CERTIFIED_VIOLATION
    assert out.value > out.bound.total


def test_candidate_is_certified_not_dropped(monkeypatch):
    # shrink the float bound so the search reports a candidate; the exact gate downgrades it
    real = search_mod.bound_stochastic

    def shrunk(n, k, kind):
        rep = real(n, k, kind)
        return replace(rep, stochastic_bound=rep.stochastic_bound / 2)

    monkeypatch.setattr(search_mod, "bound_stochastic", shrunk)
    cfg = SearchConfig(3, 2, "per", restarts=5, iterations=1500, seed=0)
    assert local_search(cfg).verdict == CANDIDATE_VIOLATION
    out = search_and_certify(cfg)
    assert out.verdict in (MATCHES, BELOW)
    assert out.exact_matrix is not None and out.explanation.startswith("downgraded")


def test_no_false_positive_on_extremal(rng):
    for _ in range(10):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(1, n + 1))
        v = composition_for(n, k)
        A = conjugate_extremal(v, Permutation.random(n, rng), Permutation.random(n, rng))
        for kind in ("per", "diag"):
            out = certify_candidate(A.to_float(), k, kind, bound_stochastic(n, k, kind))
            assert out.verdict == MATCHES


def test_sweep_cells_and_seeds():
    tmpl = SearchConfig(1, 1, restarts=2, iterations=50, seed=5)
    outs = sweep(4, template=tmpl)
    assert len(outs) == 20
    cells = {(o.config.n, o.config.k, o.config.objective) for o in outs}
    assert len(cells) == 20
    assert len({o.seed for o in outs}) == 20
    assert cell_seed(5, 3, 2, "per") == cell_seed(5, 3, 2, "permanent")
    assert cell_seed(5, 3, 2, "per") != cell_seed(6, 3, 2, "per")


def test_sweep_diagonal_cells_match_one():
    tmpl = SearchConfig(1, 1, restarts=10, iterations=1500, seed=1)
    for o in sweep(3, template=tmpl):
        if o.config.n == o.config.k:
            assert o.verdict == MATCHES
            assert o.value == pytest.approx(1.0, abs=1e-6)


def test_empirical_bound_support():
    """Random feasible points are checked against the bound; an excess is a
    reportable event handed to certification, not a test failure."""
    rng = np.random.default_rng(123)
    reported = []
    for n in range(1, 7):
        for k in range(1, n + 1):
            for kind in ("per", "maxdiag"):
                f = objective_function(kind)
                bound = float(bound_stochastic(n, k, kind).stochastic_bound)
                for _ in range(1000):
                    pair = random_factor_pair(n, k, rng)
                    if f(pair.product) > bound + 1e-9:
                        out = certify_candidate(Matrix(pair.product), k, kind,
                                                bound_stochastic(n, k, kind), factors=pair)
                        reported.append((n, k, kind, out.verdict))
    for event in reported:
        print("reportable event:", event)
