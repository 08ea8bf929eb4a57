import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_diagram
from pdrb.assignment import (
    MAX_BRUTE_FORCE,
    brute_force_assignment,
    build_cost_matrix,
    check_cost_matrix,
    solve_assignment,
)
from pdrb.diagram import augment
from pdrb.metric import cross_distances, distance_matrix, optimal_plan, wasserstein_distance


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_solver_matches_brute_force(K, seed):
    C = np.random.default_rng(seed).uniform(0, 10, (K, K))
    assert solve_assignment(C).total_cost == brute_force_assignment(C).total_cost


def test_solver_returns_permutation():
    C = np.random.default_rng(3).uniform(size=(5, 5))
    perm = solve_assignment(C).permutation
    assert sorted(perm) == list(range(5))


def test_brute_force_tie_break_is_first_lexicographic():
    C = np.ones((3, 3))
    np.testing.assert_array_equal(brute_force_assignment(C).permutation, [0, 1, 2])


def test_brute_force_size_cap():
    with pytest.raises(ValueError):
        brute_force_assignment(np.zeros((MAX_BRUTE_FORCE + 1,) * 2))


def test_empty_assignment():
    a = solve_assignment(np.zeros((0, 0)))
    assert a.total_cost == 0.0 and len(a.permutation) == 0


@pytest.mark.parametrize("C", [np.zeros((2, 3)), np.array([[np.nan]]), np.array([[-1.0]])])
def test_cost_matrix_validation(C):
    with pytest.raises(ValueError):
        check_cost_matrix(C)


def test_cost_matrix_diagonal_block_is_zero():
    pair = augment([[0, 2]], [[1, 4], [0, 1]])
    C = build_cost_matrix(pair, 2.0)
    assert np.all(C[np.ix_(pair.left_diagonal, pair.right_diagonal)] == 0)
    assert C[0, 0] == pytest.approx(1 + 4)


def test_two_point_example():
    assert wasserstein_distance([[0, 2]], [[0, 4]], 2.0) == pytest.approx(2.0)


def test_distance_to_empty_is_diagonal_cost():
    # (0, 2) lies sqrt(2) from the diagonal.
    assert wasserstein_distance([[0, 2]], [], 2.0) == pytest.approx(np.sqrt(2))
    assert wasserstein_distance([], [], 1.5) == 0.0


def test_plan_cost_equals_distance_power():
    rng = np.random.default_rng(0)
    X, Y = random_diagram(rng, 4, min_points=1), random_diagram(rng, 4, min_points=1)
    _, plan = optimal_plan(X, Y, 1.5)
    assert plan.total_cost == pytest.approx(wasserstein_distance(X, Y, 1.5) ** 1.5)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_metric_axioms(seed, q):
    rng = np.random.default_rng(seed)
    X, Y, Z = (random_diagram(rng, 4) for _ in range(3))
    dxy = wasserstein_distance(X, Y, q)
    assert dxy == wasserstein_distance(Y, X, q)
    assert wasserstein_distance(X, X, q) == 0.0
    assert dxy <= wasserstein_distance(X, Z, q) + wasserstein_distance(Z, Y, q) + 1e-9


def test_nearest_diagonal_never_exceeds_fixed():
    rng = np.random.default_rng(1)
    for _ in range(20):
        X, Y = random_diagram(rng, 4), random_diagram(rng, 4)
        assert wasserstein_distance(X, Y, 2, diagonal="nearest") <= (
            wasserstein_distance(X, Y, 2) + 1e-12
        )


def test_distance_matrix_exactly_symmetric(monkeypatch):
    rng = np.random.default_rng(2)
    ens = [random_diagram(rng, 4) for _ in range(5)]
    D = distance_matrix(ens, 1.5)
    assert np.array_equal(D, D.T)
    assert np.all(np.diag(D) == 0)
    monkeypatch.setenv("PDRB_THREADS", "1")
    assert np.array_equal(distance_matrix(ens, 1.5), D)
    np.testing.assert_array_equal(cross_distances(ens, ens, 1.5)[0, 1:], D[0, 1:])


def test_distance_rejects_bad_q():
    with pytest.raises(ValueError):
        wasserstein_distance([[0, 1]], [[0, 2]], 0.5)
