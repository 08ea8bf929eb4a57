"""W_q distances between persistence diagrams."""

import numpy as np

from ._parallel import ordered_map
from .assignment import build_cost_matrix, solve_assignment
from .diagram import augment
from .validation import check_diagram, check_ensemble, check_q


def optimal_plan(X, Y, q, *, diagonal="fixed", allow_diagonal=False):
    """Augment ``X`` and ``Y`` and solve their assignment.

    Returns ``(pair, assignment)`` where ``assignment.total_cost`` is
    ``W_q(X, Y) ** q``.
    """
    pair = augment(X, Y, allow_diagonal=allow_diagonal)
    C = build_cost_matrix(pair, q, diagonal=diagonal)
    return pair, solve_assignment(C)


def wasserstein_distance(X, Y, q=2.0, *, diagonal="fixed"):
    q = check_q(q)
    _, plan = optimal_plan(X, Y, q, diagonal=diagonal, allow_diagonal=True)
    return plan.total_cost ** (1.0 / q)


def distance_matrix(ensemble, q=2.0, *, diagonal="fixed"):
    """Full symmetric (N, N) matrix of pairwise W_q distances.

    Entries are computed for ``i < j`` only and mirrored, so symmetry is exact.
    """
    q = check_q(q)
    diagrams = check_ensemble(ensemble, allow_diagonal=True)
    n = len(diagrams)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    values = ordered_map(
        lambda ij: wasserstein_distance(diagrams[ij[0]], diagrams[ij[1]], q, diagonal=diagonal),
        pairs,
    )
    D = np.zeros((n, n))
    for (i, j), v in zip(pairs, values):
        D[i, j] = D[j, i] = v
    return D


def cross_distances(A, B, q=2.0, *, diagonal="fixed"):
    """(len(A), len(B)) matrix of W_q distances between two diagram lists."""
    q = check_q(q)
    A = [check_diagram(X, allow_diagonal=True) for X in A]
    B = [check_diagram(Y, allow_diagonal=True) for Y in B]
    pairs = [(i, j) for i in range(len(A)) for j in range(len(B))]
    values = ordered_map(
        lambda ij: wasserstein_distance(A[ij[0]], B[ij[1]], q, diagonal=diagonal), pairs
    )
    return np.asarray(values, dtype=np.float64).reshape(len(A), len(B))
