"""Exact square assignment for augmented diagram pairs."""

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .diagram import project_to_diagonal
from .validation import check_q

MAX_BRUTE_FORCE = 8


@dataclass(frozen=True)
class Assignment:
    permutation: np.ndarray
    total_cost: float


def _total(C, perm):
    # fsum: correctly rounded, so equal matchings give bit-equal totals in any order
    return math.fsum(C[np.arange(len(perm)), perm])


def build_cost_matrix(pair, q, *, diagonal="fixed"):
    """Transport cost ``‖x - y‖^q`` between the two augmented point lists.

    Diagonal-to-diagonal entries are zero.  With ``diagonal="fixed"`` an
    off-diagonal point pays the distance to the specific augmented diagonal
    point it is matched to; ``diagonal="nearest"`` charges the orthogonal
    distance to the diagonal instead, whichever diagonal slot is used.
    """
    q = check_q(q)
    if diagonal not in ("fixed", "nearest"):
        raise ValueError(f"unknown diagonal mode {diagonal!r}")
    diff = pair.left[:, None, :] - pair.right[None, :, :]
    C = np.hypot(diff[..., 0], diff[..., 1]) ** q
    if diagonal == "nearest":
        left_gap = np.linalg.norm(pair.left - project_to_diagonal(pair.left), axis=1) ** q
        right_gap = np.linalg.norm(pair.right - project_to_diagonal(pair.right), axis=1) ** q
        C[:, pair.right_diagonal] = left_gap[:, None]
        C[pair.left_diagonal, :] = right_gap[None, :]
    C[np.ix_(pair.left_diagonal, pair.right_diagonal)] = 0.0
    return C


def check_cost_matrix(C):
    C = np.asarray(C, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {C.shape}")
    if not np.all(np.isfinite(C)) or np.any(C < 0):
        raise ValueError("cost matrix entries must be finite and non-negative")
    return C


def solve_assignment(C):
    """Minimum-cost permutation (Jonker-Volgenant via scipy)."""
    C = check_cost_matrix(C)
    if C.shape[0] == 0:
        return Assignment(np.zeros(0, dtype=np.intp), 0.0)
    rows, cols = linear_sum_assignment(C)
    perm = np.empty(C.shape[0], dtype=np.intp)
    perm[rows] = cols
    return Assignment(perm, _total(C, perm))


def brute_force_assignment(C):
    """Exhaustive search over all permutations; lexicographic tie-break."""
    C = check_cost_matrix(C)
    K = C.shape[0]
    if K > MAX_BRUTE_FORCE:
        raise ValueError(f"brute force limited to K <= {MAX_BRUTE_FORCE}, got {K}")
    best, best_cost = None, np.inf
    for perm in permutations(range(K)):
        perm = np.asarray(perm, dtype=np.intp)
        cost = _total(C, perm)
        if cost < best_cost:
            best, best_cost = perm, cost
    return Assignment(best, best_cost)
