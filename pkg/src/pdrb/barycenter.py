"""Fixed-point W_q barycenters of persistence diagrams.

Each outer iteration matches the current barycenter to every input diagram,
then moves each barycenter point to the ground barycenter of the points it
was matched to.  Barycenter points matched to the diagonal in every input
are snapped onto it and dropped, so the point count may shrink.
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from ._parallel import ordered_map
from .diagram import PersistenceDiagram, project_to_diagonal, prune
from .ground import DEFAULT_MAX_ITERS, DEFAULT_TOL, GroundProblem, ground_barycenter, v_q
from .metric import optimal_plan
from .validation import check_diagram, check_ensemble, check_q, check_weights

UPDATE_RULES = ("ground", "mean")
DIAGONAL_TARGETS = ("projected", "fixed")

Q1_WARNING = (
    "q = 1 ground barycenters need not be unique (e.g. collinear matched "
    "points, in particular diagonal ones); the fixed-point iteration may be "
    "numerically unstable"
)


@dataclass(frozen=True)
class BarycenterConfig:
    """Parameters of :func:`compute_barycenter`.

    ``init`` is the index of the input diagram used as the starting
    barycenter; ``max_iter`` is the number of outer iterations T and ``tol``
    the largest point displacement at which iterations stop early.

    ``diagonal_target`` decides what a point matched to the diagonal is
    pulled towards during the update: ``"fixed"`` keeps the matched diagonal
    point where the assignment put it, ``"projected"`` lets it follow the
    point (the term becomes the distance to the diagonal line).
    """

    q: float = 2.0
    weights: Optional[tuple] = None
    max_iter: int = 10
    tol: float = 1e-7
    ground_tol: float = DEFAULT_TOL
    ground_max_iter: int = DEFAULT_MAX_ITERS
    epsilon: float = 0.0
    init: int = 0
    update: str = "ground"
    diagonal: str = "fixed"
    diagonal_target: str = "projected"
    allow_q1: bool = False

    def __post_init__(self):
        check_q(self.q, strict=not self.allow_q1)
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.update not in UPDATE_RULES:
            raise ValueError(f"update must be one of {UPDATE_RULES}, got {self.update!r}")
        if self.diagonal_target not in DIAGONAL_TARGETS:
            raise ValueError(
                f"diagonal_target must be one of {DIAGONAL_TARGETS}, got {self.diagonal_target!r}"
            )


@dataclass
class Matching:
    """Per-point view of the assignments between a barycenter and m diagrams.

    ``targets[k, i]`` is the point of diagram ``i`` matched to barycenter
    point ``k``; ``index[k, i]`` is its row in diagram ``i``, or -1 when the
    match is a diagonal point.
    """

    targets: np.ndarray
    index: np.ndarray
    costs: np.ndarray
    plans: list = field(default_factory=list)


@dataclass
class BarycenterResult:
    barycenter: np.ndarray
    energy_trace: list
    n_iter: int
    converged: bool
    matching: Matching
    # Matching that produced the final points (from the previous iterate).
    update_matching: Optional[Matching] = None


def match(B, ensemble, q, *, diagonal="fixed", active=None):
    """Optimal assignments from barycenter ``B`` to each diagram.

    ``active`` restricts the solves to a subset of diagrams (others get a
    zero cost and diagonal placeholders).
    """
    K, m = len(B), len(ensemble)
    active = range(m) if active is None else active
    targets = np.zeros((K, m, 2))
    index = np.full((K, m), -1, dtype=np.intp)
    costs = np.zeros(m)
    plans = [None] * m

    def solve(i):
        return optimal_plan(B, ensemble[i], q, diagonal=diagonal, allow_diagonal=True)

    for i, (pair, plan) in zip(active, ordered_map(solve, active)):
        n_i = pair.n_right
        cols = plan.permutation[:K]
        off = cols < n_i
        index[off, i] = cols[off]
        targets[:, i] = pair.right[cols]
        if diagonal == "nearest":
            targets[~off, i] = project_to_diagonal(B[~off])
        costs[i] = plan.total_cost
        plans[i] = plan
    return Matching(targets, index, costs, plans)


def frechet_energy(B, ensemble, weights=None, q=2.0, *, diagonal="fixed"):
    """``sum_i w_i W_q(B, X_i)^q`` with exact assignments."""
    q = check_q(q)
    B = check_diagram(B, allow_diagonal=True)
    diagrams = check_ensemble(ensemble, allow_diagonal=True)
    w = check_weights(weights, len(diagrams))
    costs = match(B, diagrams, q, diagonal=diagonal).costs
    return float(w @ costs)


def ground_problem(y, w, index, q, diagonal_target="projected"):
    """Ground problem of one barycenter point from its matched points."""
    if diagonal_target == "fixed":
        return GroundProblem(y, w, q)
    off = index >= 0
    return GroundProblem(y[off], w[off], q, diagonal_weight=w[~off].sum())


def update_points(B, matching, weights, q, *, rule="ground", diagonal_target="projected",
                  tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITERS):
    """Move each barycenter point given fixed matchings.

    Returns the new points and a mask of points matched to the diagonal in
    every positively weighted diagram; those are snapped onto the diagonal.
    """
    pos = np.flatnonzero(weights > 0)
    w = weights[pos] / weights[pos].sum()
    new = np.empty_like(B)
    on_diag = np.all(matching.index[:, pos] < 0, axis=1)
    for k in range(len(B)):
        y = matching.targets[k, pos]
        if on_diag[k]:
            new[k] = B[k]
        elif rule == "mean":
            new[k] = w @ y
        else:
            problem = ground_problem(y, w, matching.index[k, pos], q, diagonal_target)
            x = ground_barycenter(problem, tol=tol, max_iters=max_iter).point
            # Never accept a point worse than the one we already have.
            if v_q(problem, x) > v_q(problem, B[k]):
                x = B[k]
            new[k] = x
    new[on_diag] = project_to_diagonal(new[on_diag])
    return new, on_diag


def compute_barycenter(ensemble, config=None, *, init_diagram=None):
    """Barycenter of ``ensemble`` minimizing the weighted sum of W_q^q.

    ``init_diagram`` overrides ``config.init`` with an arbitrary starting
    diagram.  The returned energy trace starts with the energy of the
    initial diagram and gains one entry per outer iteration.
    """
    config = config or BarycenterConfig()
    diagrams = check_ensemble(ensemble, allow_diagonal=True)
    m = len(diagrams)
    weights = check_weights(config.weights, m)
    q = check_q(config.q, strict=not config.allow_q1)
    if q == 1:
        warnings.warn(Q1_WARNING, RuntimeWarning, stacklevel=2)
    if init_diagram is None:
        if not 0 <= config.init < m:
            raise ValueError(f"init index {config.init} out of range for {m} diagrams")
        init_diagram = diagrams[config.init]
    B = prune(check_diagram(init_diagram, allow_diagonal=True), 0.0).copy()

    active = [i for i in range(m) if weights[i] > 0]
    matching = match(B, diagrams, q, diagonal=config.diagonal, active=active)
    trace = [float(weights @ matching.costs)]
    previous = None
    converged = False
    n_iter = 0
    for n_iter in range(1, config.max_iter + 1):
        new, drop = update_points(
            B, matching, weights, q, rule=config.update,
            diagonal_target=config.diagonal_target, tol=config.ground_tol, max_iter=config.ground_max_iter,
        )
        shift = np.hypot(*(new - B).T).max() if len(B) else 0.0
        previous = Matching(matching.targets[~drop], matching.index[~drop], matching.costs)
        B = new[~drop]
        matching = match(B, diagrams, q, diagonal=config.diagonal, active=active)
        trace.append(float(weights @ matching.costs))
        if shift <= config.tol:
            converged = True
            break
    return BarycenterResult(
        prune(B, config.epsilon), trace, n_iter, converged, matching, previous,
    )


class WassersteinBarycenter(BaseEstimator):
    """Robust W_q barycenter of a set of persistence diagrams.

    Parameters
    ----------
    q : float, default=2.0
        Transport exponent, > 1.  Values in (1, 2) damp the pull of outlier
        diagrams; ``q=1`` requires ``allow_q1=True``.
    weights : array-like or None
        Barycentric weights; uniform when None.
    max_iter : int, default=10
        Number of assignment/update rounds.
    tol : float, default=1e-7
        Stop when no barycenter point moves further than this.
    epsilon : float, default=0.0
        Output points with persistence ``<= epsilon`` are removed.
    init : int, default=0
        Index of the input diagram the iteration starts from.
    update : {"ground", "mean"}
        "mean" is the classical arithmetic-mean update, exact only for q=2.

    Attributes
    ----------
    barycenter_ : PersistenceDiagram
    energy_trace_ : list of float
    n_iter_ : int
    converged_ : bool
    """

    def __init__(self, q=2.0, weights=None, max_iter=10, tol=1e-7, epsilon=0.0,
                 init=0, update="ground", diagonal="fixed", diagonal_target="projected",
                 ground_tol=DEFAULT_TOL,
                 ground_max_iter=DEFAULT_MAX_ITERS, allow_q1=False):
        self.q = q
        self.weights = weights
        self.max_iter = max_iter
        self.tol = tol
        self.epsilon = epsilon
        self.init = init
        self.update = update
        self.diagonal = diagonal
        self.diagonal_target = diagonal_target
        self.ground_tol = ground_tol
        self.ground_max_iter = ground_max_iter
        self.allow_q1 = allow_q1

    def _config(self):
        weights = None if self.weights is None else tuple(np.asarray(self.weights, float))
        return BarycenterConfig(
            q=self.q, weights=weights, max_iter=self.max_iter, tol=self.tol,
            ground_tol=self.ground_tol, ground_max_iter=self.ground_max_iter,
            epsilon=self.epsilon, init=self.init, update=self.update,
            diagonal=self.diagonal, diagonal_target=self.diagonal_target, allow_q1=self.allow_q1,
        )

    def fit(self, X, y=None):
        result = compute_barycenter(X, self._config())
        self.barycenter_ = PersistenceDiagram(result.barycenter)
        self.energy_trace_ = result.energy_trace
        self.n_iter_ = result.n_iter
        self.converged_ = result.converged
        return self

    def score(self, X, y=None):
        """Negative Fréchet energy of the fitted barycenter on ``X``."""
        return -frechet_energy(self.barycenter_, X, self.weights, self.q, diagonal=self.diagonal)
