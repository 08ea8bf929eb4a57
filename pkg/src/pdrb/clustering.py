"""k-means on the W_q metric space of persistence diagrams."""

from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.metrics import adjusted_rand_score

from .barycenter import BarycenterConfig, compute_barycenter
from .diagram import PersistenceDiagram
from .metric import cross_distances, distance_matrix
from .validation import check_ensemble, check_q, check_random_state


@dataclass
class ClusteringResult:
    labels: np.ndarray
    centroids: list
    iterations: int
    total_energy: float
    energy_trace: list = field(default_factory=list)
    init: list = field(default_factory=list)


def kmeans_pp_init(ensemble, k, q=2.0, seed=None, *, distances=None):
    """k-means++ seeding: indices of ``k`` distinct diagrams.

    The first index is uniform; each next one is drawn with probability
    proportional to the squared W_q distance to the nearest chosen center.
    If all those distances vanish, the draw is uniform over unchosen indices.
    """
    diagrams = check_ensemble(ensemble, allow_diagonal=True)
    n = len(diagrams)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    rng = check_random_state(seed)
    D = distance_matrix(diagrams, q) if distances is None else np.asarray(distances)
    chosen = [int(rng.integers(n))]
    nearest = D[chosen[0]].copy()
    while len(chosen) < k:
        p = nearest**2
        p[chosen] = 0.0
        total = p.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=p / total))
        else:
            rest = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(rest))
        chosen.append(nxt)
        nearest = np.minimum(nearest, D[nxt])
    return chosen


def _label(diagrams, centroids, q):
    D = cross_distances(diagrams, centroids, q)
    # argmin picks the lowest cluster index on ties
    return np.argmin(D, axis=1), D


def _repair_empty(labels, D, centroids, diagrams, k):
    # An empty cluster takes over the diagram farthest from its own centroid.
    labels = labels.copy()
    for j in range(k):
        if np.any(labels == j):
            continue
        sizes = np.bincount(labels, minlength=k)
        cost = D[np.arange(len(labels)), labels].copy()
        cost[sizes[labels] <= 1] = -np.inf
        n = int(np.argmax(cost))
        centroids[j] = diagrams[n]
        labels[n] = j
        D[n, j] = 0.0
    return labels


def _energy(D, labels, q):
    return float(np.sum(D[np.arange(len(labels)), labels] ** q))


def kmeans(ensemble, k, q=2.0, config=None, seed=None, *, max_iter=50, n_init=1):
    """Lloyd iterations with barycenter centroids.

    Centroids are recomputed with :func:`compute_barycenter` (uniform weights),
    warm-started from the previous centroid so the energy cannot increase.
    With ``n_init > 1``, independent seedings are run and the lowest final
    energy wins.
    """
    q = check_q(q)
    diagrams = check_ensemble(ensemble, allow_diagonal=True)
    n = len(diagrams)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    config = replace(config or BarycenterConfig(q=q), q=q, weights=None)
    rng = check_random_state(seed)
    D_all = distance_matrix(diagrams, q)
    best = None
    for _ in range(n_init):
        result = _lloyd(diagrams, k, q, config, rng, D_all, max_iter)
        if best is None or result.total_energy < best.total_energy:
            best = result
    return best


def _lloyd(diagrams, k, q, config, rng, D_all, max_iter):
    init = kmeans_pp_init(diagrams, k, q, rng, distances=D_all)
    centroids = [diagrams[i].copy() for i in init]
    D = D_all[:, init].copy()
    labels = _repair_empty(np.argmin(D, axis=1), D, centroids, diagrams, k)
    trace = [_energy(D, labels, q)]
    it = 0
    for it in range(1, max_iter + 1):
        for j in range(k):
            members = [diagrams[i] for i in np.flatnonzero(labels == j)]
            centroids[j] = compute_barycenter(members, config, init_diagram=centroids[j]).barycenter
        new_labels, D = _label(diagrams, centroids, q)
        new_labels = _repair_empty(new_labels, D, centroids, diagrams, k)
        trace.append(_energy(D, new_labels, q))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return ClusteringResult(labels, centroids, it, trace[-1], trace, init)


def adjusted_rand_index(labels_a, labels_b):
    a, b = np.asarray(labels_a), np.asarray(labels_b)
    if a.shape != b.shape:
        raise ValueError(f"label arrays differ in length: {a.shape} vs {b.shape}")
    return float(adjusted_rand_score(a, b))


class PersistenceDiagramKMeans(ClusterMixin, BaseEstimator):
    """k-means clustering of persistence diagrams under W_q.

    Parameters
    ----------
    n_clusters : int
    q : float, default=2.0
        Transport exponent of both the distance and the barycenters.
    max_iter : int, default=50
        Maximum number of Lloyd iterations.
    n_init : int, default=1
        Number of k-means++ seedings; the lowest-energy run is kept.
    barycenter_iter : int, default=10
        Outer iterations of each centroid update.
    random_state : int, Generator or None

    Attributes
    ----------
    labels_, cluster_centers_, inertia_, n_iter_, energy_trace_
    """

    def __init__(self, n_clusters=3, q=2.0, max_iter=50, n_init=1, barycenter_iter=10,
                 random_state=None):
        self.n_clusters = n_clusters
        self.q = q
        self.max_iter = max_iter
        self.n_init = n_init
        self.barycenter_iter = barycenter_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        config = BarycenterConfig(q=check_q(self.q, strict=True), max_iter=self.barycenter_iter)
        result = kmeans(X, self.n_clusters, self.q, config, self.random_state,
                        max_iter=self.max_iter, n_init=self.n_init)
        self.labels_ = result.labels
        self.cluster_centers_ = [PersistenceDiagram(c) for c in result.centroids]
        self.inertia_ = result.total_energy
        self.n_iter_ = result.iterations
        self.energy_trace_ = result.energy_trace
        return self

    def predict(self, X):
        labels, _ = _label(check_ensemble(X, allow_diagonal=True),
                           [np.asarray(c) for c in self.cluster_centers_], self.q)
        return labels

    def transform(self, X):
        """W_q distances from each diagram to each centroid."""
        return cross_distances(check_ensemble(X, allow_diagonal=True),
                               [np.asarray(c) for c in self.cluster_centers_], self.q)
