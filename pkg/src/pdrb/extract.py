"""Maximum-saddle persistence pairs of scalar fields on regular grids."""

from dataclasses import dataclass
from itertools import product

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .diagram import PersistenceDiagram, prune

CONNECTIVITIES = ("full", "axis")


@dataclass(frozen=True, eq=False)
class ScalarGrid:
    """Scalar field sampled on a regular 1D/2D/3D grid, row-major."""

    dims: tuple
    values: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        values = np.asarray(self.values, dtype=np.float64).ravel().copy()
        if not 1 <= len(dims) <= 3 or any(d <= 0 for d in dims):
            raise ValueError(f"dims must be 1-3 positive integers, got {dims}")
        if int(np.prod(dims)) != values.size:
            raise ValueError(f"dims {dims} do not match {values.size} values")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=np.float64)
        return cls(arr.shape, arr.ravel())

    def to_array(self):
        return self.values.reshape(self.dims)


def as_grid(g):
    return g if isinstance(g, ScalarGrid) else ScalarGrid.from_array(g)


def neighbor_offsets(ndim, connectivity="full"):
    if connectivity not in CONNECTIVITIES:
        raise ValueError(f"connectivity must be one of {CONNECTIVITIES}, got {connectivity!r}")
    offsets = []
    for off in product((-1, 0, 1), repeat=ndim):
        n_moved = sum(o != 0 for o in off)
        if n_moved == 0:
            continue
        if connectivity == "axis" and n_moved > 1:
            continue
        offsets.append(off)
    return np.array(offsets, dtype=np.intp)


def sweep_order(values):
    """Vertex indices by decreasing value, lower linear index first on ties."""
    values = np.asarray(values).ravel()
    return np.lexsort((np.arange(values.size), -values))


def _neighbors(dims, offsets):
    coords = np.array(np.unravel_index(np.arange(int(np.prod(dims))), dims)).T
    out = []
    for c in coords:
        nb = c + offsets
        ok = np.all((nb >= 0) & (nb < np.asarray(dims)), axis=1)
        out.append(np.ravel_multi_index(tuple(nb[ok].T), dims))
    return out


def extract_max_pairs(grid, connectivity="full"):
    """Elder-rule pairing of maxima in the superlevel-set filtration.

    Returns an (n, 2) array of (merge value, maximum value) points, in the
    order the pairs die, followed by the global maximum paired with the
    global minimum.  Zero-persistence pairs are kept (hence a plain array
    rather than a :class:`PersistenceDiagram`); use :func:`prune` to drop them.
    """
    grid = as_grid(grid)
    values = grid.values
    offsets = neighbor_offsets(len(grid.dims), connectivity)
    neighbors = _neighbors(grid.dims, offsets)
    order = sweep_order(values)
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)

    parent = np.full(values.size, -1, dtype=np.intp)
    # Highest vertex of each component, indexed by root.
    peak = np.full(values.size, -1, dtype=np.intp)

    def find(v):
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    pairs = []
    for v in order:
        roots = {find(u) for u in neighbors[v] if parent[u] >= 0}
        if not roots:
            parent[v] = v
            peak[v] = v
            continue
        roots = sorted(roots, key=lambda r: rank[peak[r]])
        elder = roots[0]
        for r in roots[1:]:
            pairs.append((values[v], values[peak[r]]))
            parent[r] = elder
        parent[v] = elder
    pairs.append((values.min(), values[order[0]]))
    return np.array(pairs, dtype=np.float64).reshape(-1, 2)


def threshold_top_k(X, k):
    """Keep the ``k`` most persistent points (smaller birth wins ties), in input order."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    arr = np.asarray(getattr(X, "points", X), dtype=np.float64).reshape(-1, 2)
    keep = np.lexsort((arr[:, 0], -(arr[:, 1] - arr[:, 0])))[:k]
    kept = arr[np.sort(keep)]
    if isinstance(X, PersistenceDiagram):
        return PersistenceDiagram(kept, X.label)
    return kept


class MaxPairExtractor(TransformerMixin, BaseEstimator):
    """Turn scalar grids into maximum-saddle persistence diagrams.

    Parameters
    ----------
    connectivity : {"full", "axis"}
        Grid neighborhood; "full" is 8/26-connected, "axis" 4/6-connected.
    top_k : int or None
        If set, keep only the ``top_k`` most persistent pairs.
    epsilon : float
        Pairs with persistence ``<= epsilon`` are dropped.
    """

    def __init__(self, connectivity="full", top_k=None, epsilon=0.0):
        self.connectivity = connectivity
        self.top_k = top_k
        self.epsilon = epsilon

    def fit(self, X=None, y=None):
        if self.connectivity not in CONNECTIVITIES:
            raise ValueError(f"connectivity must be one of {CONNECTIVITIES}")
        return self

    def transform(self, X):
        out = []
        for g in X:
            dgm = extract_max_pairs(g, self.connectivity)
            dgm = prune(dgm, self.epsilon)
            if self.top_k is not None:
                dgm = threshold_top_k(dgm, self.top_k)
            out.append(PersistenceDiagram(dgm))
        return out
