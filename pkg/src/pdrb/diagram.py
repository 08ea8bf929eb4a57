"""Persistence diagram data model, diagonal geometry and augmentation.

Diagrams only store their off-diagonal points; the diagonal is implicit and
materialized on demand by :func:`augment`.
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .validation import check_diagram

OFF_DIAGONAL = False
DIAGONAL = True


class DiagramPoint(NamedTuple):
    birth: float
    death: float

    @property
    def persistence(self):
        return self.death - self.birth


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Immutable multiset of (birth, death) points with ``birth < death``."""

    points: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        arr = check_diagram(self.points).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)

    def __len__(self):
        return self.points.shape[0]

    def __iter__(self):
        for b, d in self.points:
            yield DiagramPoint(float(b), float(d))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.points, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    def __repr__(self):
        name = f" {self.label!r}" if self.label else ""
        return f"PersistenceDiagram{name}({self.points.tolist()})"

    @property
    def persistence(self):
        return self.points[:, 1] - self.points[:, 0]


@dataclass(frozen=True)
class AugmentedPair:
    """Two equal-size point lists ``X ∪ Δ_Y`` and ``Y ∪ Δ_X``.

    ``left[:n_left]`` are the points of X in input order followed by the
    diagonal projections of Y; ``right`` mirrors this layout.
    """

    left: np.ndarray
    left_diagonal: np.ndarray
    right: np.ndarray
    right_diagonal: np.ndarray
    n_left: int = field(default=0)
    n_right: int = field(default=0)

    @property
    def size(self):
        return self.left.shape[0]


def project_to_diagonal(p):
    """Orthogonal projection onto the diagonal, ``((b+d)/2, (b+d)/2)``.

    Works on a single point or on an (n, 2) array of points.
    """
    arr = np.asarray(p, dtype=np.float64)
    mid = 0.5 * (arr[..., 0] + arr[..., 1])
    return np.stack([mid, mid], axis=-1)


def augment(X, Y, *, allow_diagonal=False):
    X = check_diagram(X, allow_diagonal=allow_diagonal)
    Y = check_diagram(Y, allow_diagonal=allow_diagonal)
    nx, ny = len(X), len(Y)
    left = np.concatenate([X, project_to_diagonal(Y)]).reshape(-1, 2)
    right = np.concatenate([Y, project_to_diagonal(X)]).reshape(-1, 2)
    left_diag = np.r_[np.zeros(nx, bool), np.ones(ny, bool)]
    right_diag = np.r_[np.zeros(ny, bool), np.ones(nx, bool)]
    return AugmentedPair(left, left_diag, right, right_diag, nx, ny)


def prune(X, epsilon=0.0):
    """Keep points whose persistence exceeds ``epsilon``, preserving order."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    label = getattr(X, "label", None)
    arr = check_diagram(X, allow_diagonal=True)
    kept = arr[(arr[:, 1] - arr[:, 0]) > epsilon]
    if isinstance(X, PersistenceDiagram):
        return PersistenceDiagram(kept, label)
    return kept


def as_diagram(X, label=None):
    """Wrap ``X`` in a :class:`PersistenceDiagram`, dropping diagonal points."""
    if isinstance(X, PersistenceDiagram) and label is None:
        return X
    return PersistenceDiagram(prune(np.asarray(getattr(X, "points", X)).reshape(-1, 2)), label)
