"""Input validation helpers shared by the estimators and the functional API."""

import numbers

import numpy as np


def check_diagram(X, *, allow_diagonal=False, name="diagram"):
    """Return ``X`` as a float64 array of shape (n, 2).

    Accepts a :class:`~pdrb.diagram.PersistenceDiagram`, an (n, 2) array-like
    or an empty sequence.  Points must be finite with ``birth < death``
    (``birth <= death`` when ``allow_diagonal`` is set).
    """
    points = getattr(X, "points", X)
    arr = np.asarray(points, dtype=np.float64)
    if arr.size == 0:
        return np.zeros((0, 2))
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{name} must have shape (n, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite coordinates")
    pers = arr[:, 1] - arr[:, 0]
    if allow_diagonal:
        if np.any(pers < 0):
            raise ValueError(f"{name} has points below the diagonal")
    elif np.any(pers <= 0):
        raise ValueError(f"{name} has points with birth >= death")
    return arr


def check_ensemble(ensemble, *, allow_diagonal=False, allow_empty=False):
    """Validate a sequence of diagrams, returning a list of arrays."""
    if isinstance(ensemble, np.ndarray) and ensemble.ndim == 2:
        raise TypeError("expected a sequence of diagrams, got a single array")
    out = [
        check_diagram(X, allow_diagonal=allow_diagonal, name=f"diagram {i}")
        for i, X in enumerate(ensemble)
    ]
    if not out and not allow_empty:
        raise ValueError("ensemble is empty")
    return out


def check_q(q, *, strict=False):
    """Check the transport exponent; ``strict`` demands q > 1."""
    if not isinstance(q, numbers.Real) or not np.isfinite(q):
        raise ValueError(f"q must be a finite real, got {q!r}")
    if strict and q <= 1:
        raise ValueError(f"q must be > 1, got {q}")
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    return float(q)


def check_weights(weights, n, *, atol=1e-12, strictly_positive=False):
    """Return barycentric weights as an array on the simplex.

    ``None`` yields uniform weights.
    """
    if weights is None:
        return np.full(n, 1.0 / n)
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.shape[0] != n:
        raise ValueError(f"expected {n} weights, got {w.shape[0]}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("weights must be finite and non-negative")
    if strictly_positive and np.any(w == 0):
        raise ValueError("weights must be strictly positive")
    if abs(w.sum() - 1.0) > atol:
        raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
    return w


def check_random_state(seed):
    """Turn ``seed`` into a :class:`numpy.random.Generator` (PCG64)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
