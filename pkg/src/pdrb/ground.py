"""Ground barycenter: the point minimizing a weighted sum of q-th power distances.

For a fixed assignment, every barycenter point solves

    argmin_x  sum_i w_i ||x - y_i||^q

over its matched points ``y_i``.  For q = 2 this is the weighted mean; for
other q it is computed iteratively.

A problem may also carry a ``diagonal_weight``: the share of the weight
pulling towards the diagonal itself, i.e. the extra term
``w_diag * dist(x, diagonal)^q``.  Its gradient at ``x`` equals that of a
fixed target placed at the projection of ``x``, which is how the solvers
handle it.
"""

from dataclasses import dataclass

import numpy as np

from .diagram import project_to_diagonal
from .validation import check_q, check_weights

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITERS = 10_000
_ARMIJO = 1e-4
_MAX_HALVINGS = 60
_NEWTON_STEPS = 8
# Unit normal of the diagonal: dist(x, diagonal) = |NORMAL @ x|.
NORMAL = np.array([-1.0, 1.0]) / np.sqrt(2.0)


@dataclass(frozen=True)
class GroundProblem:
    """Targets, positive weights and exponent; weights plus
    ``diagonal_weight`` sum to one."""

    targets: np.ndarray
    weights: np.ndarray
    q: float
    diagonal_weight: float = 0.0

    def __post_init__(self):
        targets = np.asarray(self.targets, dtype=np.float64).reshape(-1, 2)
        if targets.shape[0] < 1:
            raise ValueError("ground problem needs at least one target")
        if not np.all(np.isfinite(targets)):
            raise ValueError("targets must be finite")
        wd = float(self.diagonal_weight)
        if not 0 <= wd < 1:
            raise ValueError(f"diagonal_weight must be in [0, 1), got {wd}")
        weights = np.asarray(self.weights, dtype=np.float64).ravel()
        if wd:
            weights = weights / (1.0 - wd)
        weights = check_weights(weights, targets.shape[0], strictly_positive=True)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "weights", weights * (1.0 - wd))
        object.__setattr__(self, "q", check_q(self.q))
        object.__setattr__(self, "diagonal_weight", wd)

    @classmethod
    def uniform(cls, targets, q):
        targets = np.asarray(targets, dtype=np.float64).reshape(-1, 2)
        return cls(targets, np.full(len(targets), 1.0 / len(targets)), q)

    @property
    def weighted_mean(self):
        """Exact minimizer for q = 2."""
        c = self.weights @ self.targets
        wd = self.diagonal_weight
        if wd == 0:
            return c
        # x = c + wd * proj(x); solve for the diagonal coordinate of proj(x).
        mid = 0.5 * (c[0] + c[1]) / (1.0 - wd)
        return c + wd * mid

    def expanded(self, x):
        """Targets and weights with the diagonal term pinned at ``proj(x)``."""
        if self.diagonal_weight == 0:
            return self.targets, self.weights
        mid = 0.5 * (x[0] + x[1])
        return (np.vstack([self.targets, [mid, mid]]),
                np.r_[self.weights, self.diagonal_weight])


@dataclass(frozen=True)
class GroundSolution:
    point: np.ndarray
    value: float
    unique: bool
    iterations: int
    converged: bool = True


def v_q(problem, x):
    """Objective ``sum_i w_i ||x - y_i||^q`` at ``x``."""
    x = np.asarray(x, dtype=np.float64)
    y, w = problem.expanded(x)
    diff = x - y
    r = np.hypot(diff[:, 0], diff[:, 1])
    return float(w @ r**problem.q)


def gradient(problem, x):
    """Gradient of :func:`v_q`; coincident targets contribute zero."""
    x = np.asarray(x, dtype=np.float64)
    y, w = problem.expanded(x)
    diff = x - y
    r = np.hypot(diff[:, 0], diff[:, 1])
    coef = np.zeros_like(r)
    nz = r > 0
    coef[nz] = w[nz] * problem.q * r[nz] ** (problem.q - 2)
    return coef @ diff


def hessian(problem, x):
    """Hessian of :func:`v_q` at ``x``, or None where it is unbounded
    (``x`` on a target, or on the diagonal with a diagonal term, for q < 2)."""
    x = np.asarray(x, dtype=np.float64)
    q = problem.q
    H = np.zeros((2, 2))
    for w, y in zip(problem.weights, problem.targets):
        u = x - y
        r = np.hypot(*u)
        if r == 0:
            if q < 2:
                return None
            continue
        H += w * q * r ** (q - 2) * (np.eye(2) + (q - 2) * np.outer(u, u) / r**2)
    if problem.diagonal_weight:
        s = NORMAL @ x
        if s == 0 and q < 2:
            return None
        H += problem.diagonal_weight * q * (q - 1) * abs(s) ** (q - 2) * np.outer(NORMAL, NORMAL)
    return H


def check_uniqueness(problem):
    """Whether the minimizer is guaranteed unique by strict convexity.

    Always true for q > 1.  For q = 1 this requires three targets not on a
    common line; it is a sufficient condition only.
    """
    if problem.q > 1:
        return True
    y = problem.targets
    if len(y) < 3:
        return False
    centered = y - y.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    scale = max(s[0], np.finfo(float).tiny)
    return bool(s[1] > 1e-12 * scale)


def ground_barycenter(problem, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
    """Minimize :func:`v_q`, starting from the weighted mean."""
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    unique = check_uniqueness(problem)
    y = problem.targets
    if problem.diagonal_weight == 0 and np.all(y == y[0]):
        return GroundSolution(y[0].copy(), 0.0, True, 0)
    x0 = problem.weighted_mean
    if problem.q == 2:
        return GroundSolution(x0, v_q(problem, x0), unique, 0)
    if problem.q == 1:
        x, it, ok = _weiszfeld(problem, x0, tol, max_iters)
    else:
        x, it, ok = _descent(problem, x0, tol, max_iters)
        x = _newton_polish(problem, x)
    value = v_q(problem, x)
    f0 = v_q(problem, x0)
    if value > f0:
        x, value = x0, f0
    return GroundSolution(x, value, unique, it, ok)


def _descent(problem, x, tol, max_iters):
    # Gradient descent; the trial step 1 / (q * sum_i w_i r_i^(q-2)) lands on
    # the reweighted mean of the targets and is then halved until Armijo holds.
    q = problem.q
    f = v_q(problem, x)
    for it in range(1, max_iters + 1):
        g = gradient(problem, x)
        gg = g @ g
        if gg == 0:
            return x, it, True
        y, w = problem.expanded(x)
        r = np.hypot(*(x - y).T)
        nz = r > 0
        alpha = 1.0 / (q * (w[nz] @ r[nz] ** (q - 2)))
        for _ in range(_MAX_HALVINGS):
            step = -alpha * g
            f_new = v_q(problem, x + step)
            if f_new <= f - _ARMIJO * alpha * gg:
                break
            alpha *= 0.5
        else:
            # No representable decrease left along -g.
            return x, it, True
        x = x + step
        f = f_new
        if np.hypot(*step) <= tol:
            return x, it, True
    return x, max_iters, False


def _newton_polish(problem, x):
    # Near the minimizer the objective is smooth (q > 1, x off the targets);
    # a few Newton steps take the first-order result to machine precision.
    g = gradient(problem, x)
    for _ in range(_NEWTON_STEPS):
        H = hessian(problem, x)
        if H is None or not np.all(np.isfinite(H)):
            break
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        x_new = x - step
        g_new = gradient(problem, x_new)
        if not np.hypot(*g_new) < np.hypot(*g):
            break
        x, g = x_new, g_new
    return x


def _weiszfeld(problem, x, tol, max_iters):
    # Weiszfeld iteration with the Vardi-Zhang fix for iterates sitting on a
    # target, where the plain update is undefined.
    for it in range(1, max_iters + 1):
        y, w = problem.expanded(x)
        diff = y - x
        r = np.hypot(diff[:, 0], diff[:, 1])
        on = r == 0
        inv = np.zeros_like(r)
        inv[~on] = w[~on] / r[~on]
        T = (inv @ y) / inv.sum()
        if not on.any():
            x_new = T
        else:
            eta = w[on].sum()
            R = inv @ diff
            rn = np.hypot(*R)
            if rn <= eta:
                return x, it, True
            x_new = (1 - eta / rn) * T + (eta / rn) * x
        step = x_new - x
        x = x_new
        if np.hypot(*step) <= tol:
            return x, it, True
    return x, max_iters, False


def grid_search_oracle(problem, resolution):
    """Brute-force argmin of :func:`v_q` on a regular grid.

    The grid covers the targets' bounding box padded by their diameter, with
    nodes at ``lo + k * resolution``.
    """
    if resolution <= 0:
        raise ValueError(f"resolution must be > 0, got {resolution}")
    y = problem.targets
    diam = max(
        np.hypot(*(y[i] - y[j]))
        for i in range(len(y)) for j in range(i, len(y))
    )
    if diam == 0 and problem.diagonal_weight == 0:
        return y[0].copy()
    if problem.diagonal_weight:
        # Minimizer lies between the targets and their diagonal projections.
        y = np.vstack([y, project_to_diagonal(y)])
        diam = max(np.hypot(*(y[i] - y[j])) for i in range(len(y)) for j in range(i, len(y)))
    lo = y.min(axis=0) - diam
    hi = y.max(axis=0) + diam
    xs = lo[0] + resolution * np.arange(int(np.floor((hi[0] - lo[0]) / resolution)) + 1)
    ys = lo[1] + resolution * np.arange(int(np.floor((hi[1] - lo[1]) / resolution)) + 1)
    best, best_val = None, np.inf
    chunk = max(1, 2_000_000 // max(len(ys) * len(y), 1))
    for start in range(0, len(xs), chunk):
        cx = xs[start:start + chunk]
        V = np.zeros((len(cx), len(ys)))
        for wi, (ty, tz) in zip(problem.weights, problem.targets):
            V += wi * np.hypot((cx - ty)[:, None], (ys - tz)[None, :]) ** problem.q
        if problem.diagonal_weight:
            gap = np.abs(ys[None, :] - cx[:, None]) / np.sqrt(2)
            V += problem.diagonal_weight * gap**problem.q
        k = np.unravel_index(np.argmin(V), V.shape)
        if V[k] < best_val:
            best_val = V[k]
            best = np.array([cx[k[0]], ys[k[1]]])
    return best
