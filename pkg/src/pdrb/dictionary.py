"""Wasserstein dictionary encoding of persistence diagram ensembles.

Each input diagram ``X_l`` is approximated by the W_q barycenter of ``m``
atom diagrams under a coefficient vector ``lambda_l`` on the simplex.  Atoms
and coefficients are fitted by full-batch first-order descent on

    E = sum_l W_q(B_q(atoms, lambda_l), X_l) ** q.

Gradients are taken with all assignments frozen at the evaluation point:
every reconstruction point is then the smooth argmin of its ground problem,
differentiated implicitly, and the transport cost to the input is a fixed sum
of q-th powers.  Coefficients live on the simplex through a softmax of
unconstrained logits.
"""

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._parallel import ordered_map
from .barycenter import BarycenterConfig, compute_barycenter
from .clustering import kmeans
from .diagram import PersistenceDiagram, project_to_diagonal, prune
from .ground import NORMAL, GroundProblem, ground_barycenter, hessian
from .metric import cross_distances, optimal_plan, wasserstein_distance
from .validation import check_ensemble, check_q, check_random_state

_PROJ = np.full((2, 2), 0.5)


@dataclass(frozen=True)
class EncodeConfig:
    """Optimizer settings of :func:`encode`.

    ``lr_atoms`` is relative to the coordinate scale of the ensemble (the
    largest finite coordinate magnitude); ``lr_weights`` acts on the logits.
    ``temperature`` scales the softmax of negative distances used to start
    the coefficients; None takes the mean nonzero distance to the atoms.
    """

    max_epochs: int = 200
    lr_atoms: float = 1e-2
    lr_weights: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    rtol: float = 1e-6
    temperature: Optional[float] = None
    max_backtracks: int = 30
    fit_atoms: bool = True
    kmeans_n_init: int = 1
    barycenter: BarycenterConfig = field(default_factory=BarycenterConfig)

    def __post_init__(self):
        if self.max_epochs < 0:
            raise ValueError(f"max_epochs must be >= 0, got {self.max_epochs}")
        if self.lr_atoms < 0 or self.lr_weights < 0:
            raise ValueError("learning rates must be >= 0")
        if self.temperature is not None and self.temperature <= 0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}")


@dataclass
class EncodingResult:
    atoms: list
    coefficients: np.ndarray
    energy_trace: list
    n_epochs: int
    logits: Optional[np.ndarray] = None


def softmax(z):
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def check_coefficients(lam, m, *, atol=1e-9):
    """Validate a coefficient vector of length ``m`` on the simplex."""
    lam = np.asarray(lam, dtype=np.float64).ravel()
    if lam.shape[0] != m:
        raise ValueError(f"expected {m} coefficients, got {lam.shape[0]}")
    if not np.all(np.isfinite(lam)) or np.any(lam < 0):
        raise ValueError("coefficients must be finite and non-negative")
    if abs(lam.sum() - 1.0) > atol:
        raise ValueError(f"coefficients must sum to 1, got {lam.sum()!r}")
    return lam


def check_atoms(atoms):
    atoms = check_ensemble(atoms, allow_diagonal=True)
    if len(atoms) < 2:
        raise ValueError(f"a dictionary needs at least 2 atoms, got {len(atoms)}")
    if any(len(prune(a)) == 0 for a in atoms):
        raise ValueError("atoms must be non-empty after pruning")
    return atoms


def _barycenter_config(config, q, lam):
    config = config or BarycenterConfig(q=q)
    return replace(config, q=q, weights=tuple(lam))


def _reconstruct_full(atoms, lam, q, config):
    # Start from the heaviest atom: a one-hot vector is then a fixed point.
    cfg = _barycenter_config(config, q, lam)
    return compute_barycenter(atoms, cfg, init_diagram=atoms[int(np.argmax(lam))])


def reconstruct(atoms, lam, q=2.0, config=None):
    """Barycenter of the atoms under coefficients ``lam``."""
    q = check_q(q)
    atoms = check_ensemble(atoms, allow_diagonal=True)
    lam = check_coefficients(lam, len(atoms))
    return _reconstruct_full(atoms, lam, q, config).barycenter


def encoding_energy(atoms, coefficients, ensemble, q=2.0, config=None):
    """``sum_l W_q(reconstruct(atoms, lambda_l), X_l) ** q``."""
    q = check_q(q)
    atoms = check_ensemble(atoms, allow_diagonal=True)
    diagrams = check_ensemble(ensemble, allow_diagonal=True)
    lam = np.asarray(coefficients, dtype=np.float64)
    if lam.shape != (len(diagrams), len(atoms)):
        raise ValueError(
            f"coefficients must have shape ({len(diagrams)}, {len(atoms)}), got {lam.shape}"
        )
    for row in lam:
        check_coefficients(row, len(atoms))
    return _energy(atoms, lam, diagrams, q, config)


def _energy(atoms, lam, diagrams, q, config):
    def term(l):
        B = _reconstruct_full(atoms, lam[l], q, config).barycenter
        return wasserstein_distance(B, diagrams[l], q) ** q
    return float(sum(ordered_map(term, range(len(diagrams)))))


# ---------------------------------------------------------------------------
# Frozen-plan objective and its gradient


@dataclass
class _Frozen:
    """Assignments of one reconstruction, frozen at an evaluation point.

    ``index[k, j]`` is the point of atom ``j`` feeding reconstruction point
    ``k`` (-1: the diagonal).  ``cols[k]`` is the slot of the augmented input
    matched to point ``k``: an input point when ``< n_x``, otherwise the
    diagonal projection of reconstruction point ``cols[k] - n_x``.  ``const``
    is the cost of input points matched to the diagonal.
    """

    index: np.ndarray
    cols: np.ndarray
    n_x: int
    const: float


def _hess_h(u, q):
    r = np.hypot(*u)
    if r == 0:
        return np.zeros((2, 2)) if q >= 2 else None
    return q * r ** (q - 2) * (np.eye(2) + (q - 2) * np.outer(u, u) / r**2)


def _grad_h(u, q):
    r = np.hypot(*u)
    return np.zeros(2) if r == 0 else q * r ** (q - 2) * u


def _point_problem(atoms, lam, row, q):
    off = row >= 0
    targets = np.array([atoms[j][row[j]] for j in np.flatnonzero(off)]).reshape(-1, 2)
    wd = float(lam[~off].sum())
    return GroundProblem(targets, lam[off], q, diagonal_weight=min(wd, np.nextafter(1.0, 0)))


def _solve_point(problem, tol):
    return ground_barycenter(problem, tol=tol).point


def _freeze(atoms, lam, X, q, config):
    result = _reconstruct_full(atoms, lam, q, config)
    index = result.update_matching.index
    # Rows only matched to zero-weight atoms carry no information.
    B = _points(atoms, lam, index, q, config)
    if len(B):
        pair, plan = optimal_plan(B, X, q, allow_diagonal=True)
        cols = plan.permutation[: len(B)]
        rows = np.arange(len(B), pair.size)
        diag_rows = rows[plan.permutation[rows] < len(X)]
        const = sum(
            np.hypot(*(pair.left[r] - pair.right[plan.permutation[r]])) ** q for r in diag_rows
        )
    else:
        cols = np.zeros(0, dtype=np.intp)
        const = sum(np.hypot(*(x - project_to_diagonal(x))) ** q for x in X)
    return _Frozen(index, cols, len(X), float(const))


def _points(atoms, lam, index, q, config):
    tol = (config or BarycenterConfig()).ground_tol
    return np.array(
        [_solve_point(_point_problem(atoms, lam, row, q), tol) for row in index]
    ).reshape(-1, 2)


def _frozen_energy(atoms, lam, X, q, frozen, config):
    B = _points(atoms, lam, frozen.index, q, config)
    total = frozen.const
    for k, c in enumerate(frozen.cols):
        other = X[c] if c < frozen.n_x else project_to_diagonal(B[c - frozen.n_x])
        total += np.hypot(*(B[k] - other)) ** q
    return float(total)


def _frozen_gradient(atoms, lam, X, q, frozen, config):
    """Gradient of the frozen objective w.r.t. atom points and ``lam``."""
    m = len(atoms)
    B = _points(atoms, lam, frozen.index, q, config)
    # dE/dB under the frozen input plan.
    gB = np.zeros_like(B)
    for k, c in enumerate(frozen.cols):
        if c < frozen.n_x:
            gB[k] += _grad_h(B[k] - X[c], q)
        else:
            j = c - frozen.n_x
            g = _grad_h(B[k] - project_to_diagonal(B[j]), q)
            gB[k] += g
            gB[j] -= _PROJ @ g
    g_atoms = [np.zeros_like(a) for a in atoms]
    g_lam = np.zeros(m)
    for k, row in enumerate(frozen.index):
        problem = _point_problem(atoms, lam, row, q)
        H = hessian(problem, B[k])
        off = row >= 0
        if H is None:
            # The point sits on a target with q < 2; it moves with that target.
            for j in np.flatnonzero(off):
                if np.hypot(*(B[k] - atoms[j][row[j]])) == 0:
                    g_atoms[j][row[j]] += gB[k]
                    break
            continue
        v = np.linalg.solve(H, gB[k])
        s = NORMAL @ B[k]
        g_diag = q * abs(s) ** (q - 1) * np.sign(s) * NORMAL
        for j in range(m):
            if off[j]:
                u = B[k] - atoms[j][row[j]]
                g_atoms[j][row[j]] += lam[j] * (_hess_h(u, q) @ v)
                g_lam[j] -= v @ _grad_h(u, q)
            else:
                g_lam[j] -= v @ g_diag
    return g_atoms, g_lam


def _softmax_backward(lam, g_lam):
    return lam * (g_lam - lam @ g_lam)


def _gradient(atoms, logits, diagrams, q, config, frozen=None):
    lam = softmax(logits)
    if frozen is None:
        frozen = ordered_map(lambda l: _freeze(atoms, lam[l], diagrams[l], q, config),
                             range(len(diagrams)))
    parts = ordered_map(
        lambda l: _frozen_gradient(atoms, lam[l], diagrams[l], q, frozen[l], config),
        range(len(diagrams)),
    )
    g_atoms = [np.zeros_like(a) for a in atoms]
    g_logits = np.zeros_like(logits)
    for l, (ga, gl) in enumerate(parts):
        for j in range(len(atoms)):
            g_atoms[j] += ga[j]
        g_logits[l] = _softmax_backward(lam[l], gl)
    return g_atoms, g_logits


def frozen_gradient(atoms, coefficients, ensemble, q=2.0, config=None):
    """Analytic frozen-plan gradient of the encoding energy.

    Returns ``(atom_gradients, logit_gradients)`` where the logits are
    ``log(coefficients)`` (softmax is invariant to a constant shift).
    """
    q = check_q(q)
    atoms = check_ensemble(atoms, allow_diagonal=True)
    diagrams = check_ensemble(ensemble, allow_diagonal=True)
    logits = np.log(np.asarray(coefficients, dtype=np.float64))
    return _gradient(atoms, logits, diagrams, q, config)


def fd_gradient_check(atoms, coefficients, ensemble, q=2.0, h=1e-5, config=None):
    """Largest deviation between analytic and central-difference gradients.

    Differences are taken on the frozen-plan objective w.r.t. every atom
    coordinate and every logit, and the result is scaled by the largest
    analytic gradient component.  Returns ``(max_rel_error, analytic, numeric)``
    with both gradients flattened (atoms first, then logits).
    """
    if h <= 0:
        raise ValueError(f"h must be > 0, got {h}")
    q = check_q(q)
    atoms = [a.copy() for a in check_ensemble(atoms, allow_diagonal=True)]
    diagrams = check_ensemble(ensemble, allow_diagonal=True)
    logits = np.log(np.asarray(coefficients, dtype=np.float64))
    lam = softmax(logits)
    frozen = [_freeze(atoms, lam[l], diagrams[l], q, config) for l in range(len(diagrams))]
    g_atoms, g_logits = _gradient(atoms, logits, diagrams, q, config, frozen)
    analytic = np.concatenate([g.ravel() for g in g_atoms] + [g_logits.ravel()])

    def energy(atoms_, logits_):
        lam_ = softmax(logits_)
        return sum(
            _frozen_energy(atoms_, lam_[l], diagrams[l], q, frozen[l], config)
            for l in range(len(diagrams))
        )

    numeric = []
    for j, a in enumerate(atoms):
        for idx in np.ndindex(a.shape):
            vals = []
            for sign in (1, -1):
                shifted = [b.copy() for b in atoms]
                shifted[j][idx] += sign * h
                vals.append(energy(shifted, logits))
            numeric.append((vals[0] - vals[1]) / (2 * h))
    for idx in np.ndindex(logits.shape):
        vals = []
        for sign in (1, -1):
            z = logits.copy()
            z[idx] += sign * h
            vals.append(energy(atoms, z))
        numeric.append((vals[0] - vals[1]) / (2 * h))
    numeric = np.asarray(numeric)
    scale = np.abs(analytic).max(initial=0.0)
    err = np.abs(analytic - numeric).max(initial=0.0)
    rel = err / scale if scale > 0 else err
    return float(rel), analytic, numeric


# ---------------------------------------------------------------------------
# Optimizer


def _scale(diagrams):
    pts = np.concatenate([d for d in diagrams if len(d)] or [np.zeros((1, 2))])
    return float(np.abs(pts).max()) or 1.0


def _init_atoms(diagrams, m, q, seed, config):
    result = kmeans(diagrams, m, q, config.barycenter, seed, n_init=config.kmeans_n_init)
    atoms = []
    for j, c in enumerate(result.centroids):
        c = prune(np.asarray(c))
        if len(c) == 0:
            # Fall back to the member closest to the (empty) centroid.
            members = np.flatnonzero(result.labels == j)
            c = diagrams[members[0]] if len(members) else diagrams[j]
        atoms.append(np.array(c, dtype=np.float64))
    return atoms


def _init_logits(atoms, diagrams, q, temperature):
    D = cross_distances(diagrams, atoms, q)
    if temperature is None:
        pos = D[D > 0]
        temperature = float(pos.mean()) if pos.size else 1.0
    return -D / temperature


def _clamp(atoms):
    # Keep atom points on or above the diagonal.
    out = []
    for a in atoms:
        a = a.copy()
        below = a[:, 0] > a[:, 1]
        a[below] = project_to_diagonal(a[below])
        out.append(a)
    return out


def encode(ensemble, m, q=2.0, config=None, seed=None, *, atoms=None):
    """Fit ``m`` atoms and one coefficient vector per input diagram.

    Atoms start at k-means centroids (``k = m``) unless given, coefficients
    at a softmax of negative distances to the atoms.  Each epoch takes one
    Adam-style step on atoms and logits; a step that would raise the energy
    is halved until it does not, so the recorded energy never increases.
    Stops after ``max_epochs`` or when the relative energy change drops
    below ``rtol``.
    """
    config = config or EncodeConfig()
    q = check_q(q, strict=not config.barycenter.allow_q1)
    diagrams = check_ensemble(ensemble, allow_diagonal=True)
    n = len(diagrams)
    if not 2 <= m <= n:
        raise ValueError(f"m must be in [2, {n}], got {m}")
    bary = replace(config.barycenter, q=q)
    config = replace(config, barycenter=bary)
    rng = check_random_state(seed)
    if atoms is None:
        atoms = _init_atoms(diagrams, m, q, rng, config)
    else:
        atoms = [a.copy() for a in check_atoms(atoms)]
        if len(atoms) != m:
            raise ValueError(f"expected {m} atoms, got {len(atoms)}")
    logits = _init_logits(atoms, diagrams, q, config.temperature)
    energy = _energy(atoms, softmax(logits), diagrams, q, bary)
    trace = [energy]
    lr_a = config.lr_atoms * _scale(diagrams) if config.fit_atoms else 0.0
    lr_w = config.lr_weights
    m1_a = [np.zeros_like(a) for a in atoms]
    m2_a = [np.zeros_like(a) for a in atoms]
    m1_w = np.zeros_like(logits)
    m2_w = np.zeros_like(logits)
    b1, b2, eps = config.beta1, config.beta2, config.eps
    epoch = 0
    for epoch in range(1, config.max_epochs + 1):
        if energy == 0:
            break
        g_atoms, g_logits = _gradient(atoms, logits, diagrams, q, bary)
        for j in range(m):
            m1_a[j] = b1 * m1_a[j] + (1 - b1) * g_atoms[j]
            m2_a[j] = b2 * m2_a[j] + (1 - b2) * g_atoms[j] ** 2
        m1_w = b1 * m1_w + (1 - b1) * g_logits
        m2_w = b2 * m2_w + (1 - b2) * g_logits**2
        c1, c2 = 1 - b1**epoch, 1 - b2**epoch
        d_atoms = [(mm / c1) / (np.sqrt(vv / c2) + eps) for mm, vv in zip(m1_a, m2_a)]
        d_logits = (m1_w / c1) / (np.sqrt(m2_w / c2) + eps)
        # The Adam direction comes first.  Where it fails to descend (stale
        # moments, or a reconstruction switching between fixed points) the
        # coefficients alone and then plain normalized gradients are tried.
        candidates = [(d_atoms, d_logits, lr_a)]
        if lr_a:
            candidates.append((d_atoms, d_logits, 0.0))
        steep_a = [g / _inf_norm(g_atoms) for g in g_atoms]
        steep_w = g_logits / _inf_norm([g_logits])
        candidates += [(steep_a, steep_w, lr_a)] + ([(steep_a, steep_w, 0.0)] if lr_a else [])
        step = None
        for da, dw, lra in candidates:
            trial = _line_search(atoms, logits, da, dw, lra, lr_w, energy, diagrams, q, bary,
                                 config.max_backtracks)
            if trial is not None and (step is None or trial[2] < step[2]):
                step = trial
            if step is not None and (energy - step[2]) / energy >= config.rtol:
                break
        if step is None:
            trace.append(energy)
            break
        change = (energy - step[2]) / energy
        atoms, logits, energy = step
        trace.append(energy)
        if change < config.rtol:
            break
    return EncodingResult(atoms, softmax(logits), trace, epoch, logits)


def _inf_norm(arrays):
    return max((np.abs(a).max(initial=0.0) for a in arrays), default=0.0) or 1.0


def _line_search(atoms, logits, d_atoms, d_logits, lr_a, lr_w, energy, diagrams, q, bary,
                 max_backtracks):
    # Halve the step until the energy decreases; None if it never does.
    mult = 1.0
    for _ in range(max_backtracks):
        trial_atoms = _clamp([a - mult * lr_a * d for a, d in zip(atoms, d_atoms)])
        trial_logits = logits - mult * lr_w * d_logits
        trial = _energy(trial_atoms, softmax(trial_logits), diagrams, q, bary)
        if trial < energy:
            return trial_atoms, trial_logits, trial
        mult *= 0.5
    return None


# ---------------------------------------------------------------------------
# Planar layout


def triangle_vertices(d12, d13, d23):
    """Vertices of a triangle with the given side lengths via the cosine law.

    ``a1`` sits at the origin, ``a2`` on the positive x axis and ``a3`` in
    the upper half plane.  A negative radicand (rounded distances violating
    the triangle inequality) is clamped to zero with a warning.
    """
    if d12 <= 0:
        raise ValueError("atoms 1 and 2 coincide (d12 = 0); layout is undefined")
    x3 = (d12**2 + d13**2 - d23**2) / (2 * d12)
    rad = d13**2 - x3**2
    if rad < 0:
        warnings.warn(
            f"atom distances violate the triangle inequality (radicand {rad:.3g}); clamped to 0",
            RuntimeWarning, stacklevel=2,
        )
        rad = 0.0
    return np.array([[0.0, 0.0], [d12, 0.0], [x3, np.sqrt(rad)]])


def planar_layout(atoms, coefficients, q=2.0):
    """2D positions of encoded diagrams for a three-atom dictionary.

    Returns ``(points, vertices)``: each input is placed at the barycentric
    combination of the atom vertices.
    """
    q = check_q(q)
    atoms = check_ensemble(atoms, allow_diagonal=True)
    if len(atoms) != 3:
        raise ValueError(f"planar layout needs exactly 3 atoms, got {len(atoms)}")
    lam = np.atleast_2d(np.asarray(coefficients, dtype=np.float64))
    for row in lam:
        check_coefficients(row, 3)
    d = lambda i, j: wasserstein_distance(atoms[i], atoms[j], q)  # noqa: E731
    V = triangle_vertices(d(0, 1), d(0, 2), d(1, 2))
    return lam @ V, V


def separation_score(points, labels):
    """Min inter-class distance over max intra-class distance."""
    P = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    D = np.hypot(*(P[:, None, :] - P[None, :, :]).transpose(2, 0, 1))
    same = labels[:, None] == labels[None, :]
    np.fill_diagonal(same, False)
    diff = labels[:, None] != labels[None, :]
    intra = D[same].max(initial=0.0)
    inter = D[diff].min(initial=np.inf)
    return float(inter / intra) if intra > 0 else float("inf")


class WassersteinDictionary(TransformerMixin, BaseEstimator):
    """Dictionary of ``n_atoms`` diagrams with barycentric codes.

    Parameters
    ----------
    n_atoms : int, default=3
    q : float, default=2.0
    max_epochs : int, default=200
    lr_atoms, lr_weights : float, default=1e-2
        Adam step sizes; ``lr_atoms`` is relative to the data scale.
    barycenter_iter : int, default=10
    random_state : int, Generator or None
        Seeds the k-means initialization.

    Attributes
    ----------
    atoms_ : list of PersistenceDiagram
    coefficients_ : ndarray of shape (n_samples, n_atoms)
    energy_trace_ : list of float
    """

    def __init__(self, n_atoms=3, q=2.0, max_epochs=200, lr_atoms=1e-2, lr_weights=1e-2,
                 barycenter_iter=10, random_state=None):
        self.n_atoms = n_atoms
        self.q = q
        self.max_epochs = max_epochs
        self.lr_atoms = lr_atoms
        self.lr_weights = lr_weights
        self.barycenter_iter = barycenter_iter
        self.random_state = random_state

    def _config(self, **kw):
        bary = BarycenterConfig(q=check_q(self.q, strict=True), max_iter=self.barycenter_iter)
        return EncodeConfig(max_epochs=self.max_epochs, lr_atoms=self.lr_atoms,
                            lr_weights=self.lr_weights, barycenter=bary, **kw)

    def fit(self, X, y=None):
        result = encode(X, self.n_atoms, self.q, self._config(), self.random_state)
        self._atoms = result.atoms
        self.atoms_ = [PersistenceDiagram(prune(a)) for a in result.atoms]
        self.coefficients_ = result.coefficients
        self.energy_trace_ = result.energy_trace
        self.n_epochs_ = result.n_epochs
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).coefficients_

    def transform(self, X):
        """Coefficients of new diagrams with the atoms held fixed."""
        diagrams = check_ensemble(X, allow_diagonal=True)
        config = self._config(fit_atoms=False)
        if len(diagrams) < self.n_atoms:
            # encode() insists on m <= N; pad with copies and drop them again.
            padded = diagrams + [diagrams[0]] * (self.n_atoms - len(diagrams))
            return encode(padded, self.n_atoms, self.q, config, atoms=self._atoms).coefficients[
                : len(diagrams)
            ]
        return encode(diagrams, self.n_atoms, self.q, config, atoms=self._atoms).coefficients

    def inverse_transform(self, coefficients):
        return [PersistenceDiagram(prune(reconstruct(self._atoms, lam, self.q)))
                for lam in np.atleast_2d(coefficients)]

    def layout(self, coefficients=None):
        """Planar positions of ``coefficients`` (default: the training codes)."""
        lam = self.coefficients_ if coefficients is None else coefficients
        return planar_layout(self._atoms, lam, self.q)[0]
