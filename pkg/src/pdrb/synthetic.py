"""Seeded synthetic ensembles of Gaussian-mixture scalar fields.

Members of a cluster share a layout of Gaussian bumps and differ by small
random jitter of the bump centers and amplitudes.  Outliers are made by
raising one isolated pixel ``margin`` above the field's maximum, which adds
one high-persistence pair to the member's diagram.
"""

import numpy as np

from .validation import check_random_state

DEFAULT_ENSEMBLE = {
    "dims": [32, 32],
    # Bump centers are drawn per cluster; amplitudes are fixed so that the
    # clusters differ in more than their pair count.  A cluster without
    # "amplitudes" draws them uniformly from "amplitude".
    "clusters": [
        {"count": 4, "bumps": 2, "amplitudes": [0.59, 0.19]},
        {"count": 4, "bumps": 3, "amplitudes": [0.88, 0.8, 0.65]},
        {"count": 4, "bumps": 4, "amplitudes": [0.89, 0.8, 0.43, 0.21]},
    ],
    # (cluster, member) pairs that get an outlier pixel
    "outliers": [[0, 0], [1, 0]],
    "margin": 0.02,
    "sigma": 0.1,
    "amplitude": [0.6, 1.0],
    "center_jitter": 0.02,
    "amplitude_jitter": 0.05,
}


def _layout(n_bumps, rng, amp_range, min_sep=0.25):
    centers = []
    while len(centers) < n_bumps:
        c = rng.uniform(0.15, 0.85, 2)
        if all(np.hypot(*(c - o)) >= min_sep for o in centers):
            centers.append(c)
    amps = rng.uniform(*amp_range, n_bumps)
    return np.array(centers), amps


def gaussian_mixture(dims, centers, amplitudes, sigma):
    """Sum of isotropic Gaussians on the unit square sampled on ``dims``."""
    ys = np.linspace(0.0, 1.0, dims[0])
    xs = np.linspace(0.0, 1.0, dims[1])
    Y, X = np.meshgrid(ys, xs, indexing="ij")
    f = np.zeros(dims)
    for (cy, cx), a in zip(centers, amplitudes):
        f += a * np.exp(-((Y - cy) ** 2 + (X - cx) ** 2) / (2 * sigma**2))
    return f


def isolated_pixel(f, centers, dims):
    """Grid pixel farthest from every bump center, away from the border."""
    ys = np.linspace(0.0, 1.0, dims[0])[1:-1]
    xs = np.linspace(0.0, 1.0, dims[1])[1:-1]
    Y, X = np.meshgrid(ys, xs, indexing="ij")
    d = np.full(Y.shape, np.inf)
    for cy, cx in centers:
        d = np.minimum(d, np.hypot(Y - cy, X - cx))
    i, j = np.unravel_index(np.argmax(d), d.shape)
    return i + 1, j + 1


def make_outlier_ensemble(spec=None, seed=0):
    """Grids and ground-truth labels for a clustered ensemble with outliers.

    ``spec`` follows :data:`DEFAULT_ENSEMBLE`; missing keys take its values.
    Returns ``(grids, labels, outlier_indices)`` where grids are 2D arrays in
    cluster order.
    """
    spec = {**DEFAULT_ENSEMBLE, **(spec or {})}
    rng = check_random_state(seed)
    dims = tuple(spec["dims"])
    outliers = {tuple(o) for o in spec["outliers"]}
    grids, labels, outlier_idx = [], [], []
    for c, cluster in enumerate(spec["clusters"]):
        centers, amps = _layout(cluster["bumps"], rng, spec["amplitude"])
        if "amplitudes" in cluster:
            amps = np.asarray(cluster["amplitudes"], dtype=float)
        if "centers" in cluster:
            centers = np.asarray(cluster["centers"], dtype=float)
        for member in range(cluster["count"]):
            cj = centers + rng.normal(0.0, spec["center_jitter"], centers.shape)
            aj = amps * (1.0 + rng.normal(0.0, spec["amplitude_jitter"], amps.shape))
            f = gaussian_mixture(dims, cj, aj, spec["sigma"])
            if (c, member) in outliers:
                i, j = isolated_pixel(f, cj, dims)
                f[i, j] = f.max() + spec["margin"]
                outlier_idx.append(len(grids))
            grids.append(f)
            labels.append(c)
    return grids, np.array(labels, dtype=int), outlier_idx
