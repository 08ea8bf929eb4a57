import numpy as np
import pytest

from pdrb.diagram import prune
from pdrb.extract import extract_max_pairs
from pdrb.synthetic import DEFAULT_ENSEMBLE, gaussian_mixture, make_outlier_ensemble


def test_default_ensemble_shape():
    grids, labels, outliers = make_outlier_ensemble(seed=0)
    assert len(grids) == 12
    assert all(g.shape == (32, 32) for g in grids)
    np.testing.assert_array_equal(labels, np.repeat([0, 1, 2], 4))
    assert outliers == [0, 4]


def test_seed_determinism():
    a, _, _ = make_outlier_ensemble(seed=3)
    b, _, _ = make_outlier_ensemble(seed=3)
    c, _, _ = make_outlier_ensemble(seed=4)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not all(np.array_equal(x, y) for x, y in zip(a, c))


def test_outlier_adds_a_persistent_pair():
    spec = {"outliers": []}
    clean, _, _ = make_outlier_ensemble(spec, seed=0)
    noisy, _, idx = make_outlier_ensemble(seed=0)
    for i in idx:
        assert len(prune(extract_max_pairs(noisy[i]), 1e-3)) == (
            len(prune(extract_max_pairs(clean[i]), 1e-3)) + 1
        )
        assert noisy[i].max() == pytest.approx(clean[i].max() + DEFAULT_ENSEMBLE["margin"])


def test_members_have_one_pair_per_bump():
    grids, labels, outliers = make_outlier_ensemble({"outliers": []}, seed=0)
    bumps = [c["bumps"] for c in DEFAULT_ENSEMBLE["clusters"]]
    for g, c in zip(grids, labels):
        assert len(prune(extract_max_pairs(g), 1e-3)) == bumps[c]


def test_gaussian_mixture_peak():
    f = gaussian_mixture((11, 11), [[0.5, 0.5]], [2.0], 0.1)
    assert f[5, 5] == pytest.approx(2.0)
    assert np.unravel_index(np.argmax(f), f.shape) == (5, 5)
