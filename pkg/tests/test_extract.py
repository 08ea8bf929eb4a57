import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import component_counting_pairs, multiset
from pdrb.diagram import PersistenceDiagram
from pdrb.extract import (
    MaxPairExtractor,
    ScalarGrid,
    extract_max_pairs,
    neighbor_offsets,
    sweep_order,
    threshold_top_k,
)


def test_worked_example_axis():
    pairs = extract_max_pairs(np.array([[0, 3, 1, 5, 2]], float), "axis")
    assert multiset(pairs) == [(0.0, 5.0), (1.0, 3.0)]


def test_monotone_line_has_single_pair():
    np.testing.assert_array_equal(extract_max_pairs(np.array([1.0, 2.0, 3.0])), [[1, 3]])


def test_constant_grid_gives_zero_persistence_pair():
    np.testing.assert_array_equal(extract_max_pairs(np.full((2, 2), 2.0)), [[2, 2]])


def test_sweep_order_breaks_ties_by_index():
    np.testing.assert_array_equal(sweep_order([1, 3, 3, 0]), [1, 2, 0, 3])


@pytest.mark.parametrize("ndim,conn,count", [(1, "full", 2), (2, "full", 8), (2, "axis", 4),
                                             (3, "full", 26), (3, "axis", 6)])
def test_neighbor_counts(ndim, conn, count):
    assert len(neighbor_offsets(ndim, conn)) == count


def test_connectivity_changes_pairing():
    # Diagonal neighbors make 2 a regular point under full connectivity.
    f = np.array([[3.0, 0.0], [0.0, 2.0]])
    assert multiset(extract_max_pairs(f, "axis")) == [(0.0, 2.0), (0.0, 3.0)]
    assert multiset(extract_max_pairs(f, "full")) == [(0.0, 3.0)]


def test_invalid_grid():
    with pytest.raises(ValueError):
        ScalarGrid((2, 2), [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        ScalarGrid((1,), [np.nan])
    with pytest.raises(ValueError):
        extract_max_pairs(np.zeros((2, 2)), "diagonal")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["full", "axis"]), st.integers(1, 3))
def test_matches_component_counting_oracle(seed, conn, ndim):
    rng = np.random.default_rng(seed)
    shape = tuple(rng.integers(1, 6 if ndim < 3 else 4, ndim))
    values = rng.integers(0, 4, shape).astype(float) if seed % 2 else rng.normal(size=shape)
    assert multiset(extract_max_pairs(values, conn)) == multiset(
        component_counting_pairs(values, conn)
    )


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pair_properties(seed):
    rng = np.random.default_rng(seed)
    f = rng.normal(size=tuple(rng.integers(1, 7, 2)))
    pairs = extract_max_pairs(f)
    assert np.all(pairs[:, 0] <= pairs[:, 1])
    assert pairs[:, 1].max() == f.max()
    # Exactly one pair per local maximum (strict, 8-connected).
    padded = np.pad(f, 1, constant_values=-np.inf)
    is_max = np.ones_like(f, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                shifted = padded[1 + di: 1 + di + f.shape[0], 1 + dj: 1 + dj + f.shape[1]]
                is_max &= f > shifted
    assert len(pairs) == is_max.sum()


def test_top_k_order_and_ties():
    X = np.array([[0, 1], [1, 3], [0, 2], [2, 3]], float)
    np.testing.assert_array_equal(threshold_top_k(X, 2), [[1, 3], [0, 2]])
    np.testing.assert_array_equal(threshold_top_k(X, 10), X)
    with pytest.raises(ValueError):
        threshold_top_k(X, 0)


def test_extractor_estimator():
    ext = MaxPairExtractor(connectivity="axis", epsilon=0.5).fit()
    out = ext.transform([np.array([[0, 3, 1, 5, 2]], float), np.full((2, 2), 1.0)])
    assert all(isinstance(d, PersistenceDiagram) for d in out)
    assert multiset(out[0].points) == [(0.0, 5.0), (1.0, 3.0)]
    assert len(out[1]) == 0
    assert ext.get_params()["connectivity"] == "axis"
    assert len(MaxPairExtractor(top_k=1).fit_transform([np.array([0, 3, 1, 5, 2.0])])[0]) == 1
