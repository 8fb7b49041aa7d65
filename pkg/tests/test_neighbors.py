import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from pdtm.datagen import ShapeSpec, sample
from pdtm.neighbors import build_index, knn, knn_batch


def test_singleton_cloud():
    idx = build_index([(3.0, -1.0)])
    res = knn(idx, (0.0, 0.0), 1)
    assert res.indices.tolist() == [0]
    assert res.sq_dists.tolist() == [10.0]


def test_d4_tie_goes_to_lower_index(d4):
    res = knn(build_index(d4), (0, 0), 2)
    assert res.indices.tolist() == [0, 1]
    assert res.sq_dists.tolist() == [0.0, 4.0]


def test_d4_four_way_tie(d4):
    res = knn(build_index(d4), (1, 1), 1)
    assert res.indices.tolist() == [0]
    assert res.sq_dists.tolist() == [2.0]


def test_d4_matches_brute_force_all_queries(d4):
    idx = build_index(d4)
    for x in [(0, 0), (1, 1), (2, 1), (-1, 3), (1, 0)]:
        for q in range(1, 5):
            res = knn(idx, x, q)
            exp_idx, exp_sq = oracles.knn(d4.tolist(), x, q)
            assert res.indices.tolist() == exp_idx
            assert res.sq_dists.tolist() == exp_sq


def test_q_equals_n_returns_everything(rng):
    pts = rng.normal(size=(17, 3))
    res = knn(build_index(pts), pts[4], 17)
    assert sorted(res.indices.tolist()) == list(range(17))
    assert np.all(np.diff(res.sq_dists) >= 0)


def test_lemniscate_scale_query():
    pts = sample(ShapeSpec("sideways", 6000, noise_sigma=0.45, seed=1))
    idx, sq = knn_batch(build_index(pts), pts[:5], 50)
    assert idx.shape == (5, 50)
    assert np.all(sq[:, 0] == 0.0)


def test_errors(d4):
    with pytest.raises(ValueError):
        build_index(np.empty((0, 2)))
    idx = build_index(d4)
    with pytest.raises(ValueError):
        knn(idx, (0, 0), 0)
    with pytest.raises(ValueError):
        knn(idx, (0, 0), 5)
    with pytest.raises(ValueError):
        knn(idx, (0, 0, 0), 1)
    with pytest.raises(ValueError):
        build_index([(0.0, np.nan)])


def test_index_is_immutable(d4):
    idx = build_index(d4)
    with pytest.raises(ValueError):
        idx.points[0, 0] = 5.0


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(1, 200),
    d=st.integers(1, 4),
    seed=st.integers(0, 2**32 - 1),
    grid=st.booleans(),
)
def test_oracle_equivalence(n, d, seed, grid):
    gen = np.random.default_rng(seed)
    # integer grids produce many exact ties
    pts = gen.integers(-3, 4, size=(n, d)).astype(float) if grid else gen.normal(size=(n, d))
    queries = np.vstack([pts[: min(n, 3)], gen.integers(-3, 4, size=(3, d)).astype(float)])
    index = build_index(pts)
    for q in sorted({1, n, max(1, n // 2), min(n, 7)}):
        got_idx, got_sq = knn_batch(index, queries, q)
        for row, x in enumerate(queries):
            exp_idx, exp_sq = oracles.knn(pts.tolist(), x.tolist(), q)
            assert got_idx[row].tolist() == exp_idx
            assert got_sq[row].tolist() == exp_sq


def test_blocking_does_not_change_results(monkeypatch, rng):
    import pdtm.neighbors as nb

    pts = rng.integers(0, 5, size=(300, 2)).astype(float)
    queries = rng.integers(0, 5, size=(50, 2)).astype(float)
    full = knn_batch(build_index(pts), queries, 20)
    monkeypatch.setattr(nb, "_BLOCK", 900)
    small = knn_batch(build_index(pts), queries, 20)
    assert np.array_equal(full[0], small[0]) and np.array_equal(full[1], small[1])


@pytest.mark.parametrize("small", [0, 10**6])
def test_both_selection_paths_match_oracle(monkeypatch, rng, small):
    import pdtm.neighbors as nb

    monkeypatch.setattr(nb, "_SMALL", small)
    pts = rng.integers(-2, 3, size=(150, 2)).astype(float)
    queries = np.vstack([pts[:5], rng.integers(-2, 3, size=(10, 2)).astype(float)])
    index = build_index(pts)
    for q in (1, 2, 9, 75, 149, 150):
        got_idx, got_sq = knn_batch(index, queries, q)
        for row, x in enumerate(queries.tolist()):
            exp_idx, exp_sq = oracles.knn(pts.tolist(), x, q)
            assert got_idx[row].tolist() == exp_idx and got_sq[row].tolist() == exp_sq
