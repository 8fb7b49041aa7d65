import itertools

import numpy as np
import pytest

import oracles
from pdtm.baselines import kmeans_fit, kmeans_model, witnessed_model
from pdtm.dtm import dtm_sq_batch
from pdtm.kpdtm import empirical_loss
from pdtm.neighbors import build_index


def test_witnessed_q1_is_distance_to_set():
    model = witnessed_model([[0.0], [2.0]], 1)
    assert model.centers.ravel().tolist() == [0.0, 2.0]
    assert model.sq_weights.tolist() == [0.0, 0.0]
    assert np.sqrt(model(np.array([[1.0], [3.5], [-1.0]]))).tolist() == [1.0, 1.5, 1.0]


def test_witnessed_d4(d4):
    model = witnessed_model(d4, 2)
    midpoints = {(1.0, 0.0), (0.0, 1.0), (2.0, 1.0), (1.0, 2.0)}
    assert model.k == 4
    assert all(tuple(c) in midpoints for c in model.centers.tolist())
    assert np.allclose(model.sq_weights, 1.0)
    assert np.array_equal(model.anchors, d4)


def test_witnessed_dominates_dtm(rng):
    pts = rng.normal(size=(100, 3))
    idx = build_index(pts)
    model = witnessed_model(idx, 7)
    xs = rng.normal(scale=2, size=(500, 3))
    assert np.all(model(xs) >= dtm_sq_batch(idx, xs, 7) - 1e-9)
    # at data points the witnessed distance is exactly the DTM
    assert np.allclose(model(pts), dtm_sq_batch(idx, pts, 7), atol=1e-12)


def test_kmeans_single_cluster(rng):
    pts = rng.normal(size=(50, 2))
    model = kmeans_model(pts, 1)
    assert np.allclose(model.centers[0], pts.mean(axis=0))
    assert model.sq_weights.tolist() == [0.0]


def test_kmeans_exact_cover(d4):
    model, report = kmeans_fit(d4, 4)
    assert sorted(map(tuple, model.centers.tolist())) == sorted(map(tuple, d4.tolist()))
    assert report.final_loss == 0.0


def _best_partition_loss(points, k):
    best = np.inf
    for labels in itertools.product(range(k), repeat=len(points)):
        if len(set(labels)) != k:
            continue
        cost = 0.0
        for c in range(k):
            members = points[np.array(labels) == c]
            cost += ((members - members.mean(axis=0)) ** 2).sum()
        best = min(best, cost / len(points))
    return best


def test_kmeans_d4_two_clusters(d4):
    assert _best_partition_loss(d4, 2) == 1.0
    model, report = kmeans_fit(d4, 2, seed=5)
    assert report.final_loss == pytest.approx(1.0)
    assert empirical_loss(model, d4) == pytest.approx(1.0)
    assert oracles.loss(model.centers.tolist(), [0.0, 0.0], d4.tolist()) == pytest.approx(1.0)


def test_kmeans_monotone(rng):
    pts = np.vstack([rng.normal(size=(80, 2)) + c for c in [(0, 0), (5, 0), (0, 5)]])
    for seed in range(5):
        _, report = kmeans_fit(pts, 6, restarts=1, seed=seed)
        for a, b in zip(report.losses, report.losses[1:]):
            assert b <= a * (1 + 1e-9) + 1e-9


def test_kmeans_errors(d4):
    with pytest.raises(ValueError):
        kmeans_model(d4, 5)
    with pytest.raises(ValueError):
        witnessed_model(d4, 0)
