"""Reference power models: the q-witnessed distance and plain k-means."""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike

from .kpdtm import FitReport, PowerModel, _check_count, best_restart, model_from_anchors
from .neighbors import NeighborIndex, build_index, sq_dist_matrix
from .rng import make_rng

__all__ = ["kmeans_fit", "kmeans_model", "witnessed_model"]


def witnessed_model(cloud: ArrayLike | NeighborIndex, q: int) -> PowerModel:
    """One power center per data point, from that point's q-NN moments."""
    index = build_index(cloud)
    q = index.check_q(q)
    return model_from_anchors(index, index.points, q)


def _lloyd(points, centers, max_iter, restart_id, seed):
    def sq(c):
        return sq_dist_matrix(points, c)

    dist = sq(centers)
    cells = np.argmin(dist, axis=1)
    report = FitReport(losses=[float(dist.min(axis=1).mean())], iterations=0, reseeds=0, restart_id=restart_id, seed=seed)
    k, d = centers.shape
    for it in range(max_iter):
        counts = np.bincount(cells, minlength=k)
        sums = np.zeros((k, d))
        np.add.at(sums, cells, points)
        centers = centers.copy()
        live = counts > 0
        centers[live] = sums[live] / counts[live, None]
        dead = np.flatnonzero(~live)
        if dead.size:
            # farthest points from the current centers
            order = np.lexsort((np.arange(len(points)), -dist.min(axis=1)))
            centers[dead] = points[order[: dead.size]]
            report.reseeds += int(dead.size)
            report.reseed_iterations.append(it + 1)
        dist = sq(centers)
        new_cells = np.argmin(dist, axis=1)
        report.losses.append(float(dist.min(axis=1).mean()))
        report.iterations = it + 1
        if np.array_equal(new_cells, cells):
            report.converged = True
            break
        cells = new_cells
    return centers, report


def kmeans_fit(
    cloud: ArrayLike | NeighborIndex,
    k: int,
    restarts: int = 10,
    max_iter: int = 100,
    seed: int = 0,
) -> tuple[PowerModel, FitReport]:
    """Lloyd's algorithm on squared Euclidean cost, best of ``restarts``.

    The result is a power model with zero weights whose anchors equal its
    centers; ``q`` is recorded as 0.
    """
    index = build_index(cloud)
    k = _check_count("k", k, index.n)
    restarts = _check_count("restarts", restarts)
    max_iter = _check_count("max_iter", max_iter, lower=0)
    results = []
    for r in range(restarts):
        rng = make_rng(seed, r)
        start = index.points[rng.choice(index.n, size=k, replace=False)]
        centers, report = _lloyd(index.points, start, max_iter, r, seed)
        model = PowerModel(anchors=centers, centers=centers, sq_weights=np.zeros(k), q=0, n=index.n)
        results.append((model, report))
    return best_restart(results)


def kmeans_model(
    cloud: ArrayLike | NeighborIndex,
    k: int,
    restarts: int = 10,
    max_iter: int = 100,
    seed: int = 0,
) -> PowerModel:
    return kmeans_fit(cloud, k, restarts, max_iter, seed)[0]
