"""Exact q-nearest-neighbor queries over a fixed point cloud.

All distances are squared Euclidean distances. Ties at the cutoff distance are
broken by ascending point index, so every query has one canonical answer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "NeighborIndex",
    "NeighborSet",
    "as_cloud",
    "build_index",
    "knn",
    "knn_batch",
    "sq_dist_matrix",
]

# Upper bound on the size of one (queries x points) distance block.
_BLOCK = 1 << 22
# Below this many points a full stable sort beats partition-based selection.
_SMALL = 512


def as_cloud(points: ArrayLike) -> NDArray[np.float64]:
    """Validate and return a read-only ``(n, d)`` float64 copy of ``points``."""
    arr = np.array(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"point cloud must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError("point cloud is empty")
    if arr.shape[1] < 1:
        raise ValueError("points must have at least one coordinate")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point cloud contains non-finite coordinates")
    arr.flags.writeable = False
    return arr


def sq_dist_matrix(queries: NDArray[np.float64], points: NDArray[np.float64]) -> NDArray[np.float64]:
    """Squared distances between every query row and every point row.

    Coordinates are accumulated one axis at a time as ``diff * diff`` so the
    result is bit-identical to a plain scalar loop over the axes.
    """
    diff = queries[:, None, 0] - points[None, :, 0]
    out = diff * diff
    for j in range(1, points.shape[1]):
        diff = queries[:, None, j] - points[None, :, j]
        out += diff * diff
    return out


@dataclass(frozen=True)
class NeighborSet:
    query: NDArray[np.float64]
    q: int
    indices: NDArray[np.intp]
    sq_dists: NDArray[np.float64]


class NeighborIndex:
    """Immutable brute-force index; safe to query from several threads."""

    def __init__(self, points: ArrayLike):
        self._points = as_cloud(points)

    @property
    def points(self) -> NDArray[np.float64]:
        return self._points

    @property
    def n(self) -> int:
        return self._points.shape[0]

    @property
    def d(self) -> int:
        return self._points.shape[1]

    def check_q(self, q: int) -> int:
        if isinstance(q, (bool, np.bool_)) or int(q) != q:
            raise ValueError(f"q must be an integer, got {q!r}")
        q = int(q)
        if not 1 <= q <= self.n:
            raise ValueError(f"q must satisfy 1 <= q <= n={self.n}, got {q}")
        return q

    def check_queries(self, x: ArrayLike) -> NDArray[np.float64]:
        arr = np.asarray(x, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            # a single point, or a batch of 1-d points on a 1-d cloud
            arr = arr[None, :] if self.d > 1 or arr.shape[0] == 1 else arr[:, None]
        if arr.ndim != 2 or arr.shape[1] != self.d:
            raise ValueError(f"query dimension mismatch: expected d={self.d}, got shape {np.shape(x)}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("query contains non-finite coordinates")
        return arr

    def __repr__(self) -> str:
        return f"NeighborIndex(n={self.n}, d={self.d})"


def build_index(cloud: ArrayLike | NeighborIndex) -> NeighborIndex:
    if isinstance(cloud, NeighborIndex):
        return cloud
    return NeighborIndex(cloud)


def _select(dist: NDArray[np.float64], q: int) -> NDArray[np.intp]:
    """Column indices of the q smallest entries per row, ordered by (value, index)."""
    m, n = dist.shape
    if q == n or n <= _SMALL:
        order = np.argsort(dist, axis=1)
        ranked = np.take_along_axis(dist, order, axis=1)
        tied = (ranked[:, 1:] == ranked[:, :-1]).any(axis=1)
        if tied.any():
            order[tied] = np.argsort(dist[tied], axis=1, kind="stable")
        return order[:, :q]
    kth = np.partition(dist, q - 1, axis=1)[:, q - 1 : q]
    below = dist < kth
    at = dist == kth
    missing = q - below.sum(axis=1, keepdims=True)
    take = below | (at & (np.cumsum(at, axis=1) <= missing))
    idx = np.nonzero(take)[1].reshape(m, q)
    order = np.argsort(np.take_along_axis(dist, idx, axis=1), axis=1, kind="stable")
    return np.take_along_axis(idx, order, axis=1)


def knn_batch(index: NeighborIndex, x: ArrayLike, q: int) -> tuple[NDArray[np.intp], NDArray[np.float64]]:
    """q-NN of every row of ``x``: arrays of shape ``(m, q)`` for indices and squared distances."""
    index = build_index(index)
    q = index.check_q(q)
    queries = index.check_queries(x)
    m = queries.shape[0]
    idx = np.empty((m, q), dtype=np.intp)
    sq = np.empty((m, q), dtype=np.float64)
    step = max(1, _BLOCK // index.n)
    for lo in range(0, m, step):
        block = sq_dist_matrix(queries[lo : lo + step], index.points)
        sel = _select(block, q)
        idx[lo : lo + step] = sel
        sq[lo : lo + step] = block[np.arange(sel.shape[0])[:, None], sel]
    return idx, sq


def knn(index: NeighborIndex, x: ArrayLike, q: int) -> NeighborSet:
    index = build_index(index)
    query = index.check_queries(x)
    if query.shape[0] != 1:
        raise ValueError("knn expects a single query point; use knn_batch for several")
    idx, sq = knn_batch(index, query, q)
    return NeighborSet(query=query[0], q=int(q), indices=idx[0], sq_dists=sq[0])
