"""Empirical distance to measure and local q-NN moments.

With mass parameter ``h = q / n`` the squared empirical DTM at ``x`` is the mean
squared distance from ``x`` to its q nearest sample points. It decomposes as
``|x - m|**2 + v`` where ``m`` and ``v`` are the barycenter and variance of
those neighbors. A data point counts as its own neighbor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .neighbors import NeighborIndex, build_index, knn_batch

__all__ = [
    "LocalMoments",
    "dtm",
    "dtm_and_moments_batch",
    "dtm_sq",
    "dtm_sq_batch",
    "local_moments",
    "local_moments_batch",
    "semiconcavity_gap",
]


@dataclass(frozen=True)
class LocalMoments:
    m: NDArray[np.float64]
    v: float
    M: float
    q: int


def _moments(points: NDArray[np.float64], idx: NDArray[np.intp], q: int):
    nbrs = points[idx]
    bary = nbrs.sum(axis=1) / q
    resid = nbrs - bary[:, None, :]
    var = np.einsum("mqd,mqd->m", resid, resid) / q
    second = np.einsum("mqd,mqd->m", nbrs, nbrs) / q
    return bary, var, second


def _dtm_from_sq(sq: NDArray[np.float64], q: int) -> NDArray[np.float64]:
    # sequential sum in ascending distance order
    return np.cumsum(sq, axis=1)[:, -1] / q


def local_moments_batch(
    index: NeighborIndex, x: ArrayLike, q: int
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """Barycenters ``(m, d)``, variances ``(m,)`` and second moments ``(m,)`` of each query's q-NN."""
    index = build_index(index)
    idx, _ = knn_batch(index, x, q)
    return _moments(index.points, idx, q)


def dtm_and_moments_batch(index: NeighborIndex, x: ArrayLike, q: int):
    """``(dtm_sq, m, v, M)`` from a single neighbor search.

    The squared DTM comes from the sorted neighbor distances and the moments
    from the neighbor coordinates, exactly as in ``dtm_sq_batch`` and
    ``local_moments_batch``.
    """
    index = build_index(index)
    idx, sq = knn_batch(index, x, q)
    return (_dtm_from_sq(sq, q), *_moments(index.points, idx, q))


def local_moments(index: NeighborIndex, x: ArrayLike, q: int) -> LocalMoments:
    index = build_index(index)
    query = index.check_queries(x)
    if query.shape[0] != 1:
        raise ValueError("local_moments expects a single query point")
    bary, var, second = local_moments_batch(index, query, q)
    return LocalMoments(m=bary[0], v=float(var[0]), M=float(second[0]), q=int(q))


def dtm_sq_batch(index: NeighborIndex, x: ArrayLike, q: int) -> NDArray[np.float64]:
    """Squared empirical DTM for each row of ``x``."""
    _, sq = knn_batch(index, x, q)
    return _dtm_from_sq(sq, q)


def dtm_sq(index: NeighborIndex, x: ArrayLike, q: int) -> float:
    index = build_index(index)
    query = index.check_queries(x)
    if query.shape[0] != 1:
        raise ValueError("dtm_sq expects a single query point; use dtm_sq_batch")
    return float(dtm_sq_batch(index, query, q)[0])


def dtm(index: NeighborIndex, x: ArrayLike, q: int) -> NDArray[np.float64]:
    """Empirical DTM (not squared) for each row of ``x``."""
    return np.sqrt(dtm_sq_batch(index, x, q))


def semiconcavity_gap(index: NeighborIndex, x: ArrayLike, y: ArrayLike, q: int) -> float:
    """Slack in the semiconcavity inequality of ``d**2 - |.|**2`` between x and y.

    Returns ``[d2(x) - |x|^2 - 2<y - x, m(x)>] - [d2(y) - |y|^2]``, which is
    nonnegative up to rounding and zero when x and y share a q-NN set.
    """
    index = build_index(index)
    xq = index.check_queries(x)[0]
    yq = index.check_queries(y)[0]
    mom = local_moments(index, xq, q)
    d2x = dtm_sq(index, xq, q)
    d2y = dtm_sq(index, yq, q)
    lhs = d2x - float(xq @ xq) - 2.0 * float((yq - xq) @ mom.m)
    return lhs - (d2y - float(yq @ yq))
