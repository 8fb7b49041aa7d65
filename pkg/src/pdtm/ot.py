"""Exact Wasserstein distances between equal-size uniform point clouds."""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import linear_sum_assignment

from .neighbors import as_cloud, sq_dist_matrix

__all__ = ["MAX_POINTS", "wasserstein1", "wasserstein2"]

MAX_POINTS = 64


def _costs(cloud_a: ArrayLike, cloud_b: ArrayLike):
    a = as_cloud(cloud_a)
    b = as_cloud(cloud_b)
    if a.shape != b.shape:
        raise ValueError(f"clouds must have equal size and dimension, got {a.shape} and {b.shape}")
    if a.shape[0] > MAX_POINTS:
        raise ValueError(f"exact transport is capped at {MAX_POINTS} points, got {a.shape[0]}")
    return sq_dist_matrix(a, b)


def _matching_cost(cost) -> float:
    rows, cols = linear_sum_assignment(cost)
    # exactly rounded sum: independent of pairing order, so W(a, b) == W(b, a)
    return math.fsum(cost[rows, cols].tolist()) / cost.shape[0]


def wasserstein2(cloud_a: ArrayLike, cloud_b: ArrayLike) -> float:
    return float(np.sqrt(_matching_cost(_costs(cloud_a, cloud_b))))


def wasserstein1(cloud_a: ArrayLike, cloud_b: ArrayLike) -> float:
    return _matching_cost(np.sqrt(_costs(cloud_a, cloud_b)))
