"""Scalar-field evaluation of power models and the DTM on points and grids."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .dtm import dtm_sq_batch
from .kpdtm import PowerModel
from .neighbors import NeighborIndex, build_index

__all__ = [
    "Comparison",
    "Field",
    "Grid",
    "compare_fields",
    "dtm_field",
    "eval_grid",
    "eval_power_sq",
    "grid_centers",
    "sublevel_mask",
]

# A field maps an (m, d) array of points to (m,) squared values.
Field = Callable[[NDArray[np.float64]], NDArray[np.float64]]


def eval_power_sq(model: PowerModel, x: ArrayLike) -> float | NDArray[np.float64]:
    """Squared power distance: a float for a single point, an array for a batch."""
    arr = np.asarray(x, dtype=np.float64)
    values = model(arr)
    single = arr.ndim == 0 or (arr.ndim == 1 and (model.d > 1 or arr.shape[0] == 1))
    return float(values[0]) if single else values


def dtm_field(cloud: ArrayLike | NeighborIndex, q: int) -> Field:
    index = build_index(cloud)
    index.check_q(q)
    return lambda pts: dtm_sq_batch(index, pts, q)


@dataclass(frozen=True)
class Grid:
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    resolution: tuple[int, ...]
    values: NDArray[np.float64]

    def __post_init__(self):
        _check_box(self.lower, self.upper, self.resolution)
        if self.values.shape != (int(np.prod(self.resolution)),):
            raise ValueError("grid values must be a flat array with one entry per cell")

    def centers(self) -> NDArray[np.float64]:
        return grid_centers(self.lower, self.upper, self.resolution)


def _check_box(lower, upper, resolution) -> None:
    if not (len(lower) == len(upper) == len(resolution)) or len(lower) == 0:
        raise ValueError("lower, upper and resolution must have the same positive length")
    if not all(np.isfinite(lo) and np.isfinite(hi) and lo < hi for lo, hi in zip(lower, upper)):
        raise ValueError(f"invalid box: need lower < upper componentwise, got {lower} and {upper}")
    if not all(int(r) == r and r >= 1 for r in resolution):
        raise ValueError(f"resolution must be a positive integer per axis, got {resolution}")


def grid_centers(lower, upper, resolution) -> NDArray[np.float64]:
    """Cell centers in row-major order: the first axis varies slowest."""
    _check_box(lower, upper, resolution)
    axes = [
        lo + (np.arange(int(r)) + 0.5) * ((hi - lo) / int(r))
        for lo, hi, r in zip(lower, upper, resolution)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def eval_grid(field: Field | PowerModel, lower, upper, resolution) -> Grid:
    lower = tuple(float(v) for v in lower)
    upper = tuple(float(v) for v in upper)
    resolution = tuple(int(r) for r in resolution)
    pts = grid_centers(lower, upper, resolution)
    values = np.asarray(field(pts), dtype=np.float64)
    return Grid(lower, upper, resolution, values)


def sublevel_mask(grid: Grid, r: float) -> NDArray[np.bool_]:
    """Cells whose distance value is at most ``r`` (compared in squared units)."""
    if not r >= 0:
        raise ValueError(f"sublevel radius must be nonnegative, got {r}")
    return grid.values <= r * r


@dataclass(frozen=True)
class Comparison:
    l1_mean: float
    max_gap: float
    dominance_violations: int


def compare_fields(field_a: Field, field_b: Field, points: ArrayLike, tol: float = 1e-9) -> Comparison:
    """Compare two squared fields over ``points``.

    ``l1_mean`` is the mean of ``|a - b|``, ``max_gap`` its maximum, and
    ``dominance_violations`` counts points where ``a < b - tol``.
    """
    pts = np.asarray(points, dtype=np.float64)
    a = np.asarray(field_a(pts))
    b = np.asarray(field_b(pts))
    gap = np.abs(a - b)
    return Comparison(
        l1_mean=float(gap.mean()),
        max_gap=float(gap.max()),
        dominance_violations=int(np.count_nonzero(a < b - tol)),
    )
