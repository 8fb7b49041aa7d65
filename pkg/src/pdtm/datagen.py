"""Synthetic planar point clouds with known support.

Shapes:

* ``circle``: circle of ``radius`` centered at the origin.
* ``sideways``: two circles of radii ``radii[0]`` and ``radii[1]`` tangent at
  the origin, centered at ``(-radii[0], 0)`` and ``(radii[1], 0)``; sampled
  uniformly with respect to arc length.
* ``square``: filled square of side ``side`` centered at the origin.
* ``segment``: segment of ``length`` on the x-axis centered at the origin.

Gaussian noise is added to every sample; outliers then replace a random
subset of the samples with points drawn uniformly from ``outlier_box``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .rng import make_rng

__all__ = ["SHAPES", "ShapeSpec", "sample", "sideways_centers", "support_distance"]

SHAPES = ("circle", "sideways", "square", "segment")

SIDEWAYS_RADII = (math.sqrt(2.0), math.sqrt(9.0 / 8.0))


@dataclass(frozen=True)
class ShapeSpec:
    shape: str
    n: int
    radius: float = 1.0
    radii: tuple[float, float] = SIDEWAYS_RADII
    side: float = 1.0
    length: float = 1.0
    noise_sigma: float = 0.0
    outlier_fraction: float = 0.0
    outlier_box: tuple[tuple[float, float], tuple[float, float]] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}; expected one of {SHAPES}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not self.noise_sigma >= 0:
            raise ValueError(f"noise_sigma must be nonnegative, got {self.noise_sigma}")
        if not 0 <= self.outlier_fraction < 1:
            raise ValueError(f"outlier_fraction must be in [0, 1), got {self.outlier_fraction}")
        sizes = {"circle": [self.radius], "sideways": list(self.radii), "square": [self.side], "segment": [self.length]}
        if not all(s > 0 and math.isfinite(s) for s in sizes[self.shape]):
            raise ValueError(f"{self.shape} size parameters must be positive")
        if self.outlier_box is not None:
            lo, hi = self.outlier_box
            if len(lo) != 2 or len(hi) != 2 or not all(a < b for a, b in zip(lo, hi)):
                raise ValueError(f"invalid outlier box {self.outlier_box}")

    def metadata(self) -> dict:
        meta = {
            "shape": self.shape,
            "n": self.n,
            "noise_sigma": self.noise_sigma,
            "outlier_fraction": self.outlier_fraction,
            "seed": self.seed,
        }
        if self.shape == "circle":
            meta["radius"] = self.radius
        elif self.shape == "sideways":
            meta["radii"] = list(self.radii)
            meta["centers"] = [list(c) for c in sideways_centers(self.radii)]
        elif self.shape == "square":
            meta["side"] = self.side
        else:
            meta["length"] = self.length
        if self.outlier_box is not None:
            meta["outlier_box"] = [list(c) for c in self.outlier_box]
        return meta


def sideways_centers(radii=SIDEWAYS_RADII) -> tuple[tuple[float, float], tuple[float, float]]:
    return (-float(radii[0]), 0.0), (float(radii[1]), 0.0)


def _support_sample(spec: ShapeSpec, rng: np.random.Generator) -> NDArray[np.float64]:
    n = spec.n
    if spec.shape == "circle":
        theta = rng.uniform(0.0, 2.0 * np.pi, n)
        return spec.radius * np.column_stack([np.cos(theta), np.sin(theta)])
    if spec.shape == "sideways":
        r1, r2 = spec.radii
        second = rng.random(n) < r2 / (r1 + r2)
        theta = rng.uniform(0.0, 2.0 * np.pi, n)
        (x1, _), (x2, _) = sideways_centers(spec.radii)
        radius = np.where(second, r2, r1)
        cx = np.where(second, x2, x1)
        return np.column_stack([cx + radius * np.cos(theta), radius * np.sin(theta)])
    if spec.shape == "square":
        return rng.uniform(-spec.side / 2, spec.side / 2, (n, 2))
    s = rng.uniform(-spec.length / 2, spec.length / 2, n)
    return np.column_stack([s, np.zeros(n)])


def sample(spec: ShapeSpec) -> NDArray[np.float64]:
    """Draw ``spec.n`` points; the same spec always gives the same array."""
    rng = make_rng(spec.seed)
    pts = _support_sample(spec, rng)
    if spec.noise_sigma > 0:
        pts = pts + rng.normal(0.0, spec.noise_sigma, pts.shape)
    n_out = int(math.floor(spec.outlier_fraction * spec.n))
    if n_out:
        if spec.outlier_box is None:
            lo, hi = pts.min(axis=0), pts.max(axis=0)
        else:
            lo, hi = (np.asarray(c, dtype=np.float64) for c in spec.outlier_box)
        which = rng.choice(spec.n, size=n_out, replace=False)
        pts[which] = rng.uniform(lo, hi, (n_out, 2))
    return pts


def _circle_distance(x: NDArray[np.float64], center, radius: float) -> NDArray[np.float64]:
    return np.abs(np.hypot(x[:, 0] - center[0], x[:, 1] - center[1]) - radius)


def support_distance(spec: ShapeSpec | str, x: ArrayLike, **params) -> NDArray[np.float64]:
    """Euclidean distance from each row of ``x`` to the noiseless support."""
    if isinstance(spec, str):
        spec = ShapeSpec(spec, 1, **params)
    pts = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if pts.shape[1] != 2:
        raise ValueError("support distances are defined for planar points only")
    if spec.shape == "circle":
        return _circle_distance(pts, (0.0, 0.0), spec.radius)
    if spec.shape == "sideways":
        c1, c2 = sideways_centers(spec.radii)
        return np.minimum(_circle_distance(pts, c1, spec.radii[0]), _circle_distance(pts, c2, spec.radii[1]))
    if spec.shape == "square":
        excess = np.maximum(np.abs(pts) - spec.side / 2, 0.0)
        return np.hypot(excess[:, 0], excess[:, 1])
    if spec.shape == "segment":
        dx = np.maximum(np.abs(pts[:, 0]) - spec.length / 2, 0.0)
        return np.hypot(dx, pts[:, 1])
    raise ValueError(f"no closed-form support distance for shape {spec.shape!r}")
