"""Empirical k-power-distance-to-measure (k-PDTM) and its Lloyd-style fitter.

A model is given by k anchors ``t_i``. Each anchor induces a center ``c_i``
(barycenter of its q nearest sample points) and a squared weight ``w_i``
(variance of those neighbors); the model evaluates
``min_i |x - c_i|**2 + w_i``. Fitting alternates between power-cell
assignment and moving every anchor to the mean of its cell, which never
increases the empirical loss.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .dtm import local_moments_batch
from .neighbors import NeighborIndex, build_index, sq_dist_matrix
from .rng import make_rng

__all__ = [
    "FitReport",
    "PowerModel",
    "assign_cells",
    "best_restart",
    "empirical_loss",
    "fit",
    "fit_restarts",
    "init_anchors",
    "model_from_anchors",
    "power_matrix",
    "update_anchors",
]

log = logging.getLogger(__name__)

INIT_STRATEGIES = ("uniform", "warm", "explicit")

_BLOCK = 1 << 22


@dataclass(frozen=True, eq=False)
class PowerModel:
    anchors: NDArray[np.float64]
    centers: NDArray[np.float64]
    sq_weights: NDArray[np.float64]
    q: int
    n: int

    def __post_init__(self):
        for name in ("anchors", "centers", "sq_weights"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.centers.ndim != 2 or self.anchors.shape != self.centers.shape:
            raise ValueError("anchors and centers must both have shape (k, d)")
        if self.sq_weights.shape != (self.centers.shape[0],):
            raise ValueError("sq_weights must have shape (k,)")
        if np.any(self.sq_weights < 0):
            raise ValueError("squared weights must be nonnegative")

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    @property
    def d(self) -> int:
        return self.centers.shape[1]

    def __call__(self, x: ArrayLike) -> NDArray[np.float64]:
        """Squared power distance at each row of ``x``."""
        return power_matrix(self, x).min(axis=1)


@dataclass
class FitReport:
    losses: list[float]
    iterations: int
    reseeds: int
    restart_id: int
    seed: int
    converged: bool = False
    reseed_iterations: list[int] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.losses[-1]


def model_from_anchors(index: NeighborIndex, anchors: ArrayLike, q: int) -> PowerModel:
    """Derive centers and squared weights from anchors via their q-NN moments."""
    t = index.check_queries(anchors)
    bary, var, _ = local_moments_batch(index, t, q)
    return PowerModel(anchors=t, centers=bary, sq_weights=np.maximum(var, 0.0), q=int(q), n=index.n)


def _points(x: ArrayLike, d: int) -> NDArray[np.float64]:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr[None, :] if d > 1 or arr.shape[0] == 1 else arr[:, None]
    if arr.ndim != 2 or arr.shape[1] != d:
        raise ValueError(f"dimension mismatch: model has d={d}, got points of shape {np.shape(x)}")
    return arr


def power_matrix(model: PowerModel, x: ArrayLike) -> NDArray[np.float64]:
    """``(m, k)`` matrix of ``|x_j - c_i|**2 + w_i``."""
    pts = _points(x, model.d)
    out = np.empty((pts.shape[0], model.k))
    step = max(1, _BLOCK // model.k)
    for lo in range(0, pts.shape[0], step):
        out[lo : lo + step] = sq_dist_matrix(pts[lo : lo + step], model.centers) + model.sq_weights
    return out


def assign_cells(model: PowerModel, cloud: ArrayLike | NeighborIndex) -> NDArray[np.intp]:
    """Power-cell label of each point; ties go to the smallest center index."""
    pts = cloud.points if isinstance(cloud, NeighborIndex) else cloud
    return np.argmin(power_matrix(model, pts), axis=1)


def empirical_loss(model: PowerModel, cloud: ArrayLike | NeighborIndex) -> float:
    pts = cloud.points if isinstance(cloud, NeighborIndex) else cloud
    return float(np.mean(power_matrix(model, pts).min(axis=1)))


def update_anchors(
    model: PowerModel, cells: ArrayLike, cloud: ArrayLike | NeighborIndex
) -> tuple[PowerModel, int]:
    """Move each anchor to the mean of its cell and rederive centers and weights.

    An anchor whose cell is empty is moved onto the data point where the
    current model is largest (distinct points for several empty cells, ties by
    index). Its new power value there is the DTM, so no point's value
    increases. Returns the new model and the number of reseeded anchors.
    """
    index = build_index(cloud)
    cells = np.asarray(cells, dtype=np.intp)
    if cells.shape != (index.n,):
        raise ValueError(f"expected {index.n} cell labels, got shape {cells.shape}")
    counts = np.bincount(cells, minlength=model.k)
    sums = np.zeros((model.k, model.d))
    np.add.at(sums, cells, index.points)
    anchors = np.array(model.anchors)
    live = counts > 0
    anchors[live] = sums[live] / counts[live, None]
    dead = np.flatnonzero(~live)
    if dead.size:
        current = model(index.points)
        # descending value, ascending index among equals
        order = np.lexsort((np.arange(index.n), -current))
        anchors[dead] = index.points[order[: dead.size]]
    return model_from_anchors(index, anchors, model.q), int(dead.size)


def init_anchors(
    cloud: ArrayLike | NeighborIndex,
    k: int,
    strategy: str = "uniform",
    seed: int = 0,
    *,
    warm: PowerModel | ArrayLike | None = None,
    anchors: ArrayLike | None = None,
    rng: np.random.Generator | None = None,
) -> NDArray[np.float64]:
    """Initial anchors.

    ``uniform`` picks k distinct data points; ``warm`` keeps the anchors of a
    previous model (or array) and pads with distinct data points; ``explicit``
    returns ``anchors`` unchanged.
    """
    index = build_index(cloud)
    k = _check_count("k", k, index.n)
    if rng is None:
        rng = make_rng(seed)
    if strategy == "uniform":
        return index.points[rng.choice(index.n, size=k, replace=False)].copy()
    if strategy == "warm":
        if warm is None:
            raise ValueError("warm strategy needs a previous model or anchor array")
        base = warm.anchors if isinstance(warm, PowerModel) else index.check_queries(warm)
        if base.shape[1] != index.d:
            raise ValueError("warm-start anchors have the wrong dimension")
        if base.shape[0] > k:
            raise ValueError(f"cannot warm-start k={k} from a model with {base.shape[0]} anchors")
        pad = index.points[rng.choice(index.n, size=k - base.shape[0], replace=False)]
        return np.vstack([base, pad])
    if strategy == "explicit":
        if anchors is None:
            raise ValueError("explicit strategy needs an anchor list")
        arr = index.check_queries(anchors)
        if arr.shape[0] != k:
            raise ValueError(f"expected {k} explicit anchors, got {arr.shape[0]}")
        return arr.copy()
    raise ValueError(f"unknown init strategy {strategy!r}; expected one of {INIT_STRATEGIES}")


def _check_count(name: str, value: int, upper: int | None = None, lower: int = 1) -> int:
    if isinstance(value, (bool, np.bool_)) or int(value) != value:
        raise ValueError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < lower or (upper is not None and value > upper):
        bound = f"{lower} <= {name}" + (f" <= {upper}" if upper is not None else "")
        raise ValueError(f"{name} must satisfy {bound}, got {value}")
    return value


def _run(index: NeighborIndex, q: int, anchors: NDArray[np.float64], max_iter: int, restart_id: int, seed: int):
    model = model_from_anchors(index, anchors, q)
    cells = assign_cells(model, index)
    report = FitReport(losses=[empirical_loss(model, index)], iterations=0, reseeds=0, restart_id=restart_id, seed=seed)
    for it in range(max_iter):
        model, reseeded = update_anchors(model, cells, index)
        new_cells = assign_cells(model, index)
        report.losses.append(empirical_loss(model, index))
        report.iterations = it + 1
        if reseeded:
            report.reseeds += reseeded
            report.reseed_iterations.append(it + 1)
        if np.array_equal(new_cells, cells):
            report.converged = True
            break
        cells = new_cells
    log.debug("restart %d: %d iterations, loss %.6g", restart_id, report.iterations, report.final_loss)
    return model, report


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("PDTM_THREADS", "1")))
    except ValueError:
        return 1


def fit_restarts(
    cloud: ArrayLike | NeighborIndex,
    q: int,
    k: int,
    restarts: int = 10,
    max_iter: int = 10,
    seed: int = 0,
    init: str = "uniform",
    *,
    warm: PowerModel | ArrayLike | None = None,
    anchors: ArrayLike | None = None,
) -> list[tuple[PowerModel, FitReport]]:
    """Run every restart and return them in restart order.

    Restart ``r`` draws its initialization from stream ``r`` of ``seed``, so
    results do not depend on execution order or ``PDTM_THREADS``.
    """
    index = build_index(cloud)
    q = index.check_q(q)
    k = _check_count("k", k, index.n)
    restarts = _check_count("restarts", restarts)
    max_iter = _check_count("max_iter", max_iter, lower=0)
    if init not in INIT_STRATEGIES:
        raise ValueError(f"unknown init strategy {init!r}; expected one of {INIT_STRATEGIES}")

    def one(r: int):
        t0 = init_anchors(index, k, init, warm=warm, anchors=anchors, rng=make_rng(seed, r))
        return _run(index, q, t0, max_iter, r, seed)

    workers = min(_workers(), restarts)
    if workers == 1:
        return [one(r) for r in range(restarts)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(restarts)))


def best_restart(results: list[tuple[PowerModel, FitReport]]) -> tuple[PowerModel, FitReport]:
    return min(results, key=lambda mr: (mr[1].final_loss, mr[1].restart_id))


def fit(
    cloud: ArrayLike | NeighborIndex,
    q: int,
    k: int,
    restarts: int = 10,
    max_iter: int = 10,
    seed: int = 0,
    init: str = "uniform",
    *,
    warm: PowerModel | ArrayLike | None = None,
    anchors: ArrayLike | None = None,
) -> tuple[PowerModel, FitReport]:
    """Fit the empirical k-PDTM and keep the restart with the lowest final loss."""
    return best_restart(fit_restarts(cloud, q, k, restarts, max_iter, seed, init, warm=warm, anchors=anchors))
