import math

import numpy as np
import pytest

from pdtm.datagen import ShapeSpec, sample, sideways_centers, support_distance


def test_noiseless_circle_on_support():
    pts = sample(ShapeSpec("circle", 100, radius=1.0, seed=7))
    assert pts.shape == (100, 2)
    assert np.all(np.abs(np.linalg.norm(pts, axis=1) - 1.0) <= 1e-12)


@pytest.mark.parametrize(
    "spec",
    [
        ShapeSpec("circle", 200, radius=2.5, seed=1),
        ShapeSpec("sideways", 500, seed=2),
        ShapeSpec("square", 200, side=3.0, seed=3),
        ShapeSpec("segment", 100, length=4.0, seed=4),
    ],
)
def test_noiseless_samples_have_zero_support_distance(spec):
    assert np.all(support_distance(spec, sample(spec)) <= 1e-12)


def test_sideways_experiment_cloud():
    spec = ShapeSpec("sideways", 6000, noise_sigma=0.45, seed=1)
    pts = sample(spec)
    assert pts.shape == (6000, 2)
    assert spec.radii == (math.sqrt(2), math.sqrt(9 / 8))
    meta = spec.metadata()
    assert meta["centers"] == [[-math.sqrt(2), 0.0], [math.sqrt(9 / 8), 0.0]]
    # both loops are represented in proportion to their length
    left = np.mean(pts[:, 0] < 0)
    assert abs(left - math.sqrt(2) / (math.sqrt(2) + math.sqrt(9 / 8))) < 0.05


def test_determinism():
    spec = ShapeSpec("circle", 300, noise_sigma=0.1, outlier_fraction=0.1, outlier_box=((-3, -3), (3, 3)), seed=11)
    assert np.array_equal(sample(spec), sample(spec))
    other = ShapeSpec("circle", 300, noise_sigma=0.1, seed=12)
    assert not np.array_equal(sample(spec), sample(other))


def test_outliers_replace_fraction():
    base = ShapeSpec("circle", 1000, seed=3)
    spec = ShapeSpec("circle", 1000, outlier_fraction=0.2, outlier_box=((5, 5), (6, 6)), seed=3)
    pts = sample(spec)
    far = np.all((pts >= 5) & (pts <= 6), axis=1)
    assert far.sum() == 200
    assert np.all(support_distance(base, pts[~far]) <= 1e-12)


def test_noise_mean_displacement():
    sigma, n = 0.3, 4000
    clean = sample(ShapeSpec("square", n, side=2.0, seed=5))
    noisy = sample(ShapeSpec("square", n, side=2.0, noise_sigma=sigma, seed=5))
    # same support draws, so the difference is the noise
    shift = (noisy - clean).mean(axis=0)
    assert np.linalg.norm(shift) <= 5 * sigma / math.sqrt(n)


def test_support_distance_examples():
    assert support_distance("circle", [(2.0, 0.0)], radius=1.0).tolist() == [1.0]
    assert support_distance("circle", [(0.0, 0.0)], radius=1.0).tolist() == [1.0]
    assert support_distance("segment", [(3.0, 4.0)], length=2.0).tolist() == [math.hypot(2.0, 4.0)]
    assert support_distance("square", [(0.1, 0.2), (2.0, 0.0)], side=2.0).tolist() == [0.0, 1.0]


def test_sideways_distance_against_dense_sampling(rng):
    spec = ShapeSpec("sideways", 1)
    theta = np.linspace(0, 2 * np.pi, 200000, endpoint=False)
    dense = []
    for (cx, cy), r in zip(sideways_centers(spec.radii), spec.radii):
        dense.append(np.column_stack([cx + r * np.cos(theta), cy + r * np.sin(theta)]))
    dense = np.vstack(dense)
    xs = rng.uniform(-4, 3, size=(40, 2))
    brute = np.sqrt(((xs[:, None, :] - dense[None]) ** 2).sum(-1)).min(axis=1)
    assert np.allclose(support_distance(spec, xs), brute, atol=1e-4)


def test_support_distance_lipschitz(rng):
    xs = rng.uniform(-4, 4, size=(500, 2))
    ys = xs + rng.normal(size=xs.shape)
    for spec in [ShapeSpec("circle", 1), ShapeSpec("sideways", 1), ShapeSpec("square", 1), ShapeSpec("segment", 1)]:
        gap = np.abs(support_distance(spec, xs) - support_distance(spec, ys))
        assert np.all(gap <= np.linalg.norm(xs - ys, axis=1) + 1e-9)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(shape="torus", n=10),
        dict(shape="circle", n=0),
        dict(shape="circle", n=10, noise_sigma=-1),
        dict(shape="circle", n=10, outlier_fraction=1.0),
        dict(shape="circle", n=10, radius=0.0),
        dict(shape="circle", n=10, outlier_fraction=0.1, outlier_box=((1, 1), (0, 2))),
    ],
)
def test_invalid_spec(kwargs):
    with pytest.raises(ValueError):
        ShapeSpec(**kwargs)
