import numpy as np
import pytest
from scipy.stats import chisquare

from pointrf.errors import ConfigurationError, HullTooSmallError
from pointrf.hull import SceneBounds, estimate_bounds, frustum_corners, visual_hull_sample
from pointrf.scene import ViewSample
from pointrf.synthetic import ring_cameras, sphere_cameras, sphere_views
from pointrf.train import consistency_filter


def full_views(n=4, size=16):
    cams = ring_cameras(n, width=size, height=size)
    return [ViewSample(c, np.zeros((size, size, 3)), np.ones((size, size), bool)) for c in cams]


def test_bounds_validation():
    with pytest.raises(ConfigurationError):
        SceneBounds([0, 0, 0], [1, 0, 1])


def test_ring_bounds_contain_origin():
    b = estimate_bounds(full_views(8), far=6.0)
    assert b.contains([0, 0, 0])[0]


def test_single_camera_bounds_are_frustum_box():
    view = full_views(1)[0]
    b = estimate_bounds([view], near=2.0, far=6.0)
    c = frustum_corners(view.camera, 2.0, 6.0)
    np.testing.assert_allclose(b.min_corner, c.min(axis=0))
    np.testing.assert_allclose(b.max_corner, c.max(axis=0))
    depth = view.camera.to_camera(c)[:, 2]
    np.testing.assert_allclose(sorted(depth), [2] * 4 + [6] * 4)


def test_bounds_fallback_when_frusta_disjoint():
    from pointrf.scene import Camera
    a = Camera.look_at([0, 0, 0], [1, 0, 0], 8, 8, 0.3)
    b = Camera.look_at([0, 0, 0], [-1, 0, 0], 8, 8, 0.3)
    fb = SceneBounds([-2] * 3, [2] * 3)
    assert estimate_bounds([a, b], fallback=fb) is fb


def test_sphere_camera_bounds_cover_object():
    views = sphere_views(sphere_cameras(12, width=32, height=32))
    b = estimate_bounds(views)
    rng = np.random.default_rng(0)
    d = rng.normal(size=(500, 3))
    assert b.contains(d / np.linalg.norm(d, axis=1, keepdims=True)).all()


def test_full_masks_sample_uniformly():
    views = full_views(4, 16)
    bounds = SceneBounds([-0.5] * 3, [0.5] * 3)
    cloud = visual_hull_sample(views, bounds, 4000, seed=1)
    assert len(cloud) == 4000
    assert bounds.contains(cloud.positions).all()
    octant = ((cloud.positions > 0) * [1, 2, 4]).sum(axis=1)
    assert chisquare(np.bincount(octant, minlength=8)).pvalue > 0.01


def test_empty_mask_raises_with_rate():
    views = full_views(3)
    views[1] = ViewSample(views[1].camera, views[1].image, np.zeros_like(views[1].mask))
    with pytest.raises(HullTooSmallError) as exc:
        visual_hull_sample(views, SceneBounds([-1] * 3, [1] * 3), 10, max_attempts=5000)
    assert exc.value.acceptance_rate == 0.0


def test_sphere_hull_is_tight():
    views = sphere_views(sphere_cameras(30, width=64, height=64))
    cloud = visual_hull_sample(views, estimate_bounds(views), 3000, seed=0)
    r = np.linalg.norm(cloud.positions, axis=1)
    assert np.mean(r <= 1.05) >= 0.99


def test_every_sample_passes_consistency_filter():
    views = sphere_views(ring_cameras(10, width=32, height=32))
    cloud = visual_hull_sample(views, estimate_bounds(views), 500, seed=4)
    assert len(consistency_filter(cloud, views)) == 500


def test_deterministic_and_order_invariant():
    views = sphere_views(ring_cameras(8, width=24, height=24))
    b = estimate_bounds(views)
    a = visual_hull_sample(views, b, 300, seed=2, batch_size=1000)
    c = visual_hull_sample(views[::-1], b, 300, seed=2, batch_size=1000)
    assert np.array_equal(a.positions, c.positions)
    assert np.array_equal(a.sh_coeffs, c.sh_coeffs)
    d = visual_hull_sample(views, b, 300, seed=3, batch_size=1000)
    assert not np.array_equal(a.positions, d.positions)


def test_default_count_and_normal_coefficients():
    from pointrf.hull import DEFAULT_POINTS
    assert DEFAULT_POINTS == 45_000
    views = full_views(2)
    cloud = visual_hull_sample(views, SceneBounds([-0.3] * 3, [0.3] * 3), seed=0)
    assert len(cloud) == 45_000
    assert abs(cloud.sh_coeffs.std() - 1) < 0.01


def test_bad_target_count():
    with pytest.raises(ConfigurationError):
        visual_hull_sample(full_views(1), SceneBounds([-1] * 3, [1] * 3), 0)
