import numpy as np
import pytest

from pointrf.errors import ConfigurationError, ContractViolation, DegenerateGeometryError
from pointrf.scene import Camera, RadiancePointCloud, ViewSample, view_direction, view_directions

from conftest import random_rotation


def identity_camera(w=8, h=8):
    return Camera(np.eye(3), np.zeros(3), np.eye(3), w, h)


def test_view_direction_axis():
    np.testing.assert_allclose(view_direction([0, 0, 5.0], identity_camera()), [0, 0, 1])


def test_view_direction_345():
    np.testing.assert_allclose(view_direction([3.0, 0, 4.0], identity_camera()), [0.6, 0, 0.8])


def test_view_direction_matches_scalar_oracle(rng):
    for _ in range(10):
        R = random_rotation(rng)
        t = rng.normal(size=3)
        cam = Camera(R, t, np.eye(3), 4, 4)
        P = rng.normal(size=3) * 3
        X = [sum(R[i, j] * P[j] for j in range(3)) + t[i] for i in range(3)]
        n = (X[0] ** 2 + X[1] ** 2 + X[2] ** 2) ** 0.5
        np.testing.assert_allclose(view_direction(P, cam), [x / n for x in X], atol=1e-12)


def test_view_direction_at_camera_center():
    cam = Camera(np.eye(3), [1.0, 2.0, 3.0], np.eye(3), 4, 4)
    with pytest.raises(DegenerateGeometryError):
        view_direction([-1.0, -2.0, -3.0], cam)


def test_view_directions_are_unit(rng):
    d = view_directions(rng.normal(size=(50, 3)) + [0, 0, 5], identity_camera())
    np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0)


def test_cloud_validation():
    with pytest.raises(ContractViolation):
        RadiancePointCloud(np.zeros((0, 3)), np.zeros((0, 3, 9)))
    with pytest.raises(ContractViolation):
        RadiancePointCloud(np.zeros((2, 3)), np.zeros((2, 3, 4)), 2)
    with pytest.raises(ContractViolation):
        RadiancePointCloud(np.zeros((2, 3)), np.zeros((3, 3, 9)), 2)
    with pytest.raises(ConfigurationError):
        RadiancePointCloud(np.zeros((1, 3)), np.zeros((1, 3, 36)), 5)


def test_random_appearance_is_standard_normal():
    cloud = RadiancePointCloud.random_appearance(np.zeros((4000, 3)), 2, 0)
    assert cloud.sh_coeffs.shape == (4000, 3, 9)
    assert abs(cloud.sh_coeffs.mean()) < 0.02
    assert abs(cloud.sh_coeffs.std() - 1.0) < 0.02


def test_subset_and_copy_are_independent(rng):
    cloud = RadiancePointCloud.random_appearance(rng.normal(size=(5, 3)), 1, rng)
    c = cloud.copy()
    c.positions[0] = 99
    assert cloud.positions[0, 0] != 99
    s = cloud.subset([1, 3])
    assert len(s) == 2 and np.all(s.positions == cloud.positions[[1, 3]])


def test_camera_validation():
    with pytest.raises(ContractViolation):
        Camera(np.eye(3) * 2, np.zeros(3), np.eye(3), 4, 4)
    K = np.eye(3)
    K[2, 2] = 2
    with pytest.raises(ContractViolation):
        Camera(np.eye(3), np.zeros(3), K, 4, 4)
    with pytest.raises(ContractViolation):
        Camera(np.eye(3), np.zeros(3), np.eye(3), 0, 4)


def test_look_at_centers_target():
    cam = Camera.look_at([4.0, 1.0, 2.0], [0.0, 0.5, 0.0], 32, 24, np.deg2rad(40))
    hom = cam.intrinsics @ cam.to_camera([0.0, 0.5, 0.0])
    np.testing.assert_allclose(hom[:2] / hom[2], [16, 12], atol=1e-9)
    np.testing.assert_allclose(cam.center, [4.0, 1.0, 2.0], atol=1e-12)
    # world up projects upwards in the image (smaller row index)
    above = cam.intrinsics @ cam.to_camera([0.0, 0.5, 0.5])
    assert above[1] / above[2] < 12


def test_scaled_camera_maps_pixel_centres():
    cam = Camera.look_at([3.0, 0, 1.0], [0, 0, 0], 10, 10, 0.8)
    big = cam.scaled(2)
    p = np.array([0.2, -0.1, 0.3])
    a = cam.intrinsics @ cam.to_camera(p)
    b = big.intrinsics @ big.to_camera(p)
    np.testing.assert_allclose(b[:2] / b[2], 2 * a[:2] / a[2])


def test_view_sample_shape_checks():
    cam = identity_camera(4, 3)
    ViewSample(cam, np.zeros((3, 4, 3)), np.ones((3, 4)))
    with pytest.raises(ContractViolation):
        ViewSample(cam, np.zeros((4, 3, 3)), np.ones((3, 4)))
