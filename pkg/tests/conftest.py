import numpy as np
import pytest

from pointrf.scene import Camera, RadiancePointCloud


def unit_vectors(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def small_scene(seed, n_points=20, size=8, l_max=1, spread=0.6):
    rng = np.random.default_rng(seed)
    cloud = RadiancePointCloud.random_appearance(rng.uniform(-spread, spread, (n_points, 3)),
                                                 l_max, rng)
    eye = rng.normal(size=3)
    eye = 3.5 * eye / np.linalg.norm(eye)
    camera = Camera.look_at(eye, (0.0, 0.0, 0.0), size, size, np.deg2rad(50.0))
    return cloud, camera


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
