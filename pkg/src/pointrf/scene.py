"""Point cloud, camera and view containers plus the per-point color model."""

from dataclasses import dataclass

import numpy as np

from . import sh
from .errors import ContractViolation, DegenerateGeometryError


@dataclass
class RadiancePointCloud:
    """Learnable point positions with per-point RGB spherical-harmonic coefficients.

    ``positions`` is (n, 3) and ``sh_coeffs`` is (n, 3, (l_max+1)**2).
    """

    positions: np.ndarray
    sh_coeffs: np.ndarray
    l_max: int = 2

    def __post_init__(self):
        sh.check_degree(self.l_max)
        self.positions = np.asarray(self.positions, dtype=np.float64)
        self.sh_coeffs = np.asarray(self.sh_coeffs, dtype=np.float64)
        n = self.positions.shape[0]
        if self.positions.ndim != 2 or self.positions.shape[1] != 3:
            raise ContractViolation(f"positions must be (n, 3), got {self.positions.shape}")
        if n < 1:
            raise ContractViolation("a point cloud needs at least one point")
        expected = (n, 3, sh.num_coeffs(self.l_max))
        if self.sh_coeffs.shape != expected:
            raise ContractViolation(f"sh_coeffs must be {expected}, got {self.sh_coeffs.shape}")

    def __len__(self):
        return self.positions.shape[0]

    @classmethod
    def random_appearance(cls, positions, l_max=2, rng=None):
        """Attach standard-normal SH coefficients to the given positions."""
        rng = np.random.default_rng(rng)
        positions = np.asarray(positions, dtype=np.float64)
        coeffs = rng.standard_normal((len(positions), 3, sh.num_coeffs(l_max)))
        return cls(positions, coeffs, l_max)

    def subset(self, index):
        return RadiancePointCloud(self.positions[index], self.sh_coeffs[index], self.l_max)

    def copy(self):
        return RadiancePointCloud(self.positions.copy(), self.sh_coeffs.copy(), self.l_max)

    def is_finite(self):
        return bool(np.isfinite(self.positions).all() and np.isfinite(self.sh_coeffs).all())


@dataclass
class Camera:
    """Pinhole camera mapping world points to pixels via ``K (R X + t)``.

    Camera space looks down +z with y pointing down the image; pixel
    centers sit at integer coordinates.
    """

    rotation: np.ndarray
    translation: np.ndarray
    intrinsics: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        self.intrinsics = np.asarray(self.intrinsics, dtype=np.float64).reshape(3, 3)
        if self.width < 1 or self.height < 1:
            raise ContractViolation("image dimensions must be positive")
        if np.abs(self.rotation.T @ self.rotation - np.eye(3)).max() > 1e-5:
            raise ContractViolation("rotation is not orthonormal")
        K = self.intrinsics
        if abs(K[2, 2] - 1.0) > 1e-12 or K[0, 0] <= 0 or K[1, 1] <= 0:
            raise ContractViolation("intrinsics must have K[2,2] = 1 and positive focal lengths")

    @classmethod
    def from_fov(cls, rotation, translation, width, height, fov_x):
        focal = 0.5 * width / np.tan(0.5 * fov_x)
        K = np.array([[focal, 0.0, width / 2.0], [0.0, focal, height / 2.0], [0.0, 0.0, 1.0]])
        return cls(rotation, translation, K, width, height)

    @classmethod
    def look_at(cls, eye, target, width, height, fov_x, up=(0.0, 0.0, 1.0)):
        """Camera at ``eye`` looking at ``target`` with world ``up`` roughly image-up."""
        eye = np.asarray(eye, dtype=np.float64)
        forward = np.asarray(target, dtype=np.float64) - eye
        forward /= np.linalg.norm(forward)
        up = np.asarray(up, dtype=np.float64)
        if abs(np.dot(forward, up)) > 0.999:
            up = np.array([0.0, 1.0, 0.0]) if abs(forward[1]) < 0.9 else np.array([1.0, 0.0, 0.0])
        right = np.cross(forward, up)
        right /= np.linalg.norm(right)
        down = np.cross(forward, right)
        R = np.stack([right, down, forward])
        return cls.from_fov(R, -R @ eye, width, height, fov_x)

    @property
    def center(self):
        return -self.rotation.T @ self.translation

    def to_camera(self, points):
        return np.asarray(points, dtype=np.float64) @ self.rotation.T + self.translation

    def scaled(self, factor):
        """Same pose with the image resolution multiplied by an integer factor."""
        K = self.intrinsics.copy()
        K[:2] *= factor
        return Camera(self.rotation, self.translation, K, self.width * factor, self.height * factor)


@dataclass
class ViewSample:
    camera: Camera
    image: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.image = np.asarray(self.image, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=bool)
        shape = (self.camera.height, self.camera.width)
        if self.image.shape != shape + (3,) or self.mask.shape != shape:
            raise ContractViolation(
                f"image {self.image.shape} / mask {self.mask.shape} do not match camera {shape}")


def view_directions(positions, camera):
    """Unit vectors from the camera center to each point, in camera coordinates."""
    X = camera.to_camera(positions)
    norm = np.linalg.norm(X, axis=-1, keepdims=True)
    if np.any(norm <= 1e-8):
        raise DegenerateGeometryError("point coincides with the camera center")
    return X / norm


def view_direction(point, camera):
    return view_directions(np.asarray(point, dtype=np.float64)[None], camera)[0]


def point_colors(cloud, directions):
    """Colors of every point for per-point unit directions of shape (n, 3)."""
    basis = sh.sh_basis(directions, cloud.l_max)
    return sh.eval_colors(cloud.sh_coeffs, basis)


def point_color(cloud, index, direction):
    if not 0 <= index < len(cloud):
        raise IndexError(f"point index {index} out of range for {len(cloud)} points")
    basis = sh.sh_basis(direction, cloud.l_max)
    return cloud.sh_coeffs[index] @ basis
