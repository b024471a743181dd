"""Point cloud initialization inside the visual hull of the foreground masks."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractViolation, HullTooSmallError
from .scene import RadiancePointCloud
from .train import consistency_mask

DEFAULT_POINTS = 45_000


@dataclass
class SceneBounds:
    min_corner: np.ndarray
    max_corner: np.ndarray

    def __post_init__(self):
        self.min_corner = np.asarray(self.min_corner, dtype=np.float64).reshape(3)
        self.max_corner = np.asarray(self.max_corner, dtype=np.float64).reshape(3)
        if not np.all(self.min_corner < self.max_corner):
            raise ConfigurationError("bounds must satisfy min < max on every axis")

    @property
    def size(self):
        return self.max_corner - self.min_corner

    def contains(self, points):
        points = np.atleast_2d(points)
        return np.all((points >= self.min_corner) & (points <= self.max_corner), axis=-1)

    def corners(self):
        lo, hi = self.min_corner, self.max_corner
        return np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])


def frustum_corners(camera, near, far):
    """World-space corners of the camera frustum between two depths, shape (8, 3)."""
    w, h = camera.width, camera.height
    pix = np.array([[-0.5, -0.5, 1.0], [w - 0.5, -0.5, 1.0],
                    [-0.5, h - 0.5, 1.0], [w - 0.5, h - 0.5, 1.0]])
    rays = pix @ np.linalg.inv(camera.intrinsics).T
    rays = rays / rays[:, 2:3]
    cam = np.concatenate([rays * near, rays * far])
    return (cam - camera.translation) @ camera.rotation


def estimate_bounds(views, near=2.0, far=6.0, fallback=None):
    """Axis-aligned box shared by every camera's frustum between ``near`` and ``far``.

    Each frustum is replaced by its bounding box and the boxes are
    intersected.  ``fallback`` is returned when the boxes do not overlap.
    """
    if not 0 < near < far:
        raise ConfigurationError("need 0 < near < far")
    views = list(views)
    if not views:
        raise ContractViolation("estimate_bounds needs at least one view")
    lo = np.full(3, -np.inf)
    hi = np.full(3, np.inf)
    for view in views:
        cam = getattr(view, "camera", view)
        c = frustum_corners(cam, near, far)
        lo = np.maximum(lo, c.min(axis=0))
        hi = np.minimum(hi, c.max(axis=0))
    if np.all(lo < hi):
        return SceneBounds(lo, hi)
    if fallback is None:
        fallback = SceneBounds([-1.5] * 3, [1.5] * 3)
    return fallback


def visual_hull_sample(views, bounds, target_count=DEFAULT_POINTS, max_attempts=None,
                       seed=0, l_max=2, batch_size=65_536):
    """Rejection-sample points uniformly in ``bounds`` that are foreground in every mask.

    Sampling runs in fixed-size batches, each drawn from its own substream
    of ``seed``, so the result only depends on the seed.  SH coefficients
    are standard normal.
    """
    if target_count < 1:
        raise ConfigurationError("target_count must be >= 1")
    views = list(views)
    if not views:
        raise ContractViolation("visual hull sampling needs at least one view")
    if max_attempts is None:
        max_attempts = 200 * target_count
    accepted = []
    n_accepted = 0
    attempts = 0
    batch_id = 0
    while n_accepted < target_count and attempts < max_attempts:
        size = min(batch_size, max_attempts - attempts)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, batch_id)))
        pts = bounds.min_corner + rng.random((size, 3)) * bounds.size
        keep = consistency_mask(pts, views)
        accepted.append(pts[keep])
        n_accepted += int(keep.sum())
        attempts += size
        batch_id += 1
    if n_accepted < target_count:
        rate = n_accepted / max(attempts, 1)
        raise HullTooSmallError(
            f"visual hull too small: accepted {n_accepted} of {attempts} samples "
            f"(rate {rate:.3g}), needed {target_count}", rate)
    positions = np.concatenate(accepted)[:target_count]
    sh_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    return RadiancePointCloud.random_appearance(positions, l_max, sh_rng)
