"""Finite-difference verification of the renderer's analytic gradients."""

from dataclasses import dataclass

import numpy as np

from .render import RasterConfig, rasterize, render_gradients
from .scene import Camera, RadiancePointCloud

# Configurations the gradient check must pass on.
DEFAULT_CONFIGS = (
    RasterConfig(radius=0.2, points_per_pixel=15),
    RasterConfig(radius=0.1, points_per_pixel=4),
    RasterConfig(radius=0.25, points_per_pixel=8, cutoff_multiplier=2.0, background=(1.0, 1.0, 1.0)),
    RasterConfig(radius=0.15, points_per_pixel=6, cutoff_multiplier=4.0, alpha_ceiling=0.95,
                 background=(0.2, 0.4, 0.6)),
    RasterConfig(),
)


@dataclass
class GradcheckReport:
    config: RasterConfig
    max_rel_position: float
    max_rel_sh: float
    checked_position: int
    skipped_position: int
    checked_sh: int
    tolerance: float

    @property
    def passed(self):
        return self.max_rel_position <= self.tolerance and self.max_rel_sh <= self.tolerance

    def summary(self):
        c = self.config
        return (f"radius={c.radius} ppp={c.points_per_pixel} cutoff={c.cutoff_multiplier} "
                f"ceiling={c.alpha_ceiling} pos_rel={self.max_rel_position:.2e} "
                f"(checked {self.checked_position}, masked {self.skipped_position}) "
                f"sh_rel={self.max_rel_sh:.2e} (checked {self.checked_sh}) "
                f"{'PASS' if self.passed else 'FAIL'}")


def random_scene(seed=0, n_points=30, size=12, l_max=2):
    rng = np.random.default_rng(seed)
    cloud = RadiancePointCloud.random_appearance(rng.uniform(-1.0, 1.0, (n_points, 3)), l_max, rng)
    eye = rng.normal(size=3)
    eye = 4.0 * eye / np.linalg.norm(eye)
    camera = Camera.look_at(eye, (0.0, 0.0, 0.0), size, size, np.deg2rad(45.0))
    upstream = rng.normal(size=(size, size, 3))
    return cloud, camera, upstream


def relative_error(analytic, numeric, floor=1e-6):
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def _structure(cloud, camera, config):
    b = rasterize(cloud, camera, config)
    return b.index.tobytes() + b.clamped.tobytes()


def check_gradients(cloud, camera, upstream, config, h=1e-4, tolerance=1e-3):
    """Compare analytic gradients of ``sum(rgb * upstream)`` with central differences.

    Position coordinates whose perturbation by up to 2h changes the contributor
    sets, their order or the clamp state are excluded.
    """
    def objective(c):
        return float(np.sum(rasterize(c, camera, config).rgb * upstream))

    buffers = rasterize(cloud, camera, config)
    g_pos, g_sh = render_gradients(cloud, buffers, upstream)
    base = _structure(cloud, camera, config)

    worst_pos, checked, skipped = 0.0, 0, 0
    for i in range(len(cloud)):
        for d in range(3):
            shifted = {}
            for k in (-2, -1, 1, 2):
                c = cloud.copy()
                c.positions[i, d] += k * h
                shifted[k] = c
            if any(_structure(c, camera, config) != base for c in shifted.values()):
                skipped += 1
                continue
            fd = (objective(shifted[1]) - objective(shifted[-1])) / (2 * h)
            worst_pos = max(worst_pos, relative_error(g_pos[i, d], fd))
            checked += 1

    worst_sh, checked_sh = 0.0, 0
    for idx in np.ndindex(cloud.sh_coeffs.shape):
        plus, minus = cloud.copy(), cloud.copy()
        plus.sh_coeffs[idx] += h
        minus.sh_coeffs[idx] -= h
        fd = (objective(plus) - objective(minus)) / (2 * h)
        worst_sh = max(worst_sh, relative_error(g_sh[idx], fd))
        checked_sh += 1
    return GradcheckReport(config, worst_pos, worst_sh, checked, skipped, checked_sh, tolerance)


def run_suite(seed=0, configs=DEFAULT_CONFIGS, n_points=30, size=12):
    cloud, camera, upstream = random_scene(seed, n_points, size)
    return [check_gradients(cloud, camera, upstream, cfg) for cfg in configs]
