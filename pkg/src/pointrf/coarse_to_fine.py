"""Hybrid coarse-to-fine restructuring of a trained point cloud.

One round merges points per voxel, drops points whose neighbor distances
are too spread out, adds one interpolated point per survivor and then
retrains with a reduced learning rate and a fresh optimizer.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigurationError
from .scene import RadiancePointCloud
from .train import Trainer


@dataclass
class C2FConfig:
    voxel_grid: int = 128
    knn: int = 10
    outlier_threshold: object = "auto"
    rounds: int = 2
    refine_lr_scale: float = 0.5
    refine_epochs: int = None   # None: same as the training config
    auto_factor: float = 2.0

    def __post_init__(self):
        if self.voxel_grid < 2 or self.knn < 2 or self.rounds < 0:
            raise ConfigurationError("need voxel_grid >= 2, knn >= 2, rounds >= 0")
        if self.outlier_threshold != "auto":
            self.outlier_threshold = float(self.outlier_threshold)


def voxel_keys(positions, bounds, n):
    rel = (positions - bounds.min_corner) / bounds.size
    cell = np.clip(np.floor(rel * n).astype(np.int64), 0, n - 1)
    return (cell[:, 0] * n + cell[:, 1]) * n + cell[:, 2]


def voxel_reduce(cloud, bounds, n):
    """Average position and coefficients of all points sharing a voxel of an n^3 grid."""
    keys = voxel_keys(cloud.positions, bounds, n)
    uniq, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
    flat = np.concatenate([cloud.positions, cloud.sh_coeffs.reshape(len(cloud), -1)], axis=1)
    sums = np.zeros((len(uniq), flat.shape[1]))
    np.add.at(sums, inverse, flat)
    means = sums / counts[:, None]
    return RadiancePointCloud(means[:, :3], means[:, 3:].reshape(len(uniq), 3, -1), cloud.l_max)


def _check_size(cloud, k):
    if len(cloud) < k + 1:
        raise ConfigurationError(f"need at least {k + 1} points for k={k}, got {len(cloud)}")


def neighbor_spread(positions, k):
    """Standard deviation of each point's distances to its k nearest other points."""
    dist, _ = cKDTree(positions).query(positions, k=k + 1)
    return np.std(dist[:, 1:], axis=1)


def resolve_threshold(spread, threshold, auto_factor=2.0):
    if threshold == "auto":
        return auto_factor * float(np.median(spread))
    return float(threshold)


def outlier_removal(cloud, k, threshold="auto", auto_factor=2.0):
    """Remove points whose neighbor-distance spread exceeds the threshold.

    All spreads are measured on the input cloud; removal happens once.
    """
    _check_size(cloud, k)
    spread = neighbor_spread(cloud.positions, k)
    eps = resolve_threshold(spread, threshold, auto_factor)
    return cloud.subset(np.flatnonzero(spread <= eps))


def knn_indices(positions, k):
    """Indices of each point's k nearest other points, shape (n, k)."""
    n = len(positions)
    _, idx = cKDTree(positions).query(positions, k=k + 1)
    idx = idx.reshape(n, k + 1)
    keep = idx != np.arange(n)[:, None]
    # rows where a duplicate hid the point itself: drop the farthest instead
    no_self = keep.all(axis=1)
    keep[no_self, k] = False
    return idx[keep].reshape(n, k)


def point_generation(cloud, k):
    """Append, for every point, the average of its k nearest neighbors (all attributes)."""
    _check_size(cloud, k)
    nb = knn_indices(cloud.positions, k)
    new_pos = cloud.positions[nb].mean(axis=1)
    new_sh = cloud.sh_coeffs[nb].mean(axis=1)
    return RadiancePointCloud(np.concatenate([cloud.positions, new_pos]),
                              np.concatenate([cloud.sh_coeffs, new_sh]), cloud.l_max)


def restructure(cloud, bounds, config):
    """Reduce, remove outliers, generate.  Returns the new cloud and stage point counts."""
    counts = {"input": len(cloud)}
    cloud = voxel_reduce(cloud, bounds, config.voxel_grid)
    counts["reduced"] = len(cloud)
    cloud = outlier_removal(cloud, config.knn, config.outlier_threshold, config.auto_factor)
    counts["filtered"] = len(cloud)
    cloud = point_generation(cloud, config.knn)
    counts["generated"] = len(cloud)
    return cloud, counts


def c2f_round(cloud, bounds, config, views, train_config, raster_config, sink=None):
    """One restructuring pass followed by retraining at the reduced learning rate."""
    cloud, counts = restructure(cloud, bounds, config)
    if sink is not None:
        sink(" ".join(f"{k}={v}" for k, v in {"stage": "c2f", **counts}.items()))
    trainer = Trainer(cloud, views, train_config, raster_config,
                      lr_scale=config.refine_lr_scale, sink=sink)
    stats = trainer.fit(config.refine_epochs)
    return trainer.cloud, counts, stats
