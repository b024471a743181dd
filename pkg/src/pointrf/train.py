"""Photometric loss, the mask consistency filter and the per-epoch training loop."""

import logging
from dataclasses import dataclass, asdict

import numpy as np

from .errors import ConfigurationError, ContractViolation, TrainingCollapseError
from .metrics import psnr
from .optim import Adam
from .render import rasterize, render_gradients

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    lr_sh: float = 3e-3
    lr_pos: float = 8e-4
    decay: float = 0.93
    epochs: int = 20
    tv_weight: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    batch: int = 1
    seed: int = 0
    train_positions: bool = True
    filter_each_epoch: bool = True

    def __post_init__(self):
        if self.lr_sh <= 0 or self.lr_pos <= 0:
            raise ConfigurationError("learning rates must be positive")
        if not 0 < self.decay <= 1:
            raise ConfigurationError("decay must lie in (0, 1]")
        if self.batch < 1 or self.epochs < 0:
            raise ConfigurationError("batch must be >= 1 and epochs >= 0")


def loss(rendered, target, tv_weight):
    """Mean squared error plus anisotropic total variation of the rendering.

    Returns ``(value, dvalue/drendered)``.  The TV subgradient at a zero
    difference is taken as zero.
    """
    rendered = np.asarray(rendered, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if rendered.shape != target.shape:
        raise ContractViolation(f"shape mismatch: {rendered.shape} vs {target.shape}")
    diff = rendered - target
    value = float(np.mean(diff * diff))
    grad = 2.0 * diff / diff.size
    if tv_weight:
        dx = rendered[:, 1:] - rendered[:, :-1]
        dy = rendered[1:, :] - rendered[:-1, :]
        tv = 0.0
        if dx.size:
            tv += np.mean(np.abs(dx))
            sx = np.sign(dx) / dx.size
            grad[:, 1:] += tv_weight * sx
            grad[:, :-1] -= tv_weight * sx
        if dy.size:
            tv += np.mean(np.abs(dy))
            sy = np.sign(dy) / dy.size
            grad[1:, :] += tv_weight * sy
            grad[:-1, :] -= tv_weight * sy
        value += tv_weight * float(tv)
    return value, grad


def mask_lookup(positions, camera, mask):
    """Foreground test of each point's projection in one view.

    Projections land on the nearest pixel center; anything behind the
    camera or outside the image counts as background.
    """
    X = camera.to_camera(positions)
    hom = X @ camera.intrinsics.T
    front = X[:, 2] > 0
    w = np.where(front, hom[:, 2], 1.0)
    with np.errstate(invalid="ignore"):
        ii = np.floor(hom[:, 0] / w + 0.5)
        jj = np.floor(hom[:, 1] / w + 0.5)
        ok = front & (ii >= 0) & (ii < camera.width) & (jj >= 0) & (jj < camera.height)
    out = np.zeros(len(positions), dtype=bool)
    out[ok] = mask[jj[ok].astype(np.int64), ii[ok].astype(np.int64)]
    return out


def consistency_mask(positions, views):
    keep = np.ones(len(positions), dtype=bool)
    for view in views:
        idx = np.flatnonzero(keep)
        if idx.size == 0:
            break
        keep[idx] = mask_lookup(positions[idx], view.camera, view.mask)
    return keep


def consistency_filter(cloud, views):
    """Indices of points whose projection is foreground in every view."""
    return np.flatnonzero(consistency_mask(cloud.positions, views))


def dataset_loss(cloud, views, raster_config, tv_weight=0.0):
    """Mean training loss of a fixed cloud over all views (no parameter updates)."""
    values = [loss(rasterize(cloud, v.camera, raster_config).rgb, v.image, tv_weight)[0]
              for v in views]
    return float(np.mean(values))


def format_record(record):
    parts = []
    for key, value in record.items():
        if isinstance(value, float):
            value = f"{value:.6g}"
        parts.append(f"{key}={value}")
    return " ".join(parts)


@dataclass
class EpochStats:
    epoch: int
    loss: float
    psnr: float
    n_points: int
    lr_sh: float
    lr_pos: float
    steps: int

    def as_record(self):
        return format_record(asdict(self))


class Trainer:
    """Optimizes a point cloud against a list of views.

    Learning rates follow ``lr0 * lr_scale * decay**epoch``.  After each epoch
    the consistency filter drops points (and their optimizer rows).
    """

    def __init__(self, cloud, views, config=None, raster_config=None, lr_scale=1.0, sink=None):
        from .render import RasterConfig

        if not views:
            raise ContractViolation("training needs at least one view")
        self.cloud = cloud
        self.views = list(views)
        self.config = config or TrainConfig()
        self.raster_config = raster_config or RasterConfig()
        self.lr_scale = lr_scale
        self.sink = sink
        self.epoch = 0
        self.steps = 0
        c = self.config
        self.optimizer = Adam({"sh": self.lr_sh, "pos": self.lr_pos},
                              c.adam_beta1, c.adam_beta2, c.adam_eps)

    @property
    def lr_sh(self):
        return self.config.lr_sh * self.lr_scale * self.config.decay ** self.epoch

    @property
    def lr_pos(self):
        return self.config.lr_pos * self.lr_scale * self.config.decay ** self.epoch

    def step(self, views):
        """One optimizer step over a batch of views; returns (mean loss, mean psnr)."""
        c = self.config
        cloud = self.cloud
        g_pos = np.zeros_like(cloud.positions)
        g_sh = np.zeros_like(cloud.sh_coeffs)
        losses, scores = [], []
        for view in views:
            buffers = rasterize(cloud, view.camera, self.raster_config)
            value, upstream = loss(buffers.rgb, view.image, c.tv_weight)
            gp, gs = render_gradients(cloud, buffers, upstream, positions=c.train_positions)
            g_sh += gs
            if c.train_positions:
                g_pos += gp
            losses.append(value)
            scores.append(psnr(np.clip(buffers.rgb, 0.0, 1.0), view.image))
        k = len(views)
        params = {"sh": cloud.sh_coeffs, "pos": cloud.positions}
        grads = {"sh": g_sh / k}
        if c.train_positions:
            grads["pos"] = g_pos / k
        self.optimizer.lrs = {"sh": self.lr_sh, "pos": self.lr_pos}
        self.optimizer.step(params, grads)
        self.steps += 1
        return float(np.mean(losses)), float(np.mean(scores))

    def apply_filter(self):
        keep = consistency_filter(self.cloud, self.views)
        if keep.size == 0:
            raise TrainingCollapseError(
                f"consistency filter removed all {len(self.cloud)} points after epoch {self.epoch}; "
                "check camera poses and masks")
        if keep.size < len(self.cloud):
            self.cloud.positions = self.cloud.positions[keep]
            self.cloud.sh_coeffs = self.cloud.sh_coeffs[keep]
            self.optimizer.keep_rows(keep)
        return keep

    def train_epoch(self):
        c = self.config
        rng = np.random.default_rng([c.seed, self.epoch])
        order = rng.permutation(len(self.views))
        lr_sh, lr_pos = self.lr_sh, self.lr_pos
        losses, scores = [], []
        for start in range(0, len(order), c.batch):
            batch = [self.views[i] for i in order[start:start + c.batch]]
            value, score = self.step(batch)
            losses.append(value)
            scores.append(score)
        if not self.cloud.is_finite():
            raise TrainingCollapseError(f"non-finite parameters after epoch {self.epoch}")
        if c.filter_each_epoch:
            self.apply_filter()
        stats = EpochStats(self.epoch, float(np.mean(losses)), float(np.mean(scores)),
                           len(self.cloud), lr_sh, lr_pos, len(losses))
        self.epoch += 1
        log.info(stats.as_record())
        if self.sink is not None:
            self.sink(stats.as_record())
        return stats

    def fit(self, epochs=None):
        epochs = self.config.epochs if epochs is None else epochs
        return [self.train_epoch() for _ in range(epochs)]
