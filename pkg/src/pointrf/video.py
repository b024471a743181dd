"""Per-frame video training with warm starts from the previous frame."""

import logging
import time
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .coarse_to_fine import C2FConfig
from .errors import ContractViolation, PointRFError, SequenceError
from .hull import estimate_bounds, visual_hull_sample
from .optim import Adam
from .pipeline import train_static
from .render import RasterConfig
from .scene import RadiancePointCloud
from .train import TrainConfig, Trainer

log = logging.getLogger(__name__)


def _nonempty(*clouds):
    out = []
    for c in clouds:
        c = np.asarray(c, dtype=np.float64).reshape(-1, 3)
        if len(c) == 0:
            raise ContractViolation("Chamfer distance needs non-empty point sets")
        out.append(c)
    return out


def chamfer(a, b):
    """Symmetric mean squared nearest-neighbor distance between two point sets."""
    a, b = _nonempty(a, b)
    d_ab, _ = cKDTree(b).query(a)
    d_ba, _ = cKDTree(a).query(b)
    return float(np.mean(d_ab ** 2) + np.mean(d_ba ** 2))


def chamfer_and_grad(moving, fixed):
    """Chamfer distance and its gradient w.r.t. ``moving``, with assignments frozen."""
    moving, fixed = _nonempty(moving, fixed)
    d_fm, nn_fm = cKDTree(moving).query(fixed)   # fixed -> nearest moving
    d_mf, nn_mf = cKDTree(fixed).query(moving)   # moving -> nearest fixed
    value = float(np.mean(d_fm ** 2) + np.mean(d_mf ** 2))
    grad = 2.0 * (moving - fixed[nn_mf]) / len(moving)
    pull = 2.0 * (moving[nn_fm] - fixed) / len(fixed)
    np.add.at(grad, nn_fm, pull)
    return value, grad


def chamfer_align(moving, fixed, steps=300, lr=1e-3):
    """Move the points of ``moving`` towards ``fixed`` by Adam on the Chamfer distance.

    Only positions change; ``fixed`` is read-only.  Returns a new cloud.
    """
    out = moving.copy()
    target = np.asarray(getattr(fixed, "positions", fixed), dtype=np.float64)
    opt = Adam({"pos": lr})
    params = {"pos": out.positions}
    for _ in range(steps):
        _, g = chamfer_and_grad(out.positions, target)
        opt.step(params, {"pos": g})
    return out


def transfer_appearance(cloud, source, k=5):
    """Give every point the mean SH coefficients of its k nearest source points."""
    k = min(k, len(source))
    _, idx = cKDTree(source.positions).query(cloud.positions, k=k)
    idx = idx.reshape(len(cloud), k)
    coeffs = source.sh_coeffs[idx].mean(axis=1)
    return RadiancePointCloud(cloud.positions.copy(), coeffs, source.l_max)


@dataclass
class FrameSequence:
    frames: list
    shared_cameras: bool = True

    def __post_init__(self):
        if not self.frames:
            raise ContractViolation("a sequence needs at least one frame")
        for i, views in enumerate(self.frames):
            if not views:
                raise ContractViolation(f"frame {i} has no views")

    def __len__(self):
        return len(self.frames)


@dataclass
class VideoConfig:
    n_points: int = 45_000
    l_max: int = 2
    match_previous_count: bool = True   # warm frames sample as many points as the previous solution
    warm_epochs: int = None        # None: a quarter of the cold-start epochs
    align_steps: int = 300
    align_lr: float = 1e-3
    transfer_k: int = 5
    warm_c2f: bool = False
    near: float = 2.0
    far: float = 6.0


@dataclass
class FrameResult:
    index: int
    cloud: object
    history: list
    warm: bool
    epochs: int
    seconds: float
    init_chamfer: float = float("nan")
    aligned_chamfer: float = float("nan")

    @property
    def final_loss(self):
        return self.history[-1].loss

    def as_record(self):
        h = self.history[-1]
        return (f"frame={self.index} warm={int(self.warm)} epochs={self.epochs} "
                f"loss={h.loss:.6g} psnr={h.psnr:.6g} points={len(self.cloud)} "
                f"seconds={self.seconds:.3f}")


def train_sequence(seq, train_config=None, raster_config=None, c2f_config=None,
                   video_config=None, sink=None, on_frame=None):
    """Train every frame in order; frames after the first start from their predecessor."""
    train_config = train_config or TrainConfig()
    raster_config = raster_config or RasterConfig()
    c2f_config = c2f_config or C2FConfig()
    vc = video_config or VideoConfig()
    warm_epochs = vc.warm_epochs if vc.warm_epochs is not None else max(1, train_config.epochs // 4)
    results = []
    prev = None
    for t, views in enumerate(seq.frames):
        try:
            t0 = time.perf_counter()
            bounds = estimate_bounds(views, vc.near, vc.far)
            n_points = len(prev) if prev is not None and vc.match_previous_count else vc.n_points
            cloud = visual_hull_sample(views, bounds, n_points, seed=train_config.seed + t,
                                       l_max=vc.l_max)
            if prev is None:
                fit = train_static(cloud, views, bounds, train_config, raster_config,
                                   c2f_config, sink=sink)
                res = FrameResult(t, fit.cloud, fit.history, False, len(fit.history),
                                  time.perf_counter() - t0)
            else:
                before = chamfer(cloud.positions, prev.positions)
                cloud = chamfer_align(cloud, prev, vc.align_steps, vc.align_lr)
                after = chamfer(cloud.positions, prev.positions)
                cloud = transfer_appearance(cloud, prev, vc.transfer_k)
                if vc.warm_c2f:
                    fit = train_static(cloud, views, bounds, train_config, raster_config,
                                       c2f_config, epochs=warm_epochs, sink=sink)
                    cloud, history = fit.cloud, fit.history
                else:
                    trainer = Trainer(cloud, views, train_config, raster_config, sink=sink)
                    history = trainer.fit(warm_epochs)
                    cloud = trainer.cloud
                res = FrameResult(t, cloud, history, True, len(history),
                                  time.perf_counter() - t0, before, after)
        except PointRFError as exc:
            raise SequenceError(t, exc) from exc
        log.info(res.as_record())
        if sink is not None:
            sink(res.as_record())
        if on_frame is not None:
            on_frame(res)
        results.append(res)
        prev = res.cloud
    return results
