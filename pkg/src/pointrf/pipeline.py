"""End-to-end static scene fitting: hull init, training, coarse-to-fine rounds."""

import time
from dataclasses import dataclass, field

from .coarse_to_fine import C2FConfig, c2f_round
from .hull import DEFAULT_POINTS, estimate_bounds, visual_hull_sample
from .render import RasterConfig
from .train import TrainConfig, Trainer


@dataclass
class FitResult:
    cloud: object
    bounds: object
    history: list = field(default_factory=list)
    c2f_counts: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def final_loss(self):
        return self.history[-1].loss if self.history else float("nan")


def train_static(cloud, views, bounds, train_config=None, raster_config=None,
                 c2f_config=None, epochs=None, sink=None):
    """Train an existing cloud, then run the configured coarse-to-fine rounds."""
    train_config = train_config or TrainConfig()
    raster_config = raster_config or RasterConfig()
    c2f_config = c2f_config or C2FConfig()
    t0 = time.perf_counter()
    trainer = Trainer(cloud, views, train_config, raster_config, sink=sink)
    history = trainer.fit(epochs)
    cloud = trainer.cloud
    counts = []
    for _ in range(c2f_config.rounds):
        cloud, stage_counts, stats = c2f_round(cloud, bounds, c2f_config, views,
                                               train_config, raster_config, sink=sink)
        counts.append(stage_counts)
        history.extend(stats)
    return FitResult(cloud, bounds, history, counts, time.perf_counter() - t0)


def fit_static(views, train_config=None, raster_config=None, c2f_config=None,
               n_points=DEFAULT_POINTS, l_max=2, bounds=None, near=2.0, far=6.0, sink=None):
    train_config = train_config or TrainConfig()
    if bounds is None:
        bounds = estimate_bounds(views, near, far)
    cloud = visual_hull_sample(views, bounds, n_points, seed=train_config.seed, l_max=l_max)
    return train_static(cloud, views, bounds, train_config, raster_config, c2f_config, sink=sink)
