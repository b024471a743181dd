"""
Fitting a textured sphere
=========================

The ground truth is an analytically ray-traced sphere seen by cameras on a
Fibonacci sphere.  The point cloud starts inside the visual hull of the
silhouettes and is trained with Adam on an MSE + TV loss.
"""

from pathlib import Path

import numpy as np

from pointrf.data import write_image
from pointrf.hull import estimate_bounds, visual_hull_sample
from pointrf.metrics import psnr, ssim
from pointrf.render import RasterConfig, render_view
from pointrf.synthetic import sphere_cameras, sphere_views
from pointrf.train import TrainConfig, Trainer

views = sphere_views(sphere_cameras(24, width=48, height=48))
bounds = estimate_bounds(views)
cloud = visual_hull_sample(views, bounds, 3000, seed=0)
print("initial points:", len(cloud), "max radius", np.linalg.norm(cloud.positions, axis=1).max())

# small images need larger splats and faster rates than the defaults
raster = RasterConfig(radius=0.04)
trainer = Trainer(cloud, views, TrainConfig(lr_sh=0.05, lr_pos=4e-3), raster, sink=print)
trainer.fit(8)

rgb, _ = render_view(trainer.cloud, views[0].camera, raster)
print(f"view 0: PSNR {psnr(rgb, views[0].image):.2f} dB, SSIM {ssim(rgb, views[0].image):.3f}")
write_image(np.concatenate([views[0].image, rgb], axis=1), Path("demo_output") / "sphere_fit.png")
