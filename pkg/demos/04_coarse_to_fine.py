"""
Coarse-to-fine restructuring
============================

After a first training pass the cloud is voxel-averaged, points with uneven
neighbor distances are dropped, and each survivor spawns one point at the
mean of its neighbors.  Training then resumes at half the learning rate.
"""

from pointrf.coarse_to_fine import C2FConfig, c2f_round, restructure
from pointrf.hull import estimate_bounds, visual_hull_sample
from pointrf.render import RasterConfig
from pointrf.synthetic import sphere_cameras, sphere_views
from pointrf.train import TrainConfig, Trainer, dataset_loss

views = sphere_views(sphere_cameras(20, width=40, height=40))
bounds = estimate_bounds(views)
raster = RasterConfig(radius=0.05)
tc = TrainConfig(lr_sh=0.05, lr_pos=4e-3)
trainer = Trainer(visual_hull_sample(views, bounds, 2500, seed=1), views, tc, raster)
trainer.fit(4)


print(f"after training: {len(trainer.cloud)} points, "
      f"loss {dataset_loss(trainer.cloud, views, raster, tc.tv_weight):.5f}")

config = C2FConfig(voxel_grid=32, knn=8, refine_epochs=3)
_, counts = restructure(trainer.cloud, bounds, config)
print("stage counts:", counts)

cloud, counts, stats = c2f_round(trainer.cloud, bounds, config, views, tc, raster)
print(f"after one round: {len(cloud)} points, "
      f"loss {dataset_loss(cloud, views, raster, tc.tv_weight):.5f}, refined at lr_sh {stats[0].lr_sh:g}")
