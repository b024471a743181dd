"""
Warm-starting video frames
==========================

A sphere slides along x.  Frame 0 is trained from scratch.  Each later frame
samples its own visual hull, pulls those points onto the previous solution
by minimizing the Chamfer distance, copies appearance from the nearest
previous points, and trains for half as many epochs.
"""

from pointrf.coarse_to_fine import C2FConfig
from pointrf.render import RasterConfig
from pointrf.synthetic import sphere_cameras, translating_sphere_sequence
from pointrf.train import TrainConfig, dataset_loss
from pointrf.video import VideoConfig, train_sequence

seq = translating_sphere_sequence(3, step=(0.05, 0.0, 0.0),
                                  cameras=sphere_cameras(16, width=40, height=40))
train = TrainConfig(epochs=6, lr_sh=0.05, lr_pos=4e-3)
raster = RasterConfig(radius=0.045)
c2f = C2FConfig(voxel_grid=32, knn=8, rounds=1)
video = VideoConfig(n_points=2500, align_steps=100, warm_epochs=6)

for res in train_sequence(seq, train, raster, c2f, video):
    loss = dataset_loss(res.cloud, seq.frames[res.index], raster, train.tv_weight)
    line = f"frame {res.index}: {'warm' if res.warm else 'cold'}, {res.epochs} epochs, loss {loss:.5f}"
    if res.warm:
        line += f", chamfer {res.init_chamfer:.4f} -> {res.aligned_chamfer:.4f}"
    print(line)
