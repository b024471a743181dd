"""
Command line round trip
=======================

Writes a small synthetic dataset in the NeRF-synthetic (Blender) layout,
then drives ``pointrf train``, ``render`` and ``eval`` on it.
"""

import subprocess
import sys
from pathlib import Path

import numpy as np

from pointrf.data import write_blender
from pointrf.synthetic import ring_cameras, sphere_views

root = Path("demo_output") / "blender_sphere"
fov = np.deg2rad(40.0)
white = (1.0, 1.0, 1.0)
write_blender(root, "train", sphere_views(ring_cameras(16, width=40, height=40, fov_x=fov),
                                          background=white), fov)
write_blender(root, "test", sphere_views(ring_cameras(4, width=40, height=40, fov_x=fov, phase=0.4),
                                         background=white), fov)

config = root / "run.cfg"
config.write_text("# settings for a 40 px toy run\n"
                  "radius = 0.045\nlr_sh = 0.05\nlr_pos = 0.004\n"
                  "voxel_grid = 32\nknn = 8\nrounds = 1\nrefine_epochs = 3\n")


def pointrf(*args):
    cmd = [sys.executable, "-m", "pointrf", *map(str, args)]
    print("$", " ".join(cmd[2:]))
    subprocess.run(cmd, check=True)


ckpt = root / "model.dprf"
pointrf("train", "--data", root, "--out", ckpt, "--points", 2500, "--epochs", 6, "--config", config)
pointrf("render", "--ckpt", ckpt, "--data", root, "--pose", 0, "--out", root / "test0.png",
        "--depth", root / "test0_depth.png")
pointrf("eval", "--ckpt", ckpt, "--data", root, "--split", "test", "--report", root / "report.txt")
print((root / "report.txt").read_text())
