"""
Spherical harmonic colors
=========================

Each point stores RGB coefficients for a real SH basis.  Looking at the
point from a different direction changes its color.
"""

import numpy as np

from pointrf.scene import RadiancePointCloud, point_color
from pointrf.sh import sh_basis

# the degree-0 function is a constant, so a single coefficient is a flat color
print("Y00 =", sh_basis([0.0, 0.0, 1.0], 0))

# the full degree-2 basis has 9 functions
d = np.array([0.0, 0.6, 0.8])
print("degree-2 basis at", d, "=\n", np.round(sh_basis(d, 2), 4))

# a red point that turns brighter when seen from +z
coeffs = np.zeros((1, 3, 9))
coeffs[0, 0, 0] = 0.5 / 0.28209479   # constant red
coeffs[0, 0, 2] = 0.4                # Y10 ~ z
cloud = RadiancePointCloud(np.zeros((1, 3)), coeffs, 2)
for direction in ([0, 0, 1.0], [1.0, 0, 0], [0, 0, -1.0]):
    print("seen along", direction, "->", np.round(point_color(cloud, 0, direction), 3))

# the basis is orthonormal on the sphere: check by Monte Carlo
rng = np.random.default_rng(0)
v = rng.normal(size=(200_000, 3))
v /= np.linalg.norm(v, axis=1, keepdims=True)
B = sh_basis(v, 2)
gram = 4 * np.pi * B.T @ B / len(v)
print("max |gram - I| =", np.abs(gram - np.eye(9)).max())
