"""Analytic test scenes: ray-traced spheres seen from rings of cameras.

Images here are computed by exact ray-sphere intersection, independent of
the splat renderer, so they can serve as ground truth.
"""

import numpy as np

from .scene import Camera, ViewSample


def ring_cameras(n, distance=4.0, elevation=0.4, width=64, height=64, fov_x=np.deg2rad(40.0),
                 target=(0.0, 0.0, 0.0), phase=0.0):
    cams = []
    for k in range(n):
        a = phase + 2.0 * np.pi * k / n
        el = elevation * (1.0 if k % 2 == 0 else -0.6)
        eye = distance * np.array([np.cos(a) * np.cos(el), np.sin(a) * np.cos(el), np.sin(el)])
        cams.append(Camera.look_at(eye + np.asarray(target), target, width, height, fov_x))
    return cams


def sphere_cameras(n, distance=4.0, width=64, height=64, fov_x=np.deg2rad(40.0),
                   target=(0.0, 0.0, 0.0)):
    """Cameras on a Fibonacci sphere around ``target``, all looking at it."""
    golden = np.pi * (3.0 - np.sqrt(5.0))
    cams = []
    for k in range(n):
        z = 1.0 - 2.0 * (k + 0.5) / n
        rho = np.sqrt(1.0 - z * z)
        eye = distance * np.array([rho * np.cos(golden * k), rho * np.sin(golden * k), z])
        cams.append(Camera.look_at(eye + np.asarray(target), target, width, height, fov_x))
    return cams


def pixel_rays(camera):
    """World-space unit ray directions through every pixel center, shape (H, W, 3)."""
    jj, ii = np.meshgrid(np.arange(camera.height, dtype=np.float64),
                         np.arange(camera.width, dtype=np.float64), indexing="ij")
    pix = np.stack([ii, jj, np.ones_like(ii)], axis=-1)
    d = pix @ np.linalg.inv(camera.intrinsics).T @ camera.rotation
    return d / np.linalg.norm(d, axis=-1, keepdims=True)


def ray_sphere(camera, center, radius):
    """Hit distance along each pixel ray (inf where the ray misses)."""
    o = camera.center - np.asarray(center, dtype=np.float64)
    d = pixel_rays(camera)
    b = d @ o
    c = o @ o - radius * radius
    disc = b * b - c
    t = -b - np.sqrt(np.maximum(disc, 0.0))
    return np.where((disc >= 0) & (t > 0), t, np.inf), d


def sphere_mask(camera, center=(0.0, 0.0, 0.0), radius=1.0):
    t, _ = ray_sphere(camera, center, radius)
    return np.isfinite(t)


def default_texture(normals):
    """Smooth RGB pattern in [0.1, 0.9] as a function of the outward normal."""
    n = normals
    r = 0.5 + 0.35 * n[..., 0]
    g = 0.5 + 0.3 * np.sin(2.0 * n[..., 2] + 1.0) * np.cos(n[..., 1])
    b = 0.5 + 0.35 * n[..., 1] * n[..., 2] + 0.05 * n[..., 0]
    return np.clip(np.stack([r, g, b], axis=-1), 0.0, 1.0)


def sphere_view(camera, center=(0.0, 0.0, 0.0), radius=1.0, texture=default_texture,
                background=(0.0, 0.0, 0.0)):
    center = np.asarray(center, dtype=np.float64)
    t, d = ray_sphere(camera, center, radius)
    hit = np.isfinite(t)
    image = np.empty(t.shape + (3,))
    image[:] = np.asarray(background, dtype=np.float64)
    pts = camera.center + t[hit][:, None] * d[hit]
    image[hit] = texture((pts - center) / radius)
    return ViewSample(camera, image, hit)


def sphere_views(cameras, center=(0.0, 0.0, 0.0), radius=1.0, texture=default_texture,
                 background=(0.0, 0.0, 0.0)):
    return [sphere_view(c, center, radius, texture, background) for c in cameras]


def translating_sphere_sequence(n_frames, step=(0.05, 0.0, 0.0), cameras=None, radius=1.0,
                                background=(0.0, 0.0, 0.0)):
    """Frames of a textured sphere sliding by ``step`` per frame; texture moves with it."""
    from .video import FrameSequence

    cameras = cameras or ring_cameras(12)
    step = np.asarray(step, dtype=np.float64)
    frames = [sphere_views(cameras, k * step, radius, background=background)
              for k in range(n_frames)]
    return FrameSequence(frames, shared_cameras=True)
