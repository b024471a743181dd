"""Differentiable point splatting.

Points are projected with a pinhole model, splatted with an isotropic
Gaussian defined in normalized device coordinates (NDC), and composited
front to back.  NDC maps the image's shorter side to [-1, 1], so the
kernel radius is resolution independent.

The backward pass is derived by hand.  Depth order and the per-pixel set
of contributors are frozen constants of the forward pass.
"""

from dataclasses import dataclass, field

import numpy as np

from . import sh
from .errors import ConfigurationError, ContractViolation
from .scene import point_colors

_TWO_PI = 2.0 * np.pi


@dataclass
class RasterConfig:
    radius: float = 0.008
    points_per_pixel: int = 15
    cutoff_multiplier: float = 3.0
    near_clip: float = 0.01
    alpha_ceiling: float = 0.9999
    background: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigurationError("radius must be positive")
        if int(self.points_per_pixel) < 1:
            raise ConfigurationError("points_per_pixel must be >= 1")
        self.points_per_pixel = int(self.points_per_pixel)
        if self.cutoff_multiplier < 1:
            raise ConfigurationError("cutoff_multiplier must be >= 1")
        if not 0 < self.alpha_ceiling <= 1:
            raise ConfigurationError("alpha_ceiling must lie in (0, 1]")
        bg = np.broadcast_to(np.asarray(self.background, dtype=np.float64), (3,))
        self.background = tuple(float(v) for v in bg)

    @property
    def support(self):
        return self.cutoff_multiplier * self.radius


def ndc_scale(width, height):
    """Pixels per NDC unit along both axes."""
    return 0.5 * min(width, height)


def pixel_to_ndc(px, py, width, height):
    s = ndc_scale(width, height)
    return (px - 0.5 * width) / s, (py - 0.5 * height) / s


def pixel_grid_ndc(width, height):
    """NDC coordinates of every pixel center, shape (height*width, 2), row major."""
    jj, ii = np.meshgrid(np.arange(height, dtype=np.float64),
                         np.arange(width, dtype=np.float64), indexing="ij")
    u, v = pixel_to_ndc(ii.ravel(), jj.ravel(), width, height)
    return np.stack([u, v], axis=-1)


@dataclass
class ProjectedPoints:
    """Struct-of-arrays projection of a cloud into one camera.

    Row ``i`` always corresponds to world point ``i``; invisible points are
    flagged rather than dropped.
    """

    ndc: np.ndarray        # (n, 2)
    pixel: np.ndarray      # (n, 2)
    cam: np.ndarray        # (n, 3) camera-space coordinates
    visible: np.ndarray    # (n,) bool
    width: int
    height: int

    @property
    def cam_z(self):
        return self.cam[:, 2]

    def __len__(self):
        return self.ndc.shape[0]


def project(positions, camera, config):
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    X = camera.to_camera(positions)
    hom = X @ camera.intrinsics.T
    z = X[:, 2]
    front = z > config.near_clip
    w = np.where(front, hom[:, 2], 1.0)
    pixel = hom[:, :2] / w[:, None]
    pixel[~front] = np.nan
    u, v = pixel_to_ndc(pixel[:, 0], pixel[:, 1], camera.width, camera.height)
    ndc = np.stack([u, v], axis=-1)
    s = ndc_scale(camera.width, camera.height)
    half = np.array([camera.width / (2 * s), camera.height / (2 * s)]) + config.support
    with np.errstate(invalid="ignore"):
        inside = np.all(np.abs(ndc) <= half, axis=1)
    visible = front & inside
    return ProjectedPoints(ndc, pixel, X, visible, camera.width, camera.height)


def kernel_opacity(ndc_point, pixel_ndc, r, alpha_ceiling, cutoff_multiplier=3.0):
    """Clamped Gaussian opacity of a splat at a pixel; zero beyond the support."""
    d = np.asarray(ndc_point, dtype=np.float64) - np.asarray(pixel_ndc, dtype=np.float64)
    d2 = np.sum(d * d, axis=-1)
    raw = np.exp(-d2 / (2.0 * r * r)) / np.sqrt(_TWO_PI * r * r)
    alpha = np.minimum(raw, alpha_ceiling)
    return np.where(d2 > (cutoff_multiplier * r) ** 2, 0.0, alpha)


@dataclass
class RenderBuffers:
    """Forward results plus everything the backward pass needs.

    Per-pixel contributor slots are stored densely as (H*W, n) arrays,
    ordered front to back; unused slots have ``index == -1`` and zero alpha.
    """

    rgb: np.ndarray                  # (H, W, 3), unclamped
    alpha_acc: np.ndarray            # (H, W)
    depth: np.ndarray                # (H, W) expected depth
    index: np.ndarray                # (P, n) int
    opacity: np.ndarray              # (P, n) alpha of each slot
    weight: np.ndarray               # (P, n) net contribution A
    transmittance: np.ndarray        # (P, n) product of (1 - alpha) in front of the slot
    final_transmittance: np.ndarray  # (P,)
    clamped: np.ndarray              # (P, n) bool, alpha hit the ceiling
    pixel_ndc: np.ndarray            # (P, 2)
    projected: ProjectedPoints
    colors: np.ndarray               # (n_points, 3)
    config: RasterConfig
    camera: object = None
    directions: np.ndarray = field(default=None, repr=False)

    @property
    def shape(self):
        return self.rgb.shape[:2]

    @property
    def contrib_lists(self):
        """Per-pixel [(point_index, weight), ...] lists, front to back."""
        out = []
        for idx_row, w_row in zip(self.index, self.weight):
            keep = idx_row >= 0
            out.append(list(zip(idx_row[keep].tolist(), w_row[keep].tolist())))
        return out


def _candidate_pairs(projected, config):
    """All (pixel, point) pairs with the pixel center inside the point's support.

    Each visible point visits a fixed square stencil of pixels around its
    projection; the stencil side is set by the support radius in pixels.
    """
    W, H = projected.width, projected.height
    vis = np.flatnonzero(projected.visible)
    if vis.size == 0:
        empty = np.zeros(0)
        return empty.astype(np.int64), empty.astype(np.int64), empty
    s = ndc_scale(W, H)
    rad_px = config.support * s
    side = int(np.floor(2.0 * rad_px)) + 2
    px = projected.pixel[vis]
    i0 = np.ceil(px[:, 0] - rad_px).astype(np.int64)
    j0 = np.ceil(px[:, 1] - rad_px).astype(np.int64)
    off = np.arange(side)
    ii = (i0[:, None, None] + off[None, None, :]).repeat(side, axis=1)
    jj = (j0[:, None, None] + off[None, :, None]).repeat(side, axis=2)
    pts = np.broadcast_to(vis[:, None, None], ii.shape)
    ii, jj, pts = ii.ravel(), jj.ravel(), pts.ravel()
    inb = (ii >= 0) & (ii < W) & (jj >= 0) & (jj < H)
    ii, jj, pts = ii[inb], jj[inb], pts[inb]
    u, v = pixel_to_ndc(ii.astype(np.float64), jj.astype(np.float64), W, H)
    du = projected.ndc[pts, 0] - u
    dv = projected.ndc[pts, 1] - v
    d2 = du * du + dv * dv
    keep = d2 <= config.support ** 2
    return jj[keep] * W + ii[keep], pts[keep], d2[keep]


def composite(projected, colors, config):
    """Front-to-back alpha blending of the splats into an image."""
    W, H = projected.width, projected.height
    P = W * H
    n = config.points_per_pixel
    colors = np.asarray(colors, dtype=np.float64)
    if colors.shape != (len(projected), 3):
        raise ContractViolation("colors must be aligned with the projected points")
    r = config.radius

    pix, pts, d2 = _candidate_pairs(projected, config)
    z = projected.cam_z[pts]
    order = np.lexsort((pts, d2, z, pix))
    pix, pts, d2, z = pix[order], pts[order], d2[order], z[order]
    starts = np.flatnonzero(np.r_[True, pix[1:] != pix[:-1]]) if pix.size else np.zeros(0, int)
    group = np.cumsum(np.r_[False, pix[1:] != pix[:-1]]) if pix.size else np.zeros(0, int)
    rank = np.arange(pix.size) - starts[group] if pix.size else np.zeros(0, int)
    keep = rank < n
    pix, pts, d2, rank = pix[keep], pts[keep], d2[keep], rank[keep]

    raw = np.exp(-d2 / (2.0 * r * r)) / np.sqrt(_TWO_PI * r * r)
    clamped_pair = raw >= config.alpha_ceiling
    alpha_pair = np.where(clamped_pair, config.alpha_ceiling, raw)

    index = np.full((P, n), -1, dtype=np.int64)
    opacity = np.zeros((P, n))
    clamped = np.zeros((P, n), dtype=bool)
    index[pix, rank] = pts
    opacity[pix, rank] = alpha_pair
    clamped[pix, rank] = clamped_pair

    one_minus = 1.0 - opacity
    trans = np.ones((P, n))
    if n > 1:
        trans[:, 1:] = np.cumprod(one_minus[:, :-1], axis=1)
    final_t = trans[:, -1] * one_minus[:, -1]
    weight = opacity * trans

    valid = index >= 0
    safe = np.where(valid, index, 0)
    slot_colors = colors[safe] * valid[..., None]
    bg = np.asarray(config.background)
    rgb = np.einsum("pk,pkc->pc", weight, slot_colors) + final_t[:, None] * bg
    depth = np.sum(weight * projected.cam_z[safe] * valid, axis=1)

    return RenderBuffers(
        rgb=rgb.reshape(H, W, 3),
        alpha_acc=(1.0 - final_t).reshape(H, W),
        depth=depth.reshape(H, W),
        index=index,
        opacity=opacity,
        weight=weight,
        transmittance=trans,
        final_transmittance=final_t,
        clamped=clamped,
        pixel_ndc=pixel_grid_ndc(W, H),
        projected=projected,
        colors=colors,
        config=config,
    )


def backward(buffers, upstream, camera=None):
    """Gradients of a scalar loss w.r.t. point positions and point colors.

    ``upstream`` is dL/d(rgb) with the image's shape.  Position gradients
    here cover only the geometric path (kernel distance, transmittance and
    projection); the view-direction path through the color model is added
    by :func:`render_gradients`.
    """
    camera = camera if camera is not None else buffers.camera
    H, W = buffers.shape
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != (H, W, 3):
        raise ContractViolation(f"upstream gradient {upstream.shape} does not match image {(H, W, 3)}")
    proj = buffers.projected
    n_points = len(proj)
    if buffers.colors.shape[0] != n_points:
        raise ContractViolation("buffers and scene disagree on point count")
    cfg = buffers.config
    G = upstream.reshape(-1, 3)
    index = buffers.index
    valid = index >= 0
    safe = np.where(valid, index, 0)
    flat_idx = index[valid]

    slot_colors = buffers.colors[safe] * valid[..., None]
    gc = np.einsum("pc,pkc->pk", G, slot_colors)

    A = buffers.weight
    color_grads = np.empty((n_points, 3))
    AG = A[..., None] * G[:, None, :]
    for c in range(3):
        color_grads[:, c] = np.bincount(flat_idx, weights=AG[..., c][valid], minlength=n_points)

    # Color seen behind each slot, already attenuated by everything in front of it.
    contrib = A * gc
    suffix = np.cumsum(contrib[:, ::-1], axis=1)[:, ::-1]
    behind = suffix - contrib
    behind += (buffers.final_transmittance * (G @ np.asarray(cfg.background)))[:, None]
    d_alpha = buffers.transmittance * gc - behind / (1.0 - buffers.opacity)
    d_alpha = np.where(valid & ~buffers.clamped, d_alpha, 0.0)

    r2 = cfg.radius ** 2
    diff = proj.ndc[safe] - buffers.pixel_ndc[:, None, :]
    g_slot = (d_alpha * buffers.opacity / -r2)[..., None] * diff
    g_ndc = np.empty((n_points, 2))
    for a in range(2):
        g_ndc[:, a] = np.bincount(flat_idx, weights=g_slot[..., a][valid], minlength=n_points)

    position_grads = np.zeros((n_points, 3))
    vis = proj.visible
    if camera is not None and np.any(vis):
        s = ndc_scale(camera.width, camera.height)
        g_pix = g_ndc[vis] / s
        K = camera.intrinsics
        X = proj.cam[vis]
        w = X @ K[2]
        px = proj.pixel[vis]
        # d(pixel)/dX = (K[0:2] - pixel * K[2]) / w
        g_X = (g_pix[:, 0:1] * (K[0] - px[:, 0:1] * K[2])
               + g_pix[:, 1:2] * (K[1] - px[:, 1:2] * K[2])) / w[:, None]
        position_grads[vis] = g_X @ camera.rotation
    return position_grads, color_grads


def rasterize(cloud, camera, config):
    """Full forward pass: project, shade with SH, composite.  Output is unclamped."""
    proj = project(cloud.positions, camera, config)
    X = proj.cam
    norm = np.linalg.norm(X, axis=1, keepdims=True)
    dirs = X / np.maximum(norm, 1e-300)
    colors = point_colors(cloud, dirs) if len(cloud) else np.zeros((0, 3))
    buffers = composite(proj, colors, config)
    buffers.camera = camera
    buffers.directions = dirs
    return buffers


def render_view(cloud, camera, config):
    """Render an image (clamped to [0, 1]) and its expected-depth map."""
    buffers = rasterize(cloud, camera, config)
    return np.clip(buffers.rgb, 0.0, 1.0), buffers.depth


def render_gradients(cloud, buffers, upstream, positions=True):
    """Chain dL/d(rgb) back to (position_grads, sh_grads) for the whole cloud."""
    camera = buffers.camera
    geo_grads, color_grads = backward(buffers, upstream, camera)
    dirs = buffers.directions
    basis = sh.sh_basis(dirs, cloud.l_max, check=False)
    sh_grads = color_grads[:, :, None] * basis[:, None, :]
    if not positions:
        return None, sh_grads
    active = np.any(color_grads != 0.0, axis=1)
    if np.any(active):
        v = dirs[active]
        jac = sh.sh_basis_jacobian(v, cloud.l_max)
        g_v = np.einsum("nc,ncb,nbd->nd", color_grads[active], cloud.sh_coeffs[active], jac)
        norm = np.linalg.norm(buffers.projected.cam[active], axis=1, keepdims=True)
        g_X = (g_v - v * np.sum(g_v * v, axis=1, keepdims=True)) / norm
        geo_grads[active] += g_X @ camera.rotation
    return geo_grads, sh_grads
