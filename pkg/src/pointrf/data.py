"""Image files and NeRF-synthetic (Blender) dataset loading."""

import json
import re
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DatasetError
from .scene import Camera, ViewSample

# OpenGL camera axes (x right, y up, looking down -z) -> ours (x right, y down, +z forward)
GL_TO_CV = np.diag([1.0, -1.0, -1.0])

BACKGROUNDS = {"white": (1.0, 1.0, 1.0), "black": (0.0, 0.0, 0.0)}


def to_uint8(image):
    return np.round(255.0 * np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)).astype(np.uint8)


def write_image(image, path, alpha=None):
    """Write a float image (H, W) or (H, W, 3) as 8-bit PNG; optional alpha channel."""
    data = to_uint8(image)
    if alpha is not None:
        if data.ndim == 2:
            data = np.repeat(data[..., None], 3, axis=2)
        data = np.concatenate([data, to_uint8(alpha)[..., None]], axis=2)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(data).save(path, format="PNG")


def read_image(path):
    """Read an 8-bit raster; returns (rgb float in [0,1], alpha or None)."""
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("RGBA", "LA", "PA") or (mode == "P" and "transparency" in im.info):
                arr = np.asarray(im.convert("RGBA"))
                alpha = arr[..., 3] / 255.0
            else:
                arr = np.asarray(im.convert("RGB"))
                alpha = None
    except (OSError, ValueError) as exc:
        raise DatasetError(f"cannot read image {path}: {exc}") from exc
    return arr[..., :3] / 255.0, alpha


def box_downscale(image, factor):
    if factor == 1:
        return image
    h, w = image.shape[:2]
    h2, w2 = h // factor, w // factor
    img = image[:h2 * factor, :w2 * factor]
    return img.reshape(h2, factor, w2, factor, *img.shape[2:]).mean(axis=(1, 3))


def camera_from_c2w(c2w, width, height, camera_angle_x):
    """World-to-camera extrinsics and intrinsics from a Blender camera-to-world pose."""
    c2w = np.asarray(c2w, dtype=np.float64)
    if c2w.shape != (4, 4) or np.abs(c2w[3] - [0, 0, 0, 1]).max() > 1e-6:
        raise DatasetError("transform_matrix must be 4x4 with bottom row (0, 0, 0, 1)")
    rot = c2w[:3, :3]
    if abs(np.linalg.det(rot)) < 1e-8:
        raise DatasetError("transform_matrix is not invertible")
    if np.abs(rot.T @ rot - np.eye(3)).max() > 1e-4:
        raise DatasetError("transform_matrix rotation block is not orthonormal")
    # re-orthonormalize the rotation (stored poses carry ~1e-7 noise)
    u, _, vt = np.linalg.svd(rot @ GL_TO_CV)
    r_c2w = u @ vt
    R = r_c2w.T
    t = -R @ c2w[:3, 3]
    return Camera.from_fov(R, t, width, height, camera_angle_x)


def camera_to_c2w(camera):
    """Inverse of :func:`camera_from_c2w`'s pose conversion."""
    c2w = np.eye(4)
    c2w[:3, :3] = camera.rotation.T @ GL_TO_CV
    c2w[:3, 3] = camera.center
    return c2w


def read_manifest(path):
    path = Path(path)
    try:
        meta = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise DatasetError(f"missing manifest {path}") from exc
    except json.JSONDecodeError as exc:
        raise DatasetError(f"malformed manifest {path}: {exc}") from exc
    if "camera_angle_x" not in meta or "frames" not in meta:
        raise DatasetError(f"{path} lacks camera_angle_x or frames")
    return meta


def _image_path(root, file_path):
    p = root / file_path
    if p.suffix.lower() != ".png":
        p = p.with_name(p.name + ".png")
    return p


def load_blender(root, split="train", downscale=1, background="white", limit=None):
    """Load ``transforms_<split>.json`` and its images as a list of ViewSample.

    RGB is composited over ``background``; the mask is alpha > 0.  Images
    are reduced by an integer box filter.
    """
    root = Path(root)
    meta = read_manifest(root / f"transforms_{split}.json")
    bg = np.asarray(BACKGROUNDS.get(background, background), dtype=np.float64)
    downscale = int(downscale)
    if downscale < 1:
        raise DatasetError("downscale must be a positive integer")
    views = []
    frames = meta["frames"][:limit] if limit else meta["frames"]
    for frame in frames:
        path = _image_path(root, frame["file_path"])
        if not path.exists():
            raise DatasetError(f"missing image {path}")
        rgb, alpha = read_image(path)
        if alpha is None:
            alpha = np.ones(rgb.shape[:2])
        rgb = rgb * alpha[..., None] + bg * (1.0 - alpha[..., None])
        rgb = box_downscale(rgb, downscale)
        alpha = box_downscale(alpha, downscale)
        h, w = alpha.shape
        cam = camera_from_c2w(frame["transform_matrix"], w, h, float(meta["camera_angle_x"]))
        views.append(ViewSample(cam, rgb, alpha > 0))
    return views


def write_blender(root, split, views, camera_angle_x, alphas=None):
    """Write views in the Blender layout (RGBA PNGs plus a transforms file)."""
    root = Path(root)
    frames = []
    for i, view in enumerate(views):
        rel = f"./{split}/r_{i}"
        alpha = view.mask.astype(np.float64) if alphas is None else alphas[i]
        write_image(view.image, root / split / f"r_{i}.png", alpha=alpha)
        frames.append({"file_path": rel, "transform_matrix": camera_to_c2w(view.camera).tolist()})
    root.mkdir(parents=True, exist_ok=True)
    (root / f"transforms_{split}.json").write_text(
        json.dumps({"camera_angle_x": camera_angle_x, "frames": frames}, indent=2))


def frame_dirs(root):
    """``<root>/frame_<idx>/`` directories sorted by numeric index."""
    found = []
    for p in Path(root).iterdir():
        m = re.fullmatch(r"frame_(\d+)", p.name)
        if m and p.is_dir():
            found.append((int(m.group(1)), p))
    if not found:
        raise DatasetError(f"no frame_<idx> directories under {root}")
    return [p for _, p in sorted(found)]
