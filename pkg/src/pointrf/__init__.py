"""Point-based radiance fields: learn point positions and SH appearance from posed images."""

from .errors import (CheckpointError, ConfigurationError, ContractViolation, DatasetError,
                     DegenerateGeometryError, HullTooSmallError, PointRFError,
                     SequenceError, TrainingCollapseError)
from .scene import Camera, RadiancePointCloud, ViewSample, point_color, view_direction
from .sh import sh_basis, sh_color_gradient
from .render import RasterConfig, backward, composite, kernel_opacity, project, rasterize, render_view
from .train import TrainConfig, Trainer, consistency_filter, loss
from .hull import SceneBounds, estimate_bounds, visual_hull_sample
from .coarse_to_fine import C2FConfig, outlier_removal, point_generation, voxel_reduce
from .video import chamfer, chamfer_align, transfer_appearance, train_sequence
from .metrics import psnr, ssim

__version__ = "0.1.0"

__all__ = [
    "CheckpointError",
    "ConfigurationError",
    "ContractViolation",
    "DatasetError",
    "DegenerateGeometryError",
    "HullTooSmallError",
    "PointRFError",
    "SequenceError",
    "TrainingCollapseError",
    "Camera",
    "RadiancePointCloud",
    "ViewSample",
    "point_color",
    "view_direction",
    "sh_basis",
    "sh_color_gradient",
    "RasterConfig",
    "backward",
    "composite",
    "kernel_opacity",
    "project",
    "rasterize",
    "render_view",
    "TrainConfig",
    "Trainer",
    "consistency_filter",
    "loss",
    "SceneBounds",
    "estimate_bounds",
    "visual_hull_sample",
    "C2FConfig",
    "outlier_removal",
    "point_generation",
    "voxel_reduce",
    "chamfer",
    "chamfer_align",
    "transfer_appearance",
    "train_sequence",
    "psnr",
    "ssim",
]
