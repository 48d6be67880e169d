"""Discontinuity-aware video frame interpolation toolkit."""

from .blending import LossConfig, LossReport, blend, charbonnier_loss, dmap_loss, total_loss
from .frames import Sequence, read_frame, write_frame, read_mask, write_mask, crop, flip, split_roles
from .metrics import psnr, ssim, dmap_iou, evaluate_dataset
from .model import DMapEstimator, TrainSample, continuous_branch, forward, infer, gradient_check
from .training import TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "LossConfig", "LossReport", "blend", "charbonnier_loss", "dmap_loss", "total_loss",
    "Sequence", "read_frame", "write_frame", "read_mask", "write_mask",
    "crop", "flip", "split_roles",
    "psnr", "ssim", "dmap_iou", "evaluate_dataset",
    "DMapEstimator", "TrainSample", "continuous_branch", "forward", "infer",
    "gradient_check", "TrainConfig", "train",
]
