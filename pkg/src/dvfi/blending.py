"""Discontinuity-map blending and the training objectives.

The blend is a per-pixel convex combination of the continuously
interpolated frame and the previous input frame, weighted by the
discontinuity map. Both losses are Charbonnier-smoothed L1 means; the
total is their weighted sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LossConfig:
    epsilon: float = 0.001
    lambda_d: float = 1.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.lambda_d < 0:
            raise ValueError(f"lambda_d must be >= 0, got {self.lambda_d}")


@dataclass(frozen=True)
class LossReport:
    l1: float
    l_d: float
    total: float

    def to_dict(self) -> dict:
        return {"l1": self.l1, "l_d": self.l_d, "total": self.total}


def _check_same_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def blend(continuous: np.ndarray, previous: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Per-pixel convex combination: continuous where d=0, previous where d=1."""
    continuous = np.asarray(continuous, dtype=np.float64)
    previous = np.asarray(previous, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    _check_same_dims(continuous, previous)
    if d.shape != continuous.shape[:2]:
        raise ValueError(f"map shape {d.shape} does not match frame {continuous.shape[:2]}")
    if d.min() < 0.0 or d.max() > 1.0:
        raise ValueError("blend map values must lie in [0, 1]")
    w = d[..., None] if continuous.ndim == 3 else d
    return continuous * (1.0 - w) + previous * w


def charbonnier(x: np.ndarray, epsilon: float) -> np.ndarray:
    """Smooth L1 surrogate: sqrt(x^2 + epsilon^2)."""
    return np.sqrt(np.square(x) + epsilon * epsilon)


def charbonnier_loss(pred: np.ndarray, gt: np.ndarray, cfg: LossConfig = LossConfig()) -> float:
    """Mean Charbonnier distance over all elements."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    _check_same_dims(pred, gt)
    return float(charbonnier(pred - gt, cfg.epsilon).mean())


def dmap_loss(d: np.ndarray, dgt: np.ndarray, cfg: LossConfig = LossConfig()) -> float:
    """Mean (Charbonnier-smoothed) L1 between predicted and ground-truth maps."""
    d = np.asarray(d, dtype=np.float64)
    dgt = np.asarray(dgt, dtype=np.float64)
    _check_same_dims(d, dgt)
    return float(charbonnier(d - dgt, cfg.epsilon).mean())


def total_loss(l1: float, l_d: float, cfg: LossConfig = LossConfig()) -> LossReport:
    """Combine the reconstruction and map losses: total = l1 + lambda_d * l_d."""
    if not (math.isfinite(l1) and math.isfinite(l_d)):
        raise ValueError(f"loss terms must be finite, got l1={l1}, l_d={l_d}")
    return LossReport(l1=float(l1), l_d=float(l_d), total=float(l1 + cfg.lambda_d * l_d))
