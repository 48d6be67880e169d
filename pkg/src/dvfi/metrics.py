"""PSNR, SSIM, D-map IoU, and dataset-level report aggregation."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import correlate2d

from .frames import read_frame, read_mask

PSNR_CAP = 100.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _check_pair(a: np.ndarray, b: np.ndarray):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB over [0,1] data, capped at 100."""
    a, b = _check_pair(a, b)
    mse = float(np.mean(np.square(a - b)))
    if mse == 0.0:
        return PSNR_CAP
    return min(10.0 * math.log10(1.0 / mse), PSNR_CAP)


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """Normalized 2D Gaussian kernel."""
    r = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(r * r) / (2.0 * sigma * sigma))
    k = np.outer(g, g)
    return k / k.sum()


def _ssim_channel(x: np.ndarray, y: np.ndarray, window: np.ndarray) -> float:
    c1 = (SSIM_K1 * 1.0) ** 2
    c2 = (SSIM_K2 * 1.0) ** 2
    mu_x = correlate2d(x, window, mode="valid")
    mu_y = correlate2d(y, window, mode="valid")
    xx = correlate2d(x * x, window, mode="valid")
    yy = correlate2d(y * y, window, mode="valid")
    xy = correlate2d(x * y, window, mode="valid")
    var_x = xx - mu_x * mu_x
    var_y = yy - mu_y * mu_y
    cov = xy - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean local SSIM: 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
    dynamic range 1; computed per channel and averaged."""
    a, b = _check_pair(a, b)
    if min(a.shape[0], a.shape[1]) < SSIM_WINDOW:
        raise ValueError(
            f"frame {a.shape[:2]} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window")
    window = gaussian_window()
    if a.ndim == 2:
        return _ssim_channel(a, b, window)
    return float(np.mean([_ssim_channel(a[..., c], b[..., c], window)
                          for c in range(a.shape[2])]))


def dmap_iou(d: np.ndarray, dgt: np.ndarray, threshold: float = 0.5) -> float:
    """IoU of (d >= threshold) against a binary mask; 1.0 when both empty."""
    d, dgt = _check_pair(d, dgt)
    pred = d >= threshold
    gt = dgt >= 0.5
    union = np.logical_or(pred, gt).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(pred, gt).sum() / union)


# ---------------------------------------------------------------------------
# Dataset evaluation
# ---------------------------------------------------------------------------

@dataclass
class MetricsReport:
    samples: list[dict]
    aggregates: dict
    count: int

    def to_json(self) -> str:
        return json.dumps({"count": self.count, "aggregates": self.aggregates,
                           "samples": self.samples}, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        columns = ["id", "psnr_db", "ssim", "iou"]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in self.samples:
            writer.writerow({k: row.get(k, "") for k in columns})
        return buf.getvalue()


def _aggregate(samples: list[dict]) -> dict:
    agg = {}
    for key in ("psnr_db", "ssim", "iou"):
        vals = [s[key] for s in samples if key in s]
        if vals:
            agg[f"mean_{key}"] = float(np.mean(vals))
    return agg


def build_report(samples: list[dict]) -> MetricsReport:
    samples = sorted(samples, key=lambda s: s["id"])
    return MetricsReport(samples=samples, aggregates=_aggregate(samples),
                         count=len(samples))


def evaluate_dataset(
    pred_dir: str | os.PathLike,
    gt_dir: str | os.PathLike,
    dmap_dir: str | os.PathLike | None = None,
    dgt_dir: str | os.PathLike | None = None,
) -> MetricsReport:
    """Compare prediction/ground-truth images matched by shared basename.

    When both map directories are given, D-map IoU is reported as well.
    """
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    preds = sorted(p for p in pred_dir.iterdir() if p.suffix.lower() in (".png", ".ppm"))
    if not preds:
        raise FileNotFoundError(f"no images found in {pred_dir}")
    samples = []
    for pred_path in preds:
        gt_path = gt_dir / pred_path.name
        if not gt_path.is_file():
            raise FileNotFoundError(f"no ground-truth counterpart for {pred_path.name}")
        row = {
            "id": pred_path.stem,
            "psnr_db": psnr(read_frame(pred_path), read_frame(gt_path)),
            "ssim": ssim(read_frame(pred_path), read_frame(gt_path)),
        }
        if dmap_dir is not None and dgt_dir is not None:
            d_path = Path(dmap_dir) / pred_path.name
            g_path = Path(dgt_dir) / pred_path.name
            if not d_path.is_file() or not g_path.is_file():
                raise FileNotFoundError(f"no D-map counterpart for {pred_path.name}")
            row["iou"] = dmap_iou(read_mask(d_path), np.rint(read_mask(g_path)))
        samples.append(row)
    return build_report(samples)
