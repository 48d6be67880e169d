"""Deterministic SGD training loop for the D-map estimator.

Each step draws its batch from a generator seeded by (config seed, step
index), so a run resumed from a checkpoint continues bit-identically to an
uninterrupted one. Checkpoints are a flat little-endian float64 binary
plus a JSON sidecar.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .blending import LossConfig, LossReport, charbonnier_loss, dmap_loss
from .model import DMapEstimator, TrainSample, NUM_PARAMS, loss_graph


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; carries the last finite step index."""

    def __init__(self, step: int, last_finite_step: int):
        super().__init__(
            f"training diverged at step {step} (last finite step: {last_finite_step})")
        self.step = step
        self.last_finite_step = last_finite_step


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-2
    steps: int = 500
    batch_size: int = 1
    seed: int = 0
    loss: LossConfig = field(default_factory=LossConfig)

    def __post_init__(self):
        if not self.lr > 0:
            raise ValueError(f"learning rate must be > 0, got {self.lr}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")


def _batch_indices(seed: int, step: int, n: int, batch_size: int) -> np.ndarray:
    rng = np.random.default_rng([seed, step])
    return rng.integers(0, n, size=batch_size)


def train_step(dataset, params: DMapEstimator, cfg: TrainConfig, step: int) -> tuple[DMapEstimator, LossReport]:
    """One SGD step; gradients are averaged over the batch in index order."""
    idx = _batch_indices(cfg.seed, step, len(dataset), cfg.batch_size)
    grad = np.zeros(NUM_PARAMS)
    l1_sum = 0.0
    ld_sum = 0.0
    for i in idx:
        loss, d, i_hat, tensors = loss_graph(dataset[int(i)], params, cfg.loss)
        loss.backward()
        grad += np.concatenate([t.grad.ravel() for t in tensors])
        # recover the two terms from the graph values for the report
        sample = dataset[int(i)]
        l1_sum += charbonnier_loss(i_hat.value, np.asarray(sample.gt).transpose(2, 0, 1), cfg.loss)
        ld_sum += dmap_loss(d.value[0], sample.dgt, cfg.loss)
    grad /= len(idx)
    # build the report directly: a non-finite loss is reported, not raised,
    # so the training loop can flag divergence with the step index
    l1m, ldm = l1_sum / len(idx), ld_sum / len(idx)
    report = LossReport(l1=l1m, l_d=ldm, total=l1m + cfg.loss.lambda_d * ldm)
    new_flat = params.flatten() - cfg.lr * grad
    return DMapEstimator.from_flat(new_flat), report


def train(
    dataset,
    cfg: TrainConfig,
    params: DMapEstimator | None = None,
    start_step: int = 0,
    log_path: str | os.PathLike | None = None,
):
    """Run SGD from ``start_step`` to ``cfg.steps``; returns (params, curve).

    ``curve`` is one LossReport per executed step. Raises TrainingDiverged
    on a non-finite loss.
    """
    if not dataset:
        raise ValueError("dataset must be non-empty")
    if params is None:
        params = DMapEstimator.init(cfg.seed)
    curve: list[LossReport] = []
    log_file = open(log_path, "a") if log_path is not None else None
    try:
        last_finite = start_step - 1
        for step in range(start_step, cfg.steps):
            params, report = train_step(dataset, params, cfg, step)
            if not math.isfinite(report.total):
                raise TrainingDiverged(step, last_finite)
            last_finite = step
            curve.append(report)
            if log_file is not None:
                log_file.write(json.dumps({"step": step, **report.to_dict()}) + "\n")
    finally:
        if log_file is not None:
            log_file.close()
    return params, curve


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

def save_checkpoint(params: DMapEstimator, path_prefix: str | os.PathLike,
                    seed: int, step: int) -> None:
    """Write <prefix>.bin (flat float64 LE) and <prefix>.json (metadata)."""
    prefix = Path(path_prefix)
    flat = params.flatten().astype("<f8")
    from .model import PARAM_SHAPES
    meta = {
        "shapes": {name: list(shape) for name, shape in PARAM_SHAPES},
        "seed": int(seed),
        "step": int(step),
        "n_params": int(flat.size),
    }
    _atomic_write_bytes(prefix.with_suffix(".bin"), flat.tobytes())
    _atomic_write_bytes(prefix.with_suffix(".json"),
                        json.dumps(meta, indent=2, sort_keys=True).encode())


def load_checkpoint(path_prefix: str | os.PathLike) -> tuple[DMapEstimator, dict]:
    prefix = Path(path_prefix)
    meta = json.loads(prefix.with_suffix(".json").read_text())
    flat = np.frombuffer(prefix.with_suffix(".bin").read_bytes(), dtype="<f8")
    if flat.size != meta["n_params"]:
        raise ValueError(
            f"checkpoint has {flat.size} values, sidecar says {meta['n_params']}")
    return DMapEstimator.from_flat(flat.astype(np.float64)), meta


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)
