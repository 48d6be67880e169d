"""Toy trainable discontinuity-map estimator.

A fixed continuous branch (average of the two temporally nearest inputs)
plus a 3-layer 3x3 convnet (12->16->16->1 channels, leaky ReLU 0.1,
logistic output) that predicts the discontinuity map from the raw
12-channel concatenation of the four input frames. The prediction blends
the continuous frame with the nearest preceding input frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .blending import LossConfig

LEAKY_SLOPE = 0.1

# (shape, fan_in) per parameter, in checkpoint order
PARAM_SHAPES = (
    ("w1", (16, 12, 3, 3)),
    ("b1", (16,)),
    ("w2", (16, 16, 3, 3)),
    ("b2", (16,)),
    ("w3", (1, 16, 3, 3)),
    ("b3", (1,)),
)

NUM_PARAMS = sum(int(np.prod(shape)) for _, shape in PARAM_SHAPES)  # 4209


def _channels(input_idx: int) -> slice:
    """Channel slice of one input frame inside the 12-channel concat."""
    return slice(3 * input_idx, 3 * input_idx + 3)


@dataclass(frozen=True)
class TrainSample:
    """Four input frames (HxWx3), the target frame, and its binary mask."""

    inputs: tuple[np.ndarray, ...]
    gt: np.ndarray
    dgt: np.ndarray

    def __post_init__(self):
        if len(self.inputs) != 4:
            raise ValueError(f"expected 4 input frames, got {len(self.inputs)}")


@dataclass
class DMapEstimator:
    """Parameters of the 3-layer conv stack."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    def __post_init__(self):
        for name, shape in PARAM_SHAPES:
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            setattr(self, name, arr)

    @classmethod
    def random(cls, seed: int = 0) -> "DMapEstimator":
        """He-style random weights, zero biases."""
        rng = np.random.default_rng(seed)
        fields = {}
        for name, shape in PARAM_SHAPES:
            if name.startswith("w"):
                fan_in = int(np.prod(shape[1:]))
                fields[name] = rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)
            else:
                fields[name] = np.zeros(shape)
        return cls(**fields)

    @classmethod
    def init(cls, seed: int = 0) -> "DMapEstimator":
        """Training initialization.

        The first eight layer-1 filters start as center-tap detectors for
        intensity extremes and temporal differences of the previous input
        frame; the output layer starts at zero so the map begins at 0.5
        with live gradients. Without this, plain SGD drives the logistic
        output into saturation on the majority background before the conv
        features learn to discriminate, and training dies at d = 0.
        """
        params = cls.random(seed)
        w1, b1 = params.w1, params.b1
        w1[:8] = 0.0
        prev = _channels(1)
        # bright / dark pixels in the previous input frame
        w1[0, prev, 1, 1] = 1.0
        b1[0] = -1.0
        w1[1, prev, 1, 1] = -1.0
        b1[1] = -1.0
        # signed temporal differences: previous frame vs each other input
        for j, other in enumerate((0, 2, 3)):
            w1[2 + 2 * j, prev, 1, 1] = 1.0
            w1[2 + 2 * j, _channels(other), 1, 1] = -1.0
            w1[3 + 2 * j, prev, 1, 1] = -1.0
            w1[3 + 2 * j, _channels(other), 1, 1] = 1.0
        params.w3[:] = 0.0
        return params

    def arrays(self) -> tuple[np.ndarray, ...]:
        return tuple(getattr(self, name) for name, _ in PARAM_SHAPES)

    def flatten(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    @classmethod
    def from_flat(cls, flat: np.ndarray) -> "DMapEstimator":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (NUM_PARAMS,):
            raise ValueError(f"expected {NUM_PARAMS} parameters, got {flat.shape}")
        fields = {}
        pos = 0
        for name, shape in PARAM_SHAPES:
            n = int(np.prod(shape))
            fields[name] = flat[pos:pos + n].reshape(shape).copy()
            pos += n
        return cls(**fields)


def _to_chw(frame: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(frame, dtype=np.float64).transpose(2, 0, 1))


def continuous_branch(inputs) -> np.ndarray:
    """Fixed interpolator: average of the two temporally nearest inputs."""
    if len(inputs) != 4:
        raise ValueError(f"expected 4 input frames, got {len(inputs)}")
    a, b = np.asarray(inputs[1], np.float64), np.asarray(inputs[2], np.float64)
    if a.shape != b.shape:
        raise ValueError(f"frame shape mismatch: {a.shape} vs {b.shape}")
    return (a + b) / 2.0


def _stack_graph(inputs, params: DMapEstimator):
    """Build the conv stack over Tensor parameters; returns the d-map tensor."""
    # center the concatenated frames so conv features start contrast-driven
    x = np.concatenate([_to_chw(f) for f in inputs], axis=0) - 0.5  # (12, H, W)
    if x.shape[1] < 3 or x.shape[2] < 3:
        raise ValueError("spatial size must be at least 3x3")
    tensors = [ad.Tensor(a) for a in params.arrays()]
    w1, b1, w2, b2, w3, b3 = tensors
    h1 = ad.leaky_relu(ad.conv3x3(ad.Tensor(x), w1, b1), LEAKY_SLOPE)
    h2 = ad.leaky_relu(ad.conv3x3(h1, w2, b2), LEAKY_SLOPE)
    d = ad.sigmoid(ad.conv3x3(h2, w3, b3))  # (1, H, W)
    return d, tensors


def forward(inputs, params: DMapEstimator):
    """Predict (d, i_c, i_hat) for four input frames (HxWx3 each)."""
    shapes = {np.asarray(f).shape for f in inputs}
    if len(shapes) != 1:
        raise ValueError(f"input frames disagree on shape: {shapes}")
    d_t, _ = _stack_graph(inputs, params)
    d = d_t.value[0]
    i_c = continuous_branch(inputs)
    previous = np.asarray(inputs[1], dtype=np.float64)
    i_hat = i_c * (1.0 - d[..., None]) + previous * d[..., None]
    return d, i_c, i_hat


def infer(inputs, params: DMapEstimator):
    """Inference-time forward pass: returns (i_hat, d)."""
    d, _, i_hat = forward(inputs, params)
    return i_hat, d


def loss_graph(sample: TrainSample, params: DMapEstimator, cfg: LossConfig = LossConfig()):
    """Full differentiable pipeline; returns (loss, d, i_hat, param tensors)."""
    d, tensors = _stack_graph(sample.inputs, params)
    i_c = _to_chw(continuous_branch(sample.inputs))
    previous = _to_chw(sample.inputs[1])
    i_hat = ad.blend_const(d, i_c, previous)
    l1 = ad.charbonnier_mean(i_hat, _to_chw(sample.gt), cfg.epsilon)
    l_d = ad.charbonnier_mean(d, np.asarray(sample.dgt)[None], cfg.epsilon)
    loss = ad.add(l1, ad.mul(l_d, cfg.lambda_d))
    return loss, d, i_hat, tensors


def loss_and_grad(sample: TrainSample, params: DMapEstimator, cfg: LossConfig = LossConfig()):
    """Scalar loss terms and the flat parameter gradient for one sample."""
    loss, d, i_hat, tensors = loss_graph(sample, params, cfg)
    loss.backward()
    grad = np.concatenate([t.grad.ravel() for t in tensors])
    return float(loss.value), grad


def gradient_check(
    params: DMapEstimator,
    sample: TrainSample,
    cfg: LossConfig = LossConfig(),
    n_checks: int = 200,
    step: float = 1e-5,
    seed: int = 0,
) -> float:
    """Max relative error of reverse-mode gradients vs central differences."""
    loss0, grad = loss_and_grad(sample, params, cfg)
    if not np.isfinite(loss0):
        raise ValueError(f"non-finite loss {loss0}")
    flat = params.flatten()
    rng = np.random.default_rng(seed)
    idx = rng.choice(flat.size, size=min(n_checks, flat.size), replace=False)
    worst = 0.0
    for i in idx:
        bumped = flat.copy()
        bumped[i] = flat[i] + step
        lo_plus, _, _, _ = loss_graph(sample, DMapEstimator.from_flat(bumped), cfg)
        bumped[i] = flat[i] - step
        lo_minus, _, _, _ = loss_graph(sample, DMapEstimator.from_flat(bumped), cfg)
        numeric = (float(lo_plus.value) - float(lo_minus.value)) / (2.0 * step)
        denom = max(abs(numeric), abs(grad[i]), 1e-8)
        worst = max(worst, abs(numeric - grad[i]) / denom)
    return worst
