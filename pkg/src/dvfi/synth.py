"""Synthetic discontinuous-motion sequence generator.

Scenes are a smoothly varying periodic background translated by an integer
velocity per frame (toroidal wrap, so the ground-truth middle frame is
analytically exact), overlaid with UI-style elements that move
discontinuously: a static HUD rectangle, a digit counter whose value
changes every frame, and a text snippet whose position is resampled each
frame. The target frame follows the previous frame's overlay state, and
the per-frame discontinuity masks are exactly the overlay supports.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from . import font
from .frames import Sequence, write_frame, write_mask, read_frame, read_mask
from .model import TrainSample

TARGET_IDX = 3          # 0-based target of a septuplet
PREV_IDX = 2            # overlay state the target follows
INPUT_IDX = (0, 2, 4, 6)


@dataclass(frozen=True)
class HudRect:
    """Fixed UI rectangle, identical on every frame."""

    top: int
    left: int
    h: int
    w: int
    color: tuple[float, float, float]


@dataclass(frozen=True)
class DigitCounter:
    """Two-digit counter on an opaque card; value = start + frame index.

    The target frame shows the previous frame's value. The card keeps the
    glyph support constant in size across frames.
    """

    top: int
    left: int
    scale: int
    start: int
    fg: tuple[float, float, float]
    bg: tuple[float, float, float]

    @property
    def card_size(self) -> tuple[int, int]:
        pad = self.scale
        th, tw = font.text_size("00", self.scale)
        return th + 2 * pad, tw + 2 * pad


@dataclass(frozen=True)
class JumpText:
    """Text whose anchor is resampled every frame; the target reuses the
    previous frame's anchor."""

    text: str
    scale: int
    color: tuple[float, float, float]
    anchors: tuple[tuple[int, int], ...]  # one (top, left) per frame


@dataclass(frozen=True)
class SceneSpec:
    height: int
    width: int
    velocity: tuple[int, int]  # (vy, vx) pixels per frame
    texture_seed: int
    overlays: tuple = ()
    n_frames: int = 7

    def __post_init__(self):
        if abs(self.velocity[0]) > 8 or abs(self.velocity[1]) > 8:
            raise ValueError(f"|velocity| must be <= 8 px/frame, got {self.velocity}")
        if self.n_frames != 7:
            raise ValueError("only septuplets are supported")


@dataclass(frozen=True)
class SynthSample:
    sequence: Sequence
    masks: tuple[np.ndarray, ...]  # per-frame overlay support
    spec: SceneSpec

    @property
    def dgt(self) -> np.ndarray:
        return self.masks[TARGET_IDX]


@dataclass(frozen=True)
class SynthParams:
    """Sampling knobs for randomized scene specs."""

    p_hud: float = 0.8
    p_counter: float = 1.0
    p_text: float = 1.0
    hud_size: tuple[int, int] = (10, 22)
    counter_scale: tuple[int, int] = (1, 2)
    text_len: tuple[int, int] = (3, 5)
    text_scale: tuple[int, int] = (1, 2)
    max_speed: int = 4  # velocity component drawn from 2*[-max_speed/2 .. max_speed/2]


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _smooth_field(rng: np.random.Generator, h: int, w: int,
                  n_modes: int = 5, contrast: float = 0.35) -> np.ndarray:
    """Periodic low-frequency random texture in [0.5-contrast, 0.5+contrast]."""
    yy, xx = np.mgrid[:h, :w]
    field = np.empty((h, w, 3))
    for c in range(3):
        acc = np.zeros((h, w))
        for _ in range(n_modes):
            ky = int(rng.integers(-3, 4))
            kx = int(rng.integers(-3, 4))
            phase = rng.random() * 2.0 * np.pi
            amp = 0.3 + rng.random()
            acc += amp * np.cos(2.0 * np.pi * (ky * yy / h + kx * xx / w) + phase)
        lo, hi = acc.min(), acc.max()
        field[..., c] = 0.5 - contrast + (acc - lo) / max(hi - lo, 1e-9) * 2 * contrast
    return field


def _counter_layers(ov: DigitCounter, value: int, dims) -> tuple[np.ndarray, np.ndarray]:
    """Support and color layer for the counter card showing ``value``."""
    h, w = dims
    ch, cw = ov.card_size
    support = np.zeros((h, w), dtype=bool)
    layer = np.zeros((h, w, 3))
    t0, l0 = ov.top, ov.left
    t1, l1 = min(t0 + ch, h), min(l0 + cw, w)
    support[t0:t1, l0:l1] = True
    layer[t0:t1, l0:l1] = ov.bg
    ink = font.render_text(f"{value % 100:02d}", ov.scale)
    pad = ov.scale
    gt0, gl0 = t0 + pad, l0 + pad
    gt1, gl1 = min(gt0 + ink.shape[0], h), min(gl0 + ink.shape[1], w)
    sub = ink[:gt1 - gt0, :gl1 - gl0]
    region = layer[gt0:gt1, gl0:gl1]
    region[sub] = ov.fg
    return support, layer


def _text_layers(ov: JumpText, anchor, dims) -> tuple[np.ndarray, np.ndarray]:
    h, w = dims
    ink = font.render_text(ov.text, ov.scale)
    top, left = anchor
    support = np.zeros((h, w), dtype=bool)
    t1, l1 = min(top + ink.shape[0], h), min(left + ink.shape[1], w)
    support[top:t1, left:l1] = ink[:t1 - top, :l1 - left]
    layer = np.zeros((h, w, 3))
    layer[support] = ov.color
    return support, layer


def _overlay_layers(ov, frame_idx: int, dims) -> tuple[np.ndarray, np.ndarray]:
    """Overlay support/color on a given frame, honoring the previous-frame
    rule on the target."""
    state_idx = PREV_IDX if frame_idx == TARGET_IDX else frame_idx
    if isinstance(ov, HudRect):
        support = np.zeros(dims, dtype=bool)
        support[ov.top:ov.top + ov.h, ov.left:ov.left + ov.w] = True
        layer = np.zeros(dims + (3,))
        layer[support] = ov.color
        return support, layer
    if isinstance(ov, DigitCounter):
        return _counter_layers(ov, ov.start + state_idx, dims)
    if isinstance(ov, JumpText):
        return _text_layers(ov, ov.anchors[state_idx], dims)
    raise TypeError(f"unknown overlay {type(ov).__name__}")


def generate_sequence(spec: SceneSpec) -> SynthSample:
    """Render all frames and per-frame masks for a scene spec."""
    h, w = spec.height, spec.width
    base = _smooth_field(np.random.default_rng(spec.texture_seed), h, w)
    vy, vx = spec.velocity
    frames = []
    masks = []
    for t in range(spec.n_frames):
        frame = np.roll(base, (t * vy, t * vx), axis=(0, 1))
        mask = np.zeros((h, w), dtype=bool)
        for ov in spec.overlays:
            support, layer = _overlay_layers(ov, t, (h, w))
            frame = np.where(support[..., None], layer, frame)
            mask |= support
        frames.append(np.clip(frame, 0.0, 1.0))
        masks.append(mask.astype(np.float64))
    seq = Sequence(tuple(frames), INPUT_IDX, TARGET_IDX)
    return SynthSample(sequence=seq, masks=tuple(masks), spec=spec)


# ---------------------------------------------------------------------------
# Spec sampling
# ---------------------------------------------------------------------------

def _bw(rng: np.random.Generator) -> tuple[float, float, float]:
    """UI elements are black or white: maximal contrast to the mid-range
    background texture."""
    return (0.0, 0.0, 0.0) if rng.random() < 0.5 else (1.0, 1.0, 1.0)


def sample_scene_spec(rng: np.random.Generator, height: int, width: int,
                      params: SynthParams = SynthParams()) -> SceneSpec:
    """Draw a randomized scene with non-overlapping overlay placements."""
    half = max(params.max_speed // 2, 0)
    velocity = (0, 0)
    while velocity == (0, 0):
        # even, nonzero: the background always moves and its midpoint stays
        # pixel-aligned
        velocity = (2 * int(rng.integers(-half, half + 1)),
                    2 * int(rng.integers(-half, half + 1)))
    texture_seed = int(rng.integers(0, 2**63 - 1))
    overlays = []
    occupied: list[tuple[int, int, int, int]] = []

    def place(bh: int, bw: int):
        # rejection-sample a free slot; gives up after a few tries
        for _ in range(20):
            top = int(rng.integers(0, max(height - bh, 0) + 1))
            left = int(rng.integers(0, max(width - bw, 0) + 1))
            box = (top, left, top + bh, left + bw)
            if all(box[2] <= o[0] or box[0] >= o[2] or box[3] <= o[1] or box[1] >= o[3]
                   for o in occupied):
                occupied.append(box)
                return top, left
        return None

    if rng.random() < params.p_counter:
        scale = int(rng.integers(params.counter_scale[0], params.counter_scale[1] + 1))
        bg = _bw(rng)
        fg = (1.0, 1.0, 1.0) if bg[0] == 0.0 else (0.0, 0.0, 0.0)
        counter = DigitCounter(top=0, left=0, scale=scale,
                               start=int(rng.integers(0, 90)), fg=fg, bg=bg)
        pos = place(*counter.card_size)
        if pos is not None:
            overlays.append(DigitCounter(top=pos[0], left=pos[1], scale=scale,
                                         start=counter.start, fg=counter.fg, bg=counter.bg))
    if rng.random() < params.p_text:
        scale = int(rng.integers(params.text_scale[0], params.text_scale[1] + 1))
        max_len = max(((width // 2) // scale + 1) // 6, 1)
        length = int(rng.integers(min(params.text_len[0], max_len),
                                  min(params.text_len[1], max_len) + 1))
        chars = rng.integers(0, len(font.ALPHABET), size=length)
        text = "".join(font.ALPHABET[i] for i in chars)
        th, tw = font.text_size(text, scale)
        # anchors move freely frame to frame; only keep them inside the frame
        anchors = tuple(
            (int(rng.integers(0, max(height - th, 0) + 1)),
             int(rng.integers(0, max(width - tw, 0) + 1)))
            for _ in range(7))
        overlays.append(JumpText(text=text, scale=scale, color=_bw(rng), anchors=anchors))
    if rng.random() < params.p_hud:
        bh = int(rng.integers(params.hud_size[0], params.hud_size[1] + 1))
        bw = int(rng.integers(params.hud_size[0], params.hud_size[1] + 1))
        pos = place(bh, bw)
        if pos is not None:
            overlays.append(HudRect(top=pos[0], left=pos[1], h=bh, w=bw, color=_bw(rng)))
    return SceneSpec(height=height, width=width, velocity=velocity,
                     texture_seed=texture_seed, overlays=tuple(overlays))


# ---------------------------------------------------------------------------
# Spec (de)serialization and dataset generation
# ---------------------------------------------------------------------------

_OVERLAY_KINDS = {"hud_rect": HudRect, "digit_counter": DigitCounter, "jump_text": JumpText}
_KIND_NAMES = {cls: name for name, cls in _OVERLAY_KINDS.items()}


def spec_to_dict(spec: SceneSpec) -> dict:
    return {
        "height": spec.height,
        "width": spec.width,
        "velocity": list(spec.velocity),
        "texture_seed": spec.texture_seed,
        "n_frames": spec.n_frames,
        "overlays": [{"kind": _KIND_NAMES[type(o)], **asdict(o)} for o in spec.overlays],
    }


def spec_from_dict(data: dict) -> SceneSpec:
    overlays = []
    for o in data["overlays"]:
        o = dict(o)
        cls = _OVERLAY_KINDS[o.pop("kind")]
        for key in ("color", "fg", "bg"):
            if key in o:
                o[key] = tuple(o[key])
        if "anchors" in o:
            o["anchors"] = tuple(tuple(a) for a in o["anchors"])
        overlays.append(cls(**o))
    return SceneSpec(height=data["height"], width=data["width"],
                     velocity=tuple(data["velocity"]),
                     texture_seed=data["texture_seed"],
                     overlays=tuple(overlays), n_frames=data.get("n_frames", 7))


def write_sample(sample: SynthSample, out_dir: str | os.PathLike) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(sample.sequence.frames, start=1):
        write_frame(frame, out_dir / f"frame_{i}.png")
    write_mask(sample.dgt, out_dir / "dgt.png")
    (out_dir / "spec.json").write_text(
        json.dumps(spec_to_dict(sample.spec), indent=2, sort_keys=True))


def generate_dataset(root: str | os.PathLike, n: int, seed: int,
                     height: int = 64, width: int = 64,
                     params: SynthParams = SynthParams()) -> Path:
    """Write ``n`` samples plus a manifest; deterministic by seed."""
    if n < 1:
        raise ValueError(f"dataset size must be >= 1, got {n}")
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for i in range(n):
        spec = sample_scene_spec(np.random.default_rng([seed, i]), height, width, params)
        sample_id = f"{i:05d}"
        write_sample(generate_sequence(spec), root / sample_id)
        entries.append({"id": sample_id, "dir": sample_id})
    manifest = {"seed": int(seed), "count": n, "samples": entries}
    manifest_path = root / "manifest.json"
    tmp = manifest_path.with_suffix(".json.tmp")
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    os.replace(tmp, manifest_path)
    return manifest_path


def load_train_sample(sample_dir: str | os.PathLike) -> TrainSample:
    """Load a written sample back as a 4-input training sample."""
    d = Path(sample_dir)
    frames = [read_frame(d / f"frame_{i}.png") for i in range(1, 8)]
    dgt = read_mask(d / "dgt.png")
    return TrainSample(inputs=tuple(frames[i] for i in INPUT_IDX),
                       gt=frames[TARGET_IDX], dgt=np.rint(dgt))


def load_dataset(root: str | os.PathLike) -> list[TrainSample]:
    root = Path(root)
    manifest = json.loads((root / "manifest.json").read_text())
    return [load_train_sample(root / e["dir"]) for e in manifest["samples"]]
