"""Figure Mixing / Text Mixing augmentation and ground-truth
discontinuity-mask derivation.

Figures (rectangles, circles, lines) are static: composited identically
onto every frame of a septuplet. Text overlays follow one of four temporal
modes; the target frame always follows the *previous* frames' overlay
state:

  STATIC     text on all 7 frames
  APPEAR     text on frames 5-7 only (target stays clean)
  DISAPPEAR  text on frames 1-4 (including the target)
  JUMP       text at position A on frames 1-4, position B on frames 5-7

(frame numbers 1-based, target = frame 4). The ground-truth discontinuity
mask is the union of overlay supports present on the target frame.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from . import font
from .frames import Sequence, check_mask

STATIC = "STATIC"
APPEAR = "APPEAR"
DISAPPEAR = "DISAPPEAR"
JUMP = "JUMP"
TEXT_MODES = (STATIC, APPEAR, DISAPPEAR, JUMP)

FIGURE_KINDS = ("rectangle", "circle", "line")

# 0-based frame memberships for a septuplet with target index 3.
_PAST = (0, 1, 2, 3)
_FUTURE = (4, 5, 6)
_ALL = tuple(range(7))


class OverlayPlacementError(ValueError):
    """Overlay geometry does not intersect the frame."""


@dataclass(frozen=True)
class OverlaySpec:
    """One figure or text element.

    ``geometry`` is kind-specific:
      rectangle: {top, left, h, w}
      circle:    {cy, cx, radius}
      line:      {y0, x0, y1, x1, thickness}
      text:      {text, scale, top, left}
    ``jump_position`` is the (top, left) anchor B, present iff mode=JUMP.
    """

    kind: str
    color: tuple[float, float, float]
    geometry: dict
    temporal_mode: str = STATIC
    jump_position: tuple[int, int] | None = None

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS + ("text",):
            raise ValueError(f"unknown overlay kind {self.kind!r}")
        if self.temporal_mode not in TEXT_MODES:
            raise ValueError(f"unknown temporal mode {self.temporal_mode!r}")
        if self.kind != "text" and self.temporal_mode != STATIC:
            raise ValueError("figures must be STATIC")
        if (self.jump_position is not None) != (self.temporal_mode == JUMP):
            raise ValueError("jump_position present iff mode is JUMP")
        object.__setattr__(self, "color", tuple(float(c) for c in self.color))


@dataclass(frozen=True)
class AugmentationRecord:
    """Everything needed to replay an augmentation bit-exactly."""

    seed: int
    overlays: tuple[OverlaySpec, ...]
    fm_applied: bool
    tm_applied: bool


@dataclass(frozen=True)
class AugmentedSample:
    original: Sequence
    augmented: Sequence
    record: AugmentationRecord
    dgt: np.ndarray


@dataclass(frozen=True)
class FTMParams:
    """Sampling ranges; all ranges are inclusive."""

    p_fm: float = 0.5
    p_tm: float = 0.5
    n_figures: tuple[int, int] = (1, 4)
    figure_size: tuple[int, int] = (8, 64)
    n_texts: tuple[int, int] = (1, 3)
    text_len: tuple[int, int] = (3, 12)
    text_scale: tuple[int, int] = (1, 4)


# ---------------------------------------------------------------------------
# Rasterization
# ---------------------------------------------------------------------------

def rasterize_overlay(
    spec: OverlaySpec,
    dims: tuple[int, int],
    at_position: tuple[int, int] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Render one overlay to a binary support mask and a color layer.

    ``at_position`` overrides the anchor (used for JUMP position B).
    Geometry is clipped to the frame; an overlay entirely outside raises.
    """
    h, w = dims
    g = spec.geometry
    support = np.zeros((h, w), dtype=bool)
    if spec.kind == "rectangle":
        top, left = at_position if at_position is not None else (g["top"], g["left"])
        t0, l0 = max(int(top), 0), max(int(left), 0)
        t1, l1 = min(int(top) + int(g["h"]), h), min(int(left) + int(g["w"]), w)
        if t0 < t1 and l0 < l1:
            support[t0:t1, l0:l1] = True
    elif spec.kind == "circle":
        cy, cx = at_position if at_position is not None else (g["cy"], g["cx"])
        yy, xx = np.ogrid[:h, :w]
        support = (yy - float(cy)) ** 2 + (xx - float(cx)) ** 2 <= float(g["radius"]) ** 2
    elif spec.kind == "line":
        y0, x0, y1, x1 = (float(g[k]) for k in ("y0", "x0", "y1", "x1"))
        half = float(g["thickness"]) / 2.0
        yy, xx = np.mgrid[:h, :w]
        dy, dx = y1 - y0, x1 - x0
        norm2 = dy * dy + dx * dx
        if norm2 == 0.0:
            dist2 = (yy - y0) ** 2 + (xx - x0) ** 2
        else:
            t = ((yy - y0) * dy + (xx - x0) * dx) / norm2
            t = np.clip(t, 0.0, 1.0)
            dist2 = (yy - (y0 + t * dy)) ** 2 + (xx - (x0 + t * dx)) ** 2
        support = dist2 <= half * half
    else:  # text
        bitmap = font.render_text(g["text"], int(g["scale"]))
        top, left = at_position if at_position is not None else (g["top"], g["left"])
        top, left = int(top), int(left)
        bh, bw = bitmap.shape
        t0, l0 = max(top, 0), max(left, 0)
        t1, l1 = min(top + bh, h), min(left + bw, w)
        if t0 < t1 and l0 < l1:
            support[t0:t1, l0:l1] = bitmap[t0 - top:t1 - top, l0 - left:l1 - left]
    if not support.any():
        raise OverlayPlacementError(f"{spec.kind} overlay lies entirely outside {h}x{w} frame")
    layer = np.zeros((h, w, 3))
    layer[support] = spec.color
    return support, layer


def _overlay_frames(spec: OverlaySpec) -> dict[int, tuple[int, int] | None]:
    """Map frame index -> anchor override for every frame the overlay is on."""
    if spec.kind != "text" or spec.temporal_mode == STATIC:
        return {i: None for i in _ALL}
    if spec.temporal_mode == APPEAR:
        return {i: None for i in _FUTURE}
    if spec.temporal_mode == DISAPPEAR:
        return {i: None for i in _PAST}
    # JUMP: past frames at the anchor, future frames at position B.
    members = {i: None for i in _PAST}
    members.update({i: spec.jump_position for i in _FUTURE})
    return members


def composite_overlays(seq: Sequence, overlays) -> Sequence:
    """Paint overlays (opaque, list order = z-order) onto a septuplet."""
    if len(seq) != 7:
        raise ValueError("figure-text mixing expects a septuplet")
    frames = [f.copy() for f in seq.frames]
    dims = (seq.height, seq.width)
    for spec in overlays:
        rendered: dict[tuple[int, int] | None, np.ndarray] = {}
        for idx, pos in _overlay_frames(spec).items():
            if pos not in rendered:
                rendered[pos], _ = rasterize_overlay(spec, dims, at_position=pos)
            frames[idx][rendered[pos]] = spec.color
    return Sequence(tuple(frames), seq.input_indices, seq.target_index)


def derive_dgt(record: AugmentationRecord, dims: tuple[int, int]) -> np.ndarray:
    """Union of overlay supports on the target frame, as a {0,1} mask.

    APPEAR texts leave the target untouched and contribute nothing; JUMP
    texts contribute at their past position A.
    """
    mask = np.zeros(dims, dtype=bool)
    for spec in record.overlays:
        if spec.kind == "text" and spec.temporal_mode == APPEAR:
            continue
        support, _ = rasterize_overlay(spec, dims)
        mask |= support
    return check_mask(mask.astype(np.float64))


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def _sample_color(rng: np.random.Generator) -> tuple[float, float, float]:
    return tuple(float(c) for c in rng.random(3))


def _sample_anchor(rng: np.random.Generator, dims, size) -> tuple[int, int]:
    """Top-left anchor keeping a size-(h,w) box inside dims when possible."""
    top = int(rng.integers(0, max(dims[0] - size[0], 0) + 1))
    left = int(rng.integers(0, max(dims[1] - size[1], 0) + 1))
    return top, left


def _sample_figure(rng: np.random.Generator, dims, params: FTMParams) -> OverlaySpec:
    h, w = dims
    lo, hi = params.figure_size
    hi = min(hi, h, w)
    lo = min(lo, hi)
    kind = FIGURE_KINDS[int(rng.integers(0, len(FIGURE_KINDS)))]
    color = _sample_color(rng)
    if kind == "rectangle":
        fh = int(rng.integers(lo, hi + 1))
        fw = int(rng.integers(lo, hi + 1))
        top, left = _sample_anchor(rng, dims, (fh, fw))
        geometry = {"top": top, "left": left, "h": fh, "w": fw}
    elif kind == "circle":
        radius = int(rng.integers(max(lo // 2, 1), max(hi // 2, 2) + 1))
        cy = int(rng.integers(radius, max(h - radius, radius) + 1))
        cx = int(rng.integers(radius, max(w - radius, radius) + 1))
        geometry = {"cy": cy, "cx": cx, "radius": radius}
    else:
        y0 = int(rng.integers(0, h))
        x0 = int(rng.integers(0, w))
        length = int(rng.integers(lo, hi + 1))
        angle = rng.random() * 2.0 * np.pi
        y1 = int(np.clip(round(y0 + length * np.sin(angle)), 0, h - 1))
        x1 = int(np.clip(round(x0 + length * np.cos(angle)), 0, w - 1))
        thickness = int(rng.integers(1, 6))
        geometry = {"y0": y0, "x0": x0, "y1": y1, "x1": x1, "thickness": thickness}
    return OverlaySpec(kind=kind, color=color, geometry=geometry)


def _sample_text(rng: np.random.Generator, dims, params: FTMParams) -> OverlaySpec:
    h, w = dims
    scale = int(rng.integers(params.text_scale[0], params.text_scale[1] + 1))
    while scale > 1 and (font.GLYPH_H * scale > h or font.GLYPH_W * scale > w):
        scale -= 1
    # longest string that still fits the frame width at this scale
    max_len = max((w // scale + 1) // 6, 1)
    lo = min(params.text_len[0], max_len)
    hi = min(params.text_len[1], max_len)
    length = int(rng.integers(lo, hi + 1))
    chars = rng.integers(0, len(font.ALPHABET), size=length)
    text = "".join(font.ALPHABET[i] for i in chars)
    size = font.text_size(text, scale)
    top, left = _sample_anchor(rng, dims, size)
    mode = TEXT_MODES[int(rng.integers(0, len(TEXT_MODES)))]
    jump = _sample_anchor(rng, dims, size) if mode == JUMP else None
    return OverlaySpec(
        kind="text",
        color=_sample_color(rng),
        geometry={"text": text, "scale": scale, "top": top, "left": left},
        temporal_mode=mode,
        jump_position=jump,
    )


def apply_figure_mixing(seq: Sequence, rng: np.random.Generator, params: FTMParams = FTMParams()):
    """Sample static figures and composite them onto all seven frames."""
    dims = (seq.height, seq.width)
    count = int(rng.integers(params.n_figures[0], params.n_figures[1] + 1))
    overlays = tuple(_sample_figure(rng, dims, params) for _ in range(count))
    return composite_overlays(seq, overlays), overlays


def apply_text_mixing(seq: Sequence, rng: np.random.Generator, params: FTMParams = FTMParams()):
    """Sample text overlays (one mode each) and composite them."""
    if seq.target_index != 3 or len(seq) != 7:
        raise ValueError("text mixing expects a septuplet with target frame 4")
    dims = (seq.height, seq.width)
    count = int(rng.integers(params.n_texts[0], params.n_texts[1] + 1))
    overlays = tuple(_sample_text(rng, dims, params) for _ in range(count))
    return composite_overlays(seq, overlays), overlays


def apply_ftm(seq: Sequence, seed: int, params: FTMParams = FTMParams()) -> AugmentedSample:
    """Apply FM then TM, each gated by its per-sequence probability."""
    rng = np.random.default_rng(seed)
    fm_applied = bool(rng.random() < params.p_fm)
    tm_applied = bool(rng.random() < params.p_tm)
    overlays: tuple[OverlaySpec, ...] = ()
    augmented = seq
    if fm_applied:
        augmented, fm_overlays = apply_figure_mixing(augmented, rng, params)
        overlays += tuple(fm_overlays)
    if tm_applied:
        augmented, tm_overlays = apply_text_mixing(augmented, rng, params)
        overlays += tuple(tm_overlays)
    record = AugmentationRecord(
        seed=int(seed), overlays=overlays,
        fm_applied=fm_applied, tm_applied=tm_applied)
    dgt = derive_dgt(record, (seq.height, seq.width))
    return AugmentedSample(original=seq, augmented=augmented, record=record, dgt=dgt)


def replay_record(seq: Sequence, record: AugmentationRecord) -> Sequence:
    """Re-apply a recorded augmentation; bit-identical to the original run."""
    return composite_overlays(seq, record.overlays)


# ---------------------------------------------------------------------------
# Record (de)serialization
# ---------------------------------------------------------------------------

def record_to_dict(record: AugmentationRecord) -> dict:
    return {
        "seed": record.seed,
        "fm_applied": record.fm_applied,
        "tm_applied": record.tm_applied,
        "overlays": [asdict(o) for o in record.overlays],
    }


def record_from_dict(data: dict) -> AugmentationRecord:
    overlays = tuple(
        OverlaySpec(
            kind=o["kind"],
            color=tuple(o["color"]),
            geometry=dict(o["geometry"]),
            temporal_mode=o.get("temporal_mode", STATIC),
            jump_position=tuple(o["jump_position"]) if o.get("jump_position") else None,
        )
        for o in data["overlays"]
    )
    return AugmentationRecord(
        seed=int(data["seed"]), overlays=overlays,
        fm_applied=bool(data["fm_applied"]), tm_applied=bool(data["tm_applied"]))


def record_to_json(record: AugmentationRecord) -> str:
    return json.dumps(record_to_dict(record), indent=2, sort_keys=True)


def record_from_json(text: str) -> AugmentationRecord:
    return record_from_dict(json.loads(text))
