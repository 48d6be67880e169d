"""Frame/mask/sequence primitives, lossless image I/O, and the generic
spatial/temporal augmentations (crop, flips, role splitting).

Frames are HxWx3 float64 arrays in [0, 1]; masks are HxW float64 arrays in
[0, 1]. Pixel data stays in double precision everywhere; quantization to
8 bits happens only at file boundaries.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError


class FrameIOError(Exception):
    """Base class for image read/write failures."""


class UnsupportedImageError(FrameIOError):
    """File exists but is not an 8-bit RGB PNG / binary PPM (P6)."""


class TruncatedImageError(FrameIOError):
    """File payload is shorter than its header promises."""


def check_frame(arr: np.ndarray) -> np.ndarray:
    """Validate an HxWx3 image in [0,1] and return it as float64."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"frame must be HxWx3, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"frame dims must be >= 1, got {arr.shape[:2]}")
    if not np.isfinite(arr).all() or arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("frame values must be finite and within [0, 1]")
    return arr


def check_mask(arr: np.ndarray) -> np.ndarray:
    """Validate an HxW map in [0,1] and return it as float64."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"mask must be HxW, got shape {arr.shape}")
    if not np.isfinite(arr).all() or arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("mask values must be finite and within [0, 1]")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Sequence:
    """An ordered run of equally sized frames with an input/target role map.

    ``input_indices`` and ``target_index`` are 0-based positions into
    ``frames``. Frames are copied and made read-only on construction, so a
    Sequence is safe to share across threads.
    """

    frames: tuple[np.ndarray, ...]
    input_indices: tuple[int, ...]
    target_index: int

    def __post_init__(self):
        frames = tuple(_freeze(check_frame(f)) for f in self.frames)
        if not frames:
            raise ValueError("sequence needs at least one frame")
        shape = frames[0].shape
        for f in frames[1:]:
            if f.shape != shape:
                raise ValueError("all frames in a sequence must share dims")
        inputs = tuple(int(i) for i in self.input_indices)
        target = int(self.target_index)
        n = len(frames)
        for i in inputs + (target,):
            if not 0 <= i < n:
                raise ValueError(f"role index {i} out of range for {n} frames")
        if any(b <= a for a, b in zip(inputs, inputs[1:])):
            raise ValueError("input indices must be strictly increasing")
        if target in inputs:
            raise ValueError("target index must not be an input index")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "input_indices", inputs)
        object.__setattr__(self, "target_index", target)

    @property
    def height(self) -> int:
        return self.frames[0].shape[0]

    @property
    def width(self) -> int:
        return self.frames[0].shape[1]

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def inputs(self) -> tuple[np.ndarray, ...]:
        return tuple(self.frames[i] for i in self.input_indices)

    @property
    def target(self) -> np.ndarray:
        return self.frames[self.target_index]


# ---------------------------------------------------------------------------
# I/O: 8-bit RGB PNG and binary PPM (P6); masks as 8-bit grayscale PNG.
# ---------------------------------------------------------------------------

def _quantize(arr: np.ndarray) -> np.ndarray:
    return np.rint(np.asarray(arr, dtype=np.float64) * 255.0).astype(np.uint8)


def _read_ppm(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    if not raw.startswith(b"P6"):
        raise UnsupportedImageError(f"{path}: not a binary PPM (P6) file")
    # header: magic, width, height, maxval; '#' comments allowed.
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise TruncatedImageError(f"{path}: PPM header ended early")
        tokens.append(raw[start:pos])
    pos += 1  # single whitespace after maxval
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise UnsupportedImageError(f"{path}: malformed PPM header") from exc
    if maxval != 255:
        raise UnsupportedImageError(
            f"{path}: only 8-bit PPM supported, maxval={maxval}")
    need = width * height * 3
    payload = raw[pos:pos + need]
    if len(payload) < need:
        raise TruncatedImageError(
            f"{path}: PPM payload has {len(payload)} of {need} bytes")
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)


def _write_ppm(path: Path, pixels: np.ndarray) -> None:
    h, w = pixels.shape[:2]
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    path.write_bytes(header + pixels.tobytes())


def _read_png(path: Path, mode: str) -> np.ndarray:
    try:
        with Image.open(path) as img:
            if img.mode in ("I", "I;16", "I;16B", "F"):
                raise UnsupportedImageError(
                    f"{path}: unsupported bit depth (mode {img.mode})")
            img.load()
            return np.asarray(img.convert(mode))
    except UnidentifiedImageError as exc:
        raise UnsupportedImageError(f"{path}: not a readable PNG") from exc
    except OSError as exc:
        if isinstance(exc, FileNotFoundError):
            raise
        raise TruncatedImageError(f"{path}: {exc}") from exc


def read_frame(path: str | os.PathLike) -> np.ndarray:
    """Read an 8-bit RGB PNG or binary PPM into a [0,1] float64 frame."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    if path.suffix.lower() in (".ppm", ".pnm"):
        pixels = _read_ppm(path)
    else:
        pixels = _read_png(path, "RGB")
    return pixels.astype(np.float64) / 255.0


def write_frame(frame: np.ndarray, path: str | os.PathLike) -> None:
    """Write a frame as 8-bit PNG (or PPM when the suffix is .ppm/.pnm)."""
    frame = check_frame(frame)
    path = Path(path)
    pixels = _quantize(frame)
    if path.suffix.lower() in (".ppm", ".pnm"):
        _write_ppm(path, pixels)
    else:
        Image.fromarray(pixels, mode="RGB").save(path, format="PNG")


def read_mask(path: str | os.PathLike) -> np.ndarray:
    """Read an 8-bit grayscale PNG into a [0,1] float64 mask."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    return _read_png(path, "L").astype(np.float64) / 255.0


def write_mask(mask: np.ndarray, path: str | os.PathLike) -> None:
    """Write a mask as 8-bit grayscale PNG (value = round(255 * m))."""
    mask = check_mask(mask)
    Image.fromarray(_quantize(mask), mode="L").save(Path(path), format="PNG")


# ---------------------------------------------------------------------------
# Sequence operations
# ---------------------------------------------------------------------------

def crop(seq: Sequence, top: int, left: int, h: int, w: int) -> Sequence:
    """Crop every frame to the same rectangle; roles are preserved."""
    if h < 1 or w < 1:
        raise ValueError(f"crop size must be positive, got {h}x{w}")
    if top < 0 or left < 0 or top + h > seq.height or left + w > seq.width:
        raise ValueError(
            f"crop rect ({top},{left},{h},{w}) exceeds "
            f"{seq.height}x{seq.width} frame")
    frames = tuple(f[top:top + h, left:left + w] for f in seq.frames)
    return Sequence(frames, seq.input_indices, seq.target_index)


def flip(seq: Sequence, axis: str) -> Sequence:
    """Mirror a sequence along 'horizontal', 'vertical' or 'temporal'."""
    if axis == "horizontal":
        frames = tuple(f[:, ::-1, :] for f in seq.frames)
        return Sequence(frames, seq.input_indices, seq.target_index)
    if axis == "vertical":
        frames = tuple(f[::-1, :, :] for f in seq.frames)
        return Sequence(frames, seq.input_indices, seq.target_index)
    if axis == "temporal":
        n = len(seq.frames)
        frames = tuple(seq.frames[::-1])
        inputs = tuple(sorted(n - 1 - i for i in seq.input_indices))
        return Sequence(frames, inputs, n - 1 - seq.target_index)
    raise ValueError(f"unknown flip axis {axis!r}")


def split_roles(seq: Sequence, n_inputs: int) -> Sequence:
    """Assign septuplet roles: inputs (1,3,5,7) or (3,5), target 4 (1-based)."""
    if len(seq.frames) != 7:
        raise ValueError(f"role split needs a septuplet, got {len(seq.frames)} frames")
    if n_inputs == 4:
        inputs = (0, 2, 4, 6)
    elif n_inputs == 2:
        inputs = (2, 4)
    else:
        raise ValueError(f"n_inputs must be 2 or 4, got {n_inputs}")
    return Sequence(seq.frames, inputs, 3)
