import numpy as np
import pytest
from PIL import Image

from dvfi.frames import (Sequence, TruncatedImageError, UnsupportedImageError,
                         crop, flip, read_frame, read_mask, split_roles,
                         write_frame, write_mask)

from conftest import random_frame, random_septuplet


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def test_read_white_png(tmp_path):
    path = tmp_path / "white.png"
    Image.fromarray(np.full((1, 1, 3), 255, np.uint8)).save(path)
    frame = read_frame(path)
    assert frame.shape == (1, 1, 3)
    assert np.all(frame == 1.0)


def test_read_black_ppm(tmp_path):
    path = tmp_path / "black.ppm"
    path.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
    frame = read_frame(path)
    assert np.all(frame == 0.0)


def test_read_png_matches_independent_decoder(tmp_path):
    # the reference values come from the raw pixel array we encode
    pixels = np.zeros((2, 2, 3), np.uint8)
    pixels[0, 0] = (128, 0, 0)
    path = tmp_path / "px.png"
    Image.fromarray(pixels).save(path)
    frame = read_frame(path)
    assert frame[0, 0, 0] == 128 / 255
    np.testing.assert_array_equal(frame, pixels.astype(np.float64) / 255.0)


def test_read_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_frame(tmp_path / "nope.png")


def test_read_16bit_png_rejected(tmp_path):
    path = tmp_path / "deep.png"
    Image.new("I;16", (2, 2)).save(path)
    with pytest.raises(UnsupportedImageError):
        read_frame(path)


def test_read_truncated_ppm(tmp_path):
    path = tmp_path / "short.ppm"
    path.write_bytes(b"P6\n2 2\n255\n\x00\x00\x00")
    with pytest.raises(TruncatedImageError):
        read_frame(path)


def test_read_ppm_wrong_maxval(tmp_path):
    path = tmp_path / "deep.ppm"
    path.write_bytes(b"P6\n1 1\n65535\n\x00\x00\x00\x00\x00\x00")
    with pytest.raises(UnsupportedImageError):
        read_frame(path)


@pytest.mark.parametrize("value,expected", [(0.0, 0), (1.0, 255)])
def test_write_constant_frame(tmp_path, value, expected):
    path = tmp_path / "const.png"
    write_frame(np.full((3, 4, 3), value), path)
    raw = np.asarray(Image.open(path))
    assert np.all(raw == expected)


@pytest.mark.parametrize("suffix", [".png", ".ppm"])
def test_roundtrip_quantization_bound(tmp_path, rng, suffix):
    for _ in range(5):
        frame = random_frame(rng, 9, 7)
        path = tmp_path / f"rt{suffix}"
        write_frame(frame, path)
        back = read_frame(path)
        assert np.max(np.abs(back - frame)) <= 1.0 / 510.0 + 1e-12


def test_mask_roundtrip(tmp_path, rng):
    mask = rng.random((8, 8))
    path = tmp_path / "m.png"
    write_mask(mask, path)
    back = read_mask(path)
    assert np.max(np.abs(back - mask)) <= 1.0 / 510.0 + 1e-12


def test_write_read_determinism(tmp_path, rng):
    frame = random_frame(rng)
    write_frame(frame, tmp_path / "a.png")
    write_frame(frame, tmp_path / "b.png")
    assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()


# ---------------------------------------------------------------------------
# Sequence invariants
# ---------------------------------------------------------------------------

def test_sequence_rejects_bad_roles(rng):
    frames = tuple(rng.random((4, 4, 3)) for _ in range(3))
    with pytest.raises(ValueError):
        Sequence(frames, (0, 1), 1)  # target among inputs
    with pytest.raises(ValueError):
        Sequence(frames, (1, 0), 2)  # not increasing
    with pytest.raises(ValueError):
        Sequence(frames, (0, 5), 2)  # out of range


def test_sequence_rejects_mixed_dims(rng):
    with pytest.raises(ValueError):
        Sequence((rng.random((4, 4, 3)), rng.random((5, 4, 3))), (0,), 1)


def test_sequence_rejects_out_of_range_values(rng):
    with pytest.raises(ValueError):
        Sequence((rng.random((4, 4, 3)) + 0.5,), (), 0)


def test_sequence_frames_read_only(rng):
    seq = random_septuplet(rng)
    with pytest.raises(ValueError):
        seq.frames[0][0, 0, 0] = 0.5


# ---------------------------------------------------------------------------
# Crop
# ---------------------------------------------------------------------------

def test_crop_identity(rng):
    seq = random_septuplet(rng, 8, 10)
    out = crop(seq, 0, 0, 8, 10)
    for a, b in zip(out.frames, seq.frames):
        np.testing.assert_array_equal(a, b)
    assert out.input_indices == seq.input_indices
    assert out.target_index == seq.target_index


def test_crop_single_pixel(rng):
    seq = random_septuplet(rng, 6, 6)
    out = crop(seq, 0, 0, 1, 1)
    np.testing.assert_array_equal(out.frames[0][0, 0], seq.frames[0][0, 0])


def test_crop_composition(rng):
    seq = random_septuplet(rng, 16, 16)
    once = crop(crop(seq, 2, 3, 10, 10), 1, 2, 4, 4)
    direct = crop(seq, 3, 5, 4, 4)
    for a, b in zip(once.frames, direct.frames):
        np.testing.assert_array_equal(a, b)


def test_crop_out_of_bounds(rng):
    seq = random_septuplet(rng, 8, 8)
    with pytest.raises(ValueError):
        crop(seq, 4, 4, 8, 8)


# ---------------------------------------------------------------------------
# Flip
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("axis", ["horizontal", "vertical", "temporal"])
def test_flip_involution(rng, axis):
    seq = random_septuplet(rng)
    back = flip(flip(seq, axis), axis)
    for a, b in zip(back.frames, seq.frames):
        np.testing.assert_array_equal(a, b)
    assert back.input_indices == seq.input_indices
    assert back.target_index == seq.target_index


def test_flip_horizontal_1x2():
    a, b = [0.1, 0.2, 0.3], [0.7, 0.8, 0.9]
    seq = Sequence((np.array([[a, b]]),), (), 0)
    out = flip(seq, "horizontal")
    np.testing.assert_array_equal(out.frames[0], np.array([[b, a]]))


def test_flip_temporal_role_remap(rng):
    seq = random_septuplet(rng)  # inputs (0,2,4,6), target 3
    out = flip(seq, "temporal")
    # brute-force remap: frame i ends up at position 6-i
    assert out.input_indices == tuple(sorted(6 - i for i in seq.input_indices))
    assert out.target_index == 6 - seq.target_index
    assert out.input_indices == (0, 2, 4, 6)
    assert out.target_index == 3
    np.testing.assert_array_equal(out.frames[0], seq.frames[6])


# ---------------------------------------------------------------------------
# Role splitting
# ---------------------------------------------------------------------------

def test_split_roles_four(rng):
    seq = random_septuplet(rng)
    out = split_roles(seq, 4)
    assert out.input_indices == (0, 2, 4, 6)
    assert out.target_index == 3


def test_split_roles_two(rng):
    seq = random_septuplet(rng)
    out = split_roles(seq, 2)
    assert out.input_indices == (2, 4)
    assert out.target_index == 3


def test_split_roles_wrong_count(rng):
    frames = tuple(rng.random((4, 4, 3)) for _ in range(6))
    seq = Sequence(frames, (0,), 1)
    with pytest.raises(ValueError):
        split_roles(seq, 4)
