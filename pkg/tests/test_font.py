import numpy as np
import pytest

from dvfi import font


def test_alphabet_covers_alnum():
    assert len(font.ALPHABET) == 62
    for ch in "AZaz09":
        assert ch in font.ALPHABET


def test_glyph_dims():
    for ch in font.ALPHABET:
        assert font.glyph_bitmap(ch).shape == (7, 5)


def test_glyphs_nonempty_and_distinct():
    seen = {}
    for ch in font.ALPHABET:
        bitmap = font.glyph_bitmap(ch)
        assert bitmap.any(), ch
        seen.setdefault(bitmap.tobytes(), ch)
    assert len(seen) == len(font.ALPHABET), "duplicate glyph bitmaps"


def test_unknown_glyph():
    with pytest.raises(KeyError):
        font.glyph_bitmap("!")


@pytest.mark.parametrize("scale", [1, 2, 3, 4])
def test_scale_squared_popcount(scale):
    base = font.render_text("A", 1).sum()
    assert font.render_text("A", scale).sum() == scale * scale * base


def test_render_text_layout():
    text = "Ab3"
    bitmap = font.render_text(text, 2)
    assert bitmap.shape == font.text_size(text, 2)
    # ink equals the sum of the individual glyphs
    total = sum(font.glyph_bitmap(c).sum() for c in text)
    assert bitmap.sum() == 4 * total


def test_render_text_rejects_empty():
    with pytest.raises(ValueError):
        font.render_text("", 1)


def test_nearest_neighbor_scaling_structure():
    small = font.render_text("Q", 1)
    big = font.render_text("Q", 3)
    np.testing.assert_array_equal(big[::3, ::3], small)
