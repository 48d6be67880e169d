import json

import numpy as np
import pytest

from dvfi.metrics import psnr
from dvfi.model import TrainSample, continuous_branch
from dvfi.synth import (INPUT_IDX, PREV_IDX, TARGET_IDX, DigitCounter,
                        HudRect, JumpText, SceneSpec, SynthParams,
                        generate_dataset, generate_sequence, load_dataset,
                        load_train_sample, sample_scene_spec, spec_from_dict,
                        spec_to_dict, write_sample)


def plain_spec(vy=2, vx=0, overlays=(), seed=7, h=32, w=32):
    return SceneSpec(height=h, width=w, velocity=(vy, vx),
                     texture_seed=seed, overlays=overlays)


def test_background_values_in_range():
    sample = generate_sequence(plain_spec())
    for frame in sample.sequence.frames:
        assert frame.min() >= 0.15 - 1e-12
        assert frame.max() <= 0.85 + 1e-12


def test_background_translation_is_exact_roll():
    sample = generate_sequence(plain_spec(vy=2, vx=4))
    base = sample.sequence.frames[0]
    for t, frame in enumerate(sample.sequence.frames):
        np.testing.assert_array_equal(frame, np.roll(base, (2 * t, 4 * t), axis=(0, 1)))


def test_overlay_free_masks_empty():
    sample = generate_sequence(plain_spec())
    for mask in sample.masks:
        assert not mask.any()


def test_midpoint_recovers_target_exactly():
    # with even velocity, shifting the previous input by half the two-frame
    # displacement reproduces the target background exactly
    spec = plain_spec(vy=2, vx=-4)
    sample = generate_sequence(spec)
    prev = sample.sequence.frames[PREV_IDX]
    shifted = np.roll(prev, (spec.velocity[0], spec.velocity[1]), axis=(0, 1))
    assert psnr(shifted, sample.sequence.frames[TARGET_IDX]) == 100.0


def test_hud_rect_static():
    hud = HudRect(top=4, left=4, h=6, w=8, color=(1.0, 1.0, 1.0))
    sample = generate_sequence(plain_spec(overlays=(hud,)))
    for frame, mask in zip(sample.sequence.frames, sample.masks):
        assert mask.sum() == 48
        assert np.all(frame[4:10, 4:12] == 1.0)


def test_counter_value_progression():
    counter = DigitCounter(top=2, left=2, scale=1, start=10,
                           fg=(1.0, 1.0, 1.0), bg=(0.0, 0.0, 0.0))
    sample = generate_sequence(plain_spec(overlays=(counter,)))
    frames = sample.sequence.frames
    # target shows the previous frame's value: frames 2 and 3 are identical
    # on the card, frame 4 is not
    card = sample.masks[0].astype(bool)
    np.testing.assert_array_equal(frames[TARGET_IDX][card], frames[PREV_IDX][card])
    assert not np.array_equal(frames[4][card], frames[PREV_IDX][card])
    # card support is constant across frames
    for mask in sample.masks:
        np.testing.assert_array_equal(mask, sample.masks[0])


def test_jump_text_anchor_schedule():
    anchors = ((0, 0), (2, 2), (4, 4), (6, 6), (8, 8), (10, 10), (12, 12))
    text = JumpText(text="AB", scale=1, color=(0.0, 0.0, 0.0), anchors=anchors)
    sample = generate_sequence(plain_spec(overlays=(text,)))
    # the target reuses the previous frame's anchor, not its own slot
    np.testing.assert_array_equal(sample.masks[TARGET_IDX], sample.masks[PREV_IDX])
    assert not np.array_equal(sample.masks[4], sample.masks[PREV_IDX])
    ys, xs = np.nonzero(sample.masks[1])
    assert ys.min() == 2 and xs.min() == 2


def test_target_copy_consistency_everywhere_on_dgt():
    rng = np.random.default_rng(0)
    for i in range(10):
        spec = sample_scene_spec(rng, 48, 48)
        sample = generate_sequence(spec)
        dgt = sample.dgt.astype(bool)
        target = sample.sequence.frames[TARGET_IDX]
        prev = sample.sequence.frames[PREV_IDX]
        np.testing.assert_array_equal(target[dgt], prev[dgt])


def test_velocity_cap():
    with pytest.raises(ValueError):
        SceneSpec(height=16, width=16, velocity=(10, 0), texture_seed=0)


def test_sampled_velocity_even_nonzero():
    rng = np.random.default_rng(5)
    for _ in range(30):
        spec = sample_scene_spec(rng, 64, 64)
        vy, vx = spec.velocity
        assert (vy, vx) != (0, 0)
        assert vy % 2 == 0 and vx % 2 == 0
        assert abs(vy) <= 4 and abs(vx) <= 4


def test_sampled_overlay_colors_bw():
    rng = np.random.default_rng(6)
    colors = set()
    for _ in range(20):
        for ov in sample_scene_spec(rng, 64, 64).overlays:
            if isinstance(ov, HudRect):
                colors.add(ov.color)
            elif isinstance(ov, JumpText):
                colors.add(ov.color)
            else:
                colors.add(ov.fg)
                colors.add(ov.bg)
    assert colors <= {(0.0, 0.0, 0.0), (1.0, 1.0, 1.0)}


def test_spec_roundtrip():
    rng = np.random.default_rng(9)
    spec = sample_scene_spec(rng, 64, 64)
    back = spec_from_dict(json.loads(json.dumps(spec_to_dict(spec))))
    assert back == spec
    a = generate_sequence(spec)
    b = generate_sequence(back)
    for fa, fb in zip(a.sequence.frames, b.sequence.frames):
        np.testing.assert_array_equal(fa, fb)


def test_write_and_load_sample(tmp_path):
    spec = sample_scene_spec(np.random.default_rng(3), 64, 64)
    sample = generate_sequence(spec)
    write_sample(sample, tmp_path / "s0")
    loaded = load_train_sample(tmp_path / "s0")
    assert isinstance(loaded, TrainSample)
    # masks are binary, so the round trip through 8-bit PNG is exact
    np.testing.assert_array_equal(loaded.dgt, sample.dgt)
    # frames survive up to quantization
    assert np.max(np.abs(loaded.gt - sample.sequence.frames[TARGET_IDX])) <= 1 / 510 + 1e-12
    for i, idx in enumerate(INPUT_IDX):
        assert np.max(np.abs(loaded.inputs[i] - sample.sequence.frames[idx])) <= 1 / 510 + 1e-12


def test_generate_dataset_layout_and_determinism(tmp_path):
    m1 = generate_dataset(tmp_path / "a", n=3, seed=11, height=48, width=48)
    m2 = generate_dataset(tmp_path / "b", n=3, seed=11, height=48, width=48)
    manifest = json.loads(m1.read_text())
    assert manifest["count"] == 3
    assert [e["id"] for e in manifest["samples"]] == ["00000", "00001", "00002"]
    for e in manifest["samples"]:
        d = tmp_path / "a" / e["dir"]
        assert (d / "frame_1.png").is_file() and (d / "frame_7.png").is_file()
        assert (d / "dgt.png").is_file() and (d / "spec.json").is_file()
        twin = tmp_path / "b" / e["dir"]
        for name in [f"frame_{i}.png" for i in range(1, 8)] + ["dgt.png"]:
            assert (d / name).read_bytes() == (twin / name).read_bytes()


def test_load_dataset(tmp_path):
    generate_dataset(tmp_path, n=2, seed=0, height=48, width=48)
    samples = load_dataset(tmp_path)
    assert len(samples) == 2
    assert samples[0].gt.shape == (48, 48, 3)
    assert set(np.unique(samples[0].dgt)) <= {0.0, 1.0}


def test_default_coverage_at_least_five_percent():
    rng = np.random.default_rng(17)
    cov = [generate_sequence(sample_scene_spec(rng, 64, 64)).dgt.mean()
           for _ in range(30)]
    assert np.mean(cov) >= 0.05


def test_continuous_branch_beaten_by_oracle_map():
    # the oracle blend (true mask, previous frame) must beat the plain
    # average on these scenes, otherwise training has nothing to gain
    from dvfi.blending import blend
    rng = np.random.default_rng(23)
    gain = []
    for _ in range(10):
        sample = generate_sequence(sample_scene_spec(rng, 64, 64))
        frames = sample.sequence.frames
        inputs = tuple(frames[i] for i in INPUT_IDX)
        i_c = continuous_branch(inputs)
        i_hat = blend(i_c, frames[PREV_IDX], sample.dgt)
        gt = frames[TARGET_IDX]
        gain.append(psnr(i_hat, gt) - psnr(i_c, gt))
    assert np.mean(gain) > 1.0
