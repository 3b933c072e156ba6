import numpy as np
import pytest

from latebind.errors import InvalidSpec
from latebind.render import (
    DEFAULT_SPEC,
    ImageFormat,
    decode_image,
    render_blur_animation,
    render_blur_segments,
    render_history_animation,
    render_history_segments,
    render_static,
)

from oracles import oracle_gaussian_blur

TEXT = "pin 4111 1111 1111 1111"


def gif_frames(payload):
    img = decode_image(payload)
    frames = []
    for k in range(img.n_frames):
        img.seek(k)
        assert img.info.get("duration") == 100
        frames.append(np.asarray(img.convert("L"), dtype=np.uint8).copy())
    assert img.info.get("loop") == 0
    return frames


def static_gray(text):
    asset = render_static(text, DEFAULT_SPEC)[0]
    return np.asarray(decode_image(asset.payload).convert("L"), dtype=np.uint8)


def test_blur_zero_fraction_frames_equal_static():
    asset = render_blur_animation(TEXT, DEFAULT_SPEC, 0.0)
    assert asset.format is ImageFormat.ANIMATED
    frames = gif_frames(asset.payload)
    assert len(frames) == 10
    base = static_gray(TEXT)
    for frame in frames:
        assert np.array_equal(frame, base)


def test_blur_full_fraction_final_frame_matches_dense_oracle():
    asset = render_blur_animation(TEXT, DEFAULT_SPEC, 1.0)
    frames = gif_frames(asset.payload)
    assert len(frames) == 10

    expected = oracle_gaussian_blur(static_gray(TEXT), 8.0)
    err = np.abs(frames[-1].astype(np.float64) - expected)
    assert err.mean() <= 2.0


def test_blur_frame_zero_always_unblurred():
    asset = render_blur_animation(TEXT, DEFAULT_SPEC, 0.7)
    frames = gif_frames(asset.payload)
    assert np.array_equal(frames[0], static_gray(TEXT))


def test_blur_monotone_in_fraction():
    # Monotonicity is asserted on a text block taller than the largest blur
    # kernel; a single 17 px line saturates to near-uniform around radius 6
    # and its distance-from-original plateaus instead of growing.
    block = "The quick brown fox jumps over the lazy dog. " * 12
    base = static_gray(block).astype(np.float64)
    for k in (3, 9):
        previous = -1.0
        for fraction in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
            frames = gif_frames(render_blur_animation(block, DEFAULT_SPEC, fraction).payload)
            mad = np.abs(frames[k].astype(np.float64) - base).mean()
            assert mad >= previous - 1e-9
            previous = mad


def test_blur_fraction_out_of_range_rejected():
    with pytest.raises(InvalidSpec):
        render_blur_animation(TEXT, DEFAULT_SPEC, 1.5)
    with pytest.raises(InvalidSpec):
        render_blur_animation(TEXT, DEFAULT_SPEC, -0.1)


def test_blur_multi_segment_helper():
    long_text = "\n".join(f"line {i}" for i in range(45))
    assets = render_blur_segments(long_text, DEFAULT_SPEC, 0.5)
    assert len(assets) == 2
    for asset in assets:
        assert len(gif_frames(asset.payload)) == 10


def test_history_single_revision_holds_static_for_two_seconds():
    asset = render_history_animation(["hello"], DEFAULT_SPEC)
    frames = gif_frames(asset.payload)
    assert len(frames) == 20
    base = static_gray("hello")
    for frame in frames:
        assert np.array_equal(frame, base)


def test_history_strike_then_latest():
    asset = render_history_animation(["Hi Jhon", "Hi John"], DEFAULT_SPEC)
    frames = gif_frames(asset.payload)
    assert len(frames) == 20

    # second half is exactly the latest revision
    latest = static_gray("Hi John")
    assert np.array_equal(frames[19], latest)
    assert np.array_equal(frames[10], latest)

    # frame 9 is the previous revision fully struck through: the strike row
    # must be dark from the left edge across the text width
    face = DEFAULT_SPEC.typeface()
    line_height = DEFAULT_SPEC.line_height()
    strike_row = line_height // 2
    prev_width = face.line_width("Hi Jhon")
    dark = frames[9][strike_row] < 128
    assert dark[: int(min(prev_width, frames[9].shape[1]))].all()

    # the sweep grows monotonically during the first second
    reach = [int((frames[k][strike_row] < 128).sum()) for k in range(10)]
    assert reach == sorted(reach)


def test_history_empty_revisions_rejected():
    with pytest.raises(InvalidSpec):
        render_history_animation([], DEFAULT_SPEC)


def test_history_loop_duration_is_two_seconds():
    asset = render_history_animation(["a", "b", "c"], DEFAULT_SPEC)
    img = decode_image(asset.payload)
    total = 0
    for k in range(img.n_frames):
        img.seek(k)
        total += img.info["duration"]
    assert total == 2000


def test_blur_loop_duration_is_one_second():
    img = decode_image(render_blur_animation("x", DEFAULT_SPEC, 0.3).payload)
    total = 0
    for k in range(img.n_frames):
        img.seek(k)
        total += img.info["duration"]
    assert total == 1000
