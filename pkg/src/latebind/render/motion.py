"""Kinetic-typography animations: expiry blur and edit-history strikethrough.

Blur animations are ten frames over one second; the per-frame blur radius
ramps linearly from zero to fraction_elapsed * r_max, so a freshly created
item loops un-blurred and one at its deadline ends fully blurred. History
animations are twenty frames over two seconds: the first second strikes
through the previous revision left to right, the second shows the latest
revision.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from PIL import Image, ImageDraw

from ..errors import InvalidSpec
from .assets import ImageAsset, ImageFormat
from .gaussian import blur_u8
from .gifenc import encode_gif, palette_for
from .layout import RenderSpec, plan_layout
from .static import _canvas_mode, _fill, draw_lines, image_to_array

BLUR_FRAMES = 10
HISTORY_FRAMES = 20
FRAME_DELAY_CS = 10  # 100 ms per frame
DEFAULT_MAX_BLUR_PX = 8.0


def _flatten(arr: np.ndarray, spec: RenderSpec) -> np.ndarray:
    """GIF has no partial alpha; composite RGBA over the background color."""
    if arr.ndim == 3 and arr.shape[2] == 4:
        alpha = arr[:, :, 3:4].astype(np.float64) / 255.0
        bg = np.array(spec.background_color[:3], dtype=np.float64)
        rgb = arr[:, :, :3].astype(np.float64) * alpha + bg * (1.0 - alpha)
        return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)
    return arr


def _posterize(frames: list[np.ndarray], levels: int) -> list[np.ndarray]:
    step = 256 // levels
    return [((f.astype(np.int32) // step) * step + step // 2).clip(0, 255).astype(np.uint8) for f in frames]


def _gray_gif(frames: list[np.ndarray], delay_cs: int) -> bytes:
    values = np.unique(np.concatenate([f.ravel() for f in frames]))
    palette = [(int(v),) * 3 for v in values]
    index_frames = [np.searchsorted(values, f).astype(np.uint8) for f in frames]
    return encode_gif(index_frames, palette, delay_cs=delay_cs)


def _rgb_gif(frames: list[np.ndarray], delay_cs: int) -> bytes:
    exact = palette_for(frames)
    if exact is not None:
        index_frames, palette = exact
        return encode_gif(index_frames, palette, delay_cs=delay_cs)
    # over 256 combined colors: quantize against the first frame's adaptive palette
    ref = Image.fromarray(frames[0], "RGB").quantize(colors=256, method=Image.Quantize.MEDIANCUT)
    palette_bytes = ref.getpalette()
    palette = [tuple(palette_bytes[i : i + 3]) for i in range(0, 768, 3)]
    index_frames = [
        np.asarray(Image.fromarray(f, "RGB").quantize(palette=ref), dtype=np.uint8)
        for f in frames
    ]
    return encode_gif(index_frames, palette, delay_cs=delay_cs)


def frames_to_gif(frames: list[np.ndarray], spec: RenderSpec, delay_cs: int = FRAME_DELAY_CS) -> bytes:
    """Encode frames, stepping down gray depth only if the byte budget demands it."""
    flat = [_flatten(f, spec) for f in frames]
    gray = flat[0].ndim == 2

    payload = _gray_gif(flat, delay_cs) if gray else _rgb_gif(flat, delay_cs)
    if len(payload) <= spec.max_file_bytes:
        return payload
    for levels in (64, 32, 16, 8):
        reduced = _posterize(flat, levels)
        payload = _gray_gif(reduced, delay_cs) if gray else _rgb_gif(reduced, delay_cs)
        if len(payload) <= spec.max_file_bytes:
            return payload
    return payload


def _animated_asset(segment_index: int, frames: list[np.ndarray], spec: RenderSpec,
                    replaced: bool, payload: bytes) -> ImageAsset:
    height, width = frames[0].shape[:2]
    return ImageAsset(
        segment_index=segment_index,
        format=ImageFormat.ANIMATED,
        width=width,
        height=height,
        payload=payload,
        replaced_glyphs=replaced,
    )


def render_blur_segments(
    text: str,
    spec: RenderSpec,
    fraction_elapsed: float,
    max_blur_px: float = DEFAULT_MAX_BLUR_PX,
) -> list[ImageAsset]:
    """One looping blur animation per layout segment.

    A segment whose GIF blows the byte budget even after gray-depth
    reduction is split by lines into smaller segments, same as static
    rendering.
    """
    if not 0.0 <= fraction_elapsed <= 1.0:
        raise InvalidSpec("fraction_elapsed must be within [0, 1]")
    if max_blur_px < 0:
        raise InvalidSpec("max blur must be non-negative")
    plan = plan_layout(text, spec)
    queue = [plan.segment_lines(i) for i in range(plan.segment_count)]
    assets: list[ImageAsset] = []
    while queue:
        lines = queue.pop(0)
        img, replaced = draw_lines(lines, spec)
        base = image_to_array(img)
        frames = [
            blur_u8(base, (k / (BLUR_FRAMES - 1)) * fraction_elapsed * max_blur_px)
            for k in range(BLUR_FRAMES)
        ]
        payload = frames_to_gif(frames, spec)
        if len(payload) > spec.max_file_bytes and len(lines) > 1:
            mid = len(lines) // 2
            queue.insert(0, lines[mid:])
            queue.insert(0, lines[:mid])
            continue
        assets.append(_animated_asset(len(assets), frames, spec, replaced, payload))
    return assets


def render_blur_animation(
    text: str,
    spec: RenderSpec,
    fraction_elapsed: float,
    max_blur_px: float = DEFAULT_MAX_BLUR_PX,
) -> ImageAsset:
    """Blur animation for the first segment (texts that fit one image)."""
    return render_blur_segments(text, spec, fraction_elapsed, max_blur_px)[0]


def _draw_on_canvas(lines: list[str], spec: RenderSpec, size: tuple[int, int]) -> np.ndarray:
    """Draw lines onto a fixed-size canvas (history frames share one canvas)."""
    face = spec.typeface()
    line_height = spec.line_height()
    mode = _canvas_mode(spec)
    img = Image.new(mode, size, _fill(spec.background_color, mode))
    draw = ImageDraw.Draw(img)
    fill = _fill(spec.text_color, mode)
    for row, line in enumerate(lines):
        if row * line_height >= size[1]:
            break
        drawn, _ = face.drawable_line(line.rstrip("\n"))
        if drawn:
            draw.text((0, row * line_height), drawn, font=face.pil_font, fill=fill)
    return image_to_array(img)


def _strike(arr: np.ndarray, spec: RenderSpec, line_widths: list[float], coverage: float) -> np.ndarray:
    out = arr.copy()
    height = out.shape[0]
    width = out.shape[1]
    line_height = spec.line_height()
    thickness = max(1, round(spec.font_size / 10))
    color = spec.text_color
    ink = color[0] if out.ndim == 2 else np.array(color[: out.shape[2]], dtype=np.uint8)
    for row, line_w in enumerate(line_widths):
        reach = round(coverage * min(line_w, width))
        if reach <= 0:
            continue
        y0 = row * line_height + line_height // 2 - thickness // 2
        if y0 >= height:
            break
        out[max(0, y0) : min(height, y0 + thickness), 0:reach] = ink
    return out


def _history_frames(latest_lines: list[str], prev_lines: Optional[list[str]],
                    spec: RenderSpec) -> tuple[list[np.ndarray], bool]:
    face = spec.typeface()
    img, replaced = draw_lines(latest_lines, spec)
    latest_arr = image_to_array(img)
    if prev_lines:
        prev_arr = _draw_on_canvas(prev_lines, spec, (img.width, img.height))
        widths = [face.line_width(line.rstrip()) for line in prev_lines]
        first_half = [
            _strike(prev_arr, spec, widths, (k + 1) / 10) for k in range(HISTORY_FRAMES // 2)
        ]
    else:
        first_half = [latest_arr.copy() for _ in range(HISTORY_FRAMES // 2)]
    frames = first_half + [latest_arr.copy() for _ in range(HISTORY_FRAMES // 2)]
    return frames, replaced


def render_history_segments(revisions: list[str], spec: RenderSpec) -> list[ImageAsset]:
    """One looping history animation per segment of the latest revision.

    With a single revision the loop simply holds the static render for two
    seconds. The animation canvas always matches the latest revision, so its
    second half is pixel-identical to the static render. Over-budget
    segments are split by lines; the previous revision's lines split at the
    same row so each part strikes through its own region.
    """
    if not revisions:
        raise InvalidSpec("need at least one revision")
    spec.validate()

    latest = revisions[-1]
    previous = revisions[-2] if len(revisions) >= 2 else None
    latest_plan = plan_layout(latest, spec)
    prev_plan = plan_layout(previous, spec) if previous is not None else None

    queue: list[tuple[list[str], Optional[list[str]]]] = []
    for seg in range(latest_plan.segment_count):
        prev_lines = None
        if prev_plan is not None and seg < prev_plan.segment_count:
            prev_lines = prev_plan.segment_lines(seg)
        queue.append((latest_plan.segment_lines(seg), prev_lines))

    assets: list[ImageAsset] = []
    while queue:
        latest_lines, prev_lines = queue.pop(0)
        frames, replaced = _history_frames(latest_lines, prev_lines, spec)
        payload = frames_to_gif(frames, spec)
        if len(payload) > spec.max_file_bytes and len(latest_lines) > 1:
            mid = len(latest_lines) // 2
            prev_head = prev_lines[:mid] if prev_lines else None
            prev_tail = prev_lines[mid:] if prev_lines else None
            queue.insert(0, (latest_lines[mid:], prev_tail or None))
            queue.insert(0, (latest_lines[:mid], prev_head or None))
            continue
        assets.append(_animated_asset(len(assets), frames, spec, replaced, payload))
    return assets


def render_history_animation(revisions: list[str], spec: RenderSpec) -> ImageAsset:
    """History animation for the first segment."""
    return render_history_segments(revisions, spec)[0]


def blur_fraction(
    now: float,
    created_at: float,
    first_viewed_at: float | None,
    after_first_view: float | None,
    absolute_expiry: float | None,
) -> float:
    """How far along its lifetime a piece of content is, in [0, 1].

    Relative policies measure from the first view; absolute ones from
    creation. Content with only a view limit stays at zero until it expires.
    """
    if after_first_view is not None and first_viewed_at is not None:
        if after_first_view <= 0:
            return 1.0
        return min(1.0, max(0.0, (now - first_viewed_at) / after_first_view))
    if absolute_expiry is not None:
        span = absolute_expiry - created_at
        if span <= 0:
            return 1.0
        return min(1.0, max(0.0, (now - created_at) / span))
    return 0.0
