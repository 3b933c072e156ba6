"""Text-to-raster conversion under the client-safe size budgets.

Static output is PNG. A segment that encodes over the byte budget is first
palette-reduced, and if that is still not enough its lines are split into
smaller segments and re-rendered.
"""

from __future__ import annotations

import io
import math

import numpy as np
from PIL import Image, ImageDraw

from ..errors import InvalidSpec
from .assets import ImageAsset, ImageFormat
from .layout import RenderPlan, RenderSpec, plan_layout
from .typeface import Typeface

NOTIFICATION_TEXT = {
    "expired": "This content has expired.",
    "deleted": "This content was removed by the sender.",
}

BAR_FRACTION = 0.9  # longest bar relative to target width


def _is_gray(color) -> bool:
    r, g, b, a = color
    return r == g == b and a == 255


def _canvas_mode(spec: RenderSpec) -> str:
    if _is_gray(spec.text_color) and _is_gray(spec.background_color):
        return "L"
    if spec.text_color[3] == 255 and spec.background_color[3] == 255:
        return "RGB"
    return "RGBA"


def _fill(color, mode: str):
    if mode == "L":
        return color[0]
    if mode == "RGB":
        return color[:3]
    return tuple(color)


def draw_lines(lines: list[str], spec: RenderSpec) -> tuple[Image.Image, bool]:
    """Draw wrapped lines onto a fresh canvas sized to their content."""
    face = spec.typeface()
    line_height = spec.line_height()
    drawables: list[str] = []
    replaced_any = False
    max_w = 0.0
    for line in lines:
        drawn, replaced = face.drawable_line(line.rstrip("\n"))
        drawables.append(drawn)
        replaced_any = replaced_any or replaced
        max_w = max(max_w, face.line_width(line.rstrip()))

    width = min(spec.target_width, max(2, math.ceil(max_w) + 1))
    height = max(line_height, line_height * len(lines))

    mode = _canvas_mode(spec)
    img = Image.new(mode, (width, height), _fill(spec.background_color, mode))
    draw = ImageDraw.Draw(img)
    fill = _fill(spec.text_color, mode)
    for row, drawn in enumerate(drawables):
        if drawn:
            draw.text((0, row * line_height), drawn, font=face.pil_font, fill=fill)
    return img, replaced_any


def encode_png(img: Image.Image) -> bytes:
    buf = io.BytesIO()
    img.save(buf, format="PNG", optimize=True)
    return buf.getvalue()


def _palette_reduced(img: Image.Image, colors: int) -> Image.Image:
    base = img.convert("RGB") if img.mode == "RGBA" else img
    return base.convert("P", palette=Image.Palette.ADAPTIVE, colors=colors)


def _encode_within_budget(img: Image.Image, spec: RenderSpec) -> bytes | None:
    """PNG bytes within max_file_bytes, or None if even 4 colors won't fit."""
    payload = encode_png(img)
    if len(payload) <= spec.max_file_bytes:
        return payload
    for colors in (64, 16, 4):
        payload = encode_png(_palette_reduced(img, colors))
        if len(payload) <= spec.max_file_bytes:
            return payload
    return None


def _render_line_groups(groups: list[list[str]], spec: RenderSpec) -> list[ImageAsset]:
    assets: list[ImageAsset] = []
    queue = list(groups)
    while queue:
        lines = queue.pop(0)
        img, replaced = draw_lines(lines, spec)
        payload = _encode_within_budget(img, spec)
        if payload is None and len(lines) > 1:
            mid = len(lines) // 2
            queue.insert(0, lines[mid:])
            queue.insert(0, lines[:mid])
            continue
        if payload is None:
            # single line that still blows the budget: accept the hardest
            # palette reduction rather than dropping content
            payload = encode_png(_palette_reduced(img, 4))
        assets.append(
            ImageAsset(
                segment_index=len(assets),
                format=ImageFormat.STATIC,
                width=img.width,
                height=img.height,
                payload=payload,
                replaced_glyphs=replaced,
            )
        )
    return assets


def render_static(text: str, spec: RenderSpec) -> list[ImageAsset]:
    """Render text into one PNG asset per layout segment."""
    plan = plan_layout(text, spec)
    groups = [plan.segment_lines(i) for i in range(plan.segment_count)]
    return _render_line_groups(groups, spec)


def render_notification(kind: str, spec: RenderSpec) -> ImageAsset:
    """Fixed replacement image shown once content expired or was deleted."""
    try:
        message = NOTIFICATION_TEXT[kind]
    except KeyError:
        raise InvalidSpec(f"unknown notification kind {kind!r}") from None
    assets = render_static(message, spec)
    if len(assets) != 1:
        raise InvalidSpec("notification text must fit a single segment")
    return assets[0]


def render_bar_chart(values: list[float], labels: list[str], spec: RenderSpec) -> ImageAsset:
    """Horizontal bar chart with labels above bars, sized to the width budget."""
    spec.validate()
    if not values or len(values) != len(labels):
        raise InvalidSpec("values and labels must be non-empty and equal length")
    if any(v < 0 for v in values):
        raise InvalidSpec("values must be non-negative")

    face = spec.typeface()
    line_height = spec.line_height()
    bar_height = max(4, spec.font_size // 2 + 3)
    gap = 4
    row_height = line_height + bar_height + gap

    width = spec.target_width
    height = row_height * len(values)
    if height > spec.max_height:
        raise InvalidSpec(
            f"{len(values)} bars need {height}px, over the {spec.max_height}px budget"
        )

    peak = max(values)
    full = round(BAR_FRACTION * spec.target_width)

    mode = _canvas_mode(spec)
    img = Image.new(mode, (width, height), _fill(spec.background_color, mode))
    draw = ImageDraw.Draw(img)
    fill = _fill(spec.text_color, mode)
    for row, (value, label) in enumerate(zip(values, labels)):
        top = row * row_height
        drawn, _ = face.drawable_line(label)
        if drawn:
            draw.text((0, top), drawn, font=face.pil_font, fill=fill)
        bar_len = round(full * value / peak) if peak > 0 else 0
        if bar_len > 0:
            bar_top = top + line_height
            draw.rectangle((0, bar_top, bar_len - 1, bar_top + bar_height - 1), fill=fill)

    payload = _encode_within_budget(img, spec) or encode_png(_palette_reduced(img, 4))
    return ImageAsset(
        segment_index=0,
        format=ImageFormat.STATIC,
        width=img.width,
        height=img.height,
        payload=payload,
    )


def image_to_array(img: Image.Image) -> np.ndarray:
    """uint8 array in the image's own mode (L -> HxW, RGB/RGBA -> HxWxC)."""
    return np.asarray(img, dtype=np.uint8).copy()


def decode_image(payload: bytes) -> Image.Image:
    return Image.open(io.BytesIO(payload))
