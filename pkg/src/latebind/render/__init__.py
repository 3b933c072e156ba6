"""Text rasterization: layout, static PNG segments, and GIF animations."""

from .assets import ImageAsset, ImageFormat
from .layout import DEFAULT_SPEC, MAX_FILE_BYTES, MAX_HEIGHT, MAX_WIDTH, RenderPlan, RenderSpec, plan_layout
from .motion import (
    BLUR_FRAMES,
    DEFAULT_MAX_BLUR_PX,
    HISTORY_FRAMES,
    blur_fraction,
    render_blur_animation,
    render_blur_segments,
    render_history_animation,
    render_history_segments,
)
from .static import (
    NOTIFICATION_TEXT,
    decode_image,
    render_bar_chart,
    render_notification,
    render_static,
)
from .typeface import register_font

__all__ = [
    "ImageAsset",
    "ImageFormat",
    "RenderPlan",
    "RenderSpec",
    "DEFAULT_SPEC",
    "MAX_WIDTH",
    "MAX_HEIGHT",
    "MAX_FILE_BYTES",
    "plan_layout",
    "render_static",
    "render_notification",
    "render_bar_chart",
    "render_blur_animation",
    "render_blur_segments",
    "render_history_animation",
    "render_history_segments",
    "blur_fraction",
    "decode_image",
    "register_font",
    "NOTIFICATION_TEXT",
    "BLUR_FRAMES",
    "HISTORY_FRAMES",
    "DEFAULT_MAX_BLUR_PX",
]
