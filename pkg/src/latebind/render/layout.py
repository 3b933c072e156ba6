"""Render parameters and line layout.

plan_layout() turns input text into a lossless plan: a list of
(segment_index, line_text) pairs whose concatenation reproduces the input
byte for byte. Soft wraps carry no terminator; hard line breaks keep their
"\n" attached to the line that ends with them.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from ..errors import InvalidSpec
from .typeface import Typeface, load_typeface

# Safe-display ceiling across tested email clients.
MAX_WIDTH = 299
MAX_HEIGHT = 524
MAX_FILE_BYTES = 200 * 1024

RGBA = tuple[int, int, int, int]

_TOKEN_RE = re.compile(r"\s+|\S+")


def _norm_color(value) -> RGBA:
    if isinstance(value, (list, tuple)):
        channels = tuple(int(c) for c in value)
        if len(channels) == 3:
            channels = channels + (255,)
        if len(channels) != 4 or any(not (0 <= c <= 255) for c in channels):
            raise InvalidSpec(f"bad color {value!r}")
        return channels  # type: ignore[return-value]
    raise InvalidSpec(f"bad color {value!r}")


@dataclass(frozen=True)
class RenderSpec:
    """Typography and budget parameters for text-to-image conversion."""

    font_family: str = "default"
    font_size: int = 14
    text_color: RGBA = (0, 0, 0, 255)
    background_color: RGBA = (255, 255, 255, 255)
    target_width: int = MAX_WIDTH
    max_width: int = MAX_WIDTH
    max_height: int = MAX_HEIGHT
    max_file_bytes: int = MAX_FILE_BYTES
    line_spacing: float = 1.2

    def validate(self) -> "RenderSpec":
        if self.font_size <= 0:
            raise InvalidSpec("font_size must be positive")
        if self.line_spacing < 1.0:
            raise InvalidSpec("line_spacing must be >= 1.0")
        if self.target_width <= 0 or self.max_width <= 0 or self.max_height <= 0:
            raise InvalidSpec("dimensions must be positive")
        if self.target_width > self.max_width:
            raise InvalidSpec("target_width must not exceed max_width")
        if self.max_file_bytes <= 0:
            raise InvalidSpec("max_file_bytes must be positive")
        return self

    def typeface(self) -> Typeface:
        return load_typeface(self.font_family, self.font_size)

    def line_height(self) -> int:
        face = self.typeface()
        return max(math.ceil(self.font_size * self.line_spacing), face.ascent + face.descent)

    def lines_per_segment(self) -> int:
        return max(1, self.max_height // self.line_height())

    @classmethod
    def from_dict(cls, overrides: dict) -> "RenderSpec":
        known = {f for f in cls.__dataclass_fields__}
        bad = set(overrides) - known
        if bad:
            raise InvalidSpec(f"unknown spec fields: {sorted(bad)}")
        kwargs = dict(overrides)
        for key in ("text_color", "background_color"):
            if key in kwargs:
                kwargs[key] = _norm_color(kwargs[key])
        try:
            spec = cls(**kwargs)
        except TypeError as exc:
            raise InvalidSpec(str(exc)) from exc
        return spec.validate()

    def to_dict(self) -> dict:
        return {
            "font_family": self.font_family,
            "font_size": self.font_size,
            "text_color": list(self.text_color),
            "background_color": list(self.background_color),
            "target_width": self.target_width,
            "max_width": self.max_width,
            "max_height": self.max_height,
            "max_file_bytes": self.max_file_bytes,
            "line_spacing": self.line_spacing,
        }


DEFAULT_SPEC = RenderSpec()


@dataclass
class RenderPlan:
    """Deterministic layout record: which line of text lands in which segment."""

    lines: list[tuple[int, str]] = field(default_factory=list)
    segment_count: int = 1

    def segment_lines(self, segment_index: int) -> list[str]:
        return [text for seg, text in self.lines if seg == segment_index]

    def reconstruct(self) -> str:
        return "".join(text for _, text in self.lines)


def _visible(line: str) -> str:
    return line.rstrip()


def _fits(face: Typeface, line: str, limit: int) -> bool:
    return face.line_width(_visible(line)) <= limit


def _break_token(face: Typeface, token: str, limit: int) -> list[str]:
    """Split a token wider than the line at character boundaries, greedily."""
    pieces: list[str] = []
    cur = ""
    cur_w = 0.0
    for ch in token:
        w = face.advance(ch)
        if cur and cur_w + w > limit:
            pieces.append(cur)
            cur, cur_w = ch, w
        else:
            cur += ch
            cur_w += w
    if cur:
        pieces.append(cur)
    return pieces or [""]


def _wrap_hard_line(face: Typeface, content: str, limit: int) -> list[str]:
    if content == "":
        return [""]
    wrapped: list[str] = []
    cur = ""
    for token in _TOKEN_RE.findall(content):
        if token.strip() == "":
            cur += token  # whitespace never forces a wrap; it hides at line end
            continue
        if _fits(face, cur + token, limit):
            cur += token
            continue
        if cur:
            wrapped.append(cur)
            cur = ""
        if _fits(face, token, limit):
            cur = token
        else:
            pieces = _break_token(face, token, limit)
            wrapped.extend(pieces[:-1])
            cur = pieces[-1]
    wrapped.append(cur)
    return wrapped


def plan_layout(text: str, spec: RenderSpec) -> RenderPlan:
    """Wrap text to the target width and pack whole lines into segments.

    The plan is exact: rejoining every line_text in order reproduces the
    input, including all whitespace and hard newlines.
    """
    spec.validate()
    face = spec.typeface()
    limit = spec.target_width

    hard_lines = text.split("\n")
    all_lines: list[str] = []
    for i, content in enumerate(hard_lines):
        pieces = _wrap_hard_line(face, content, limit)
        if i < len(hard_lines) - 1:
            pieces[-1] += "\n"
        all_lines.extend(pieces)

    per_segment = spec.lines_per_segment()
    plan = RenderPlan(
        lines=[(idx // per_segment, line) for idx, line in enumerate(all_lines)],
        segment_count=max(1, math.ceil(len(all_lines) / per_segment)),
    )
    return plan
