"""Rendered image records."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace


class ImageFormat(str, enum.Enum):
    STATIC = "png"
    ANIMATED = "gif"

    @property
    def content_type(self) -> str:
        return "image/png" if self is ImageFormat.STATIC else "image/gif"


@dataclass(frozen=True)
class ImageAsset:
    """One rendered image segment at a specific revision.

    Renderers emit assets with blank identity (content_id ""/revision 0);
    the store stamps identity and created_at when a revision commits.
    """

    segment_index: int
    format: ImageFormat
    width: int
    height: int
    payload: bytes
    content_id: str = ""
    revision: int = 0
    created_at: float = 0.0
    replaced_glyphs: bool = False

    @property
    def byte_length(self) -> int:
        return len(self.payload)

    def stamped(self, content_id: str, revision: int, created_at: float) -> "ImageAsset":
        return replace(self, content_id=content_id, revision=revision, created_at=created_at)
