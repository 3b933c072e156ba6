"""HTML fragments senders paste into their email body.

One <img> per segment with explicit dimensions (clients that scale images
blur text), absolute URLs, and no alt text by default: stale alt text would
contradict whatever the image currently shows.
"""

from __future__ import annotations

import html
from dataclasses import dataclass
from typing import Optional

from .storage import BoundContent


@dataclass(frozen=True)
class SnippetOptions:
    base_url: str
    include_alt: bool = False
    alt_text: Optional[str] = None


def image_urls(content: BoundContent, base_url: str) -> list[str]:
    base = base_url.rstrip("/")
    return [
        f"{base}/i/{content.content_id}/{i}.{seg['format']}"
        for i, seg in enumerate(content.latest.segments)
    ]


def generate_snippet(content: BoundContent, options: SnippetOptions) -> str:
    tags = []
    for i, (seg, url) in enumerate(zip(content.latest.segments, image_urls(content, options.base_url))):
        alt = ""
        if options.include_alt:
            alt_value = options.alt_text if options.alt_text is not None else "late-bound content"
            alt = f' alt="{html.escape(alt_value, quote=True)}"'
        tags.append(
            f'<img src="{html.escape(url, quote=True)}" '
            f'width="{seg["width"]}" height="{seg["height"]}"{alt} '
            f'style="display:inline-block" border="0"/>'
        )
    return "<br/>".join(tags)
