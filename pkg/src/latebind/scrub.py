"""Sensitive-span detection for the auto-extraction option.

Four built-in detectors (credit cards by Luhn, SSNs, email addresses,
NANP-style phone numbers) plus caller-supplied regexes. Offsets are Python
string indices (Unicode scalar values); results are non-overlapping,
resolved longest-match-first then leftmost, and sorted by start.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

CATEGORIES = ("credit-card", "ssn", "email-address", "phone")

# 13-19 digits, single spaces or dashes allowed between groups, not embedded
# in a longer digit/dash run
_CARD_RE = re.compile(r"(?<![\d-])\d(?:[ -]?\d){12,18}(?![\d-])")
_SSN_RE = re.compile(r"(?<![\d-])(\d{3})-(\d{2})-(\d{4})(?![\d-])")
_EMAIL_RE = re.compile(r"\b[A-Za-z0-9._%+\-]+@[A-Za-z0-9.\-]+\.[A-Za-z]{2,}\b")
_PHONE_RE = re.compile(
    r"(?<![\d-])(?:\+?1[ -.])?(?:\(\d{3}\)[ -.]?|\d{3}[ -.])\d{3}[-.]\d{4}(?![\d-])"
)


@dataclass(frozen=True)
class SensitiveSpan:
    start: int
    end: int  # exclusive
    category: str
    matched_text: str


def luhn_ok(digits: str) -> bool:
    total = 0
    for i, ch in enumerate(reversed(digits)):
        d = int(ch)
        if i % 2 == 1:
            d = d * 2
            if d > 9:
                d -= 9
        total += d
    return total % 10 == 0


def _ssn_valid(area: str, group: str, serial: str) -> bool:
    if area in ("000", "666") or area.startswith("9"):
        return False
    return group != "00" and serial != "0000"


def _candidates(text: str, categories: set[str], custom: dict[str, re.Pattern]) -> list[SensitiveSpan]:
    found: list[SensitiveSpan] = []
    if "credit-card" in categories:
        for m in _CARD_RE.finditer(text):
            digits = re.sub(r"[ -]", "", m.group())
            if 13 <= len(digits) <= 19 and luhn_ok(digits):
                found.append(SensitiveSpan(m.start(), m.end(), "credit-card", m.group()))
    if "ssn" in categories:
        for m in _SSN_RE.finditer(text):
            if _ssn_valid(*m.groups()):
                found.append(SensitiveSpan(m.start(), m.end(), "ssn", m.group()))
    if "email-address" in categories:
        for m in _EMAIL_RE.finditer(text):
            found.append(SensitiveSpan(m.start(), m.end(), "email-address", m.group()))
    if "phone" in categories:
        for m in _PHONE_RE.finditer(text):
            found.append(SensitiveSpan(m.start(), m.end(), "phone", m.group()))
    for name, pattern in custom.items():
        for m in pattern.finditer(text):
            if m.start() < m.end():
                found.append(SensitiveSpan(m.start(), m.end(), name, m.group()))
    return found


def detect(
    text: str,
    categories: set[str] | None = None,
    custom_patterns: dict[str, str | re.Pattern] | None = None,
) -> list[SensitiveSpan]:
    """Non-overlapping sensitive spans, longest match first, then leftmost."""
    chosen = set(categories) if categories is not None else set(CATEGORIES)
    compiled = {
        name: re.compile(p) if isinstance(p, str) else p
        for name, p in (custom_patterns or {}).items()
    }
    candidates = _candidates(text, chosen, compiled)
    candidates.sort(key=lambda s: (-(s.end - s.start), s.start))
    taken: list[SensitiveSpan] = []
    for span in candidates:
        if all(span.end <= t.start or span.start >= t.end for t in taken):
            taken.append(span)
    taken.sort(key=lambda s: s.start)
    return taken


def redact_preview(text: str, spans: list[SensitiveSpan]) -> str:
    """Replace each span with its category marker; everything else unchanged."""
    out = []
    cursor = 0
    for span in sorted(spans, key=lambda s: s.start):
        out.append(text[cursor : span.start])
        out.append(f"⟨{span.category}⟩")
        cursor = span.end
    out.append(text[cursor:])
    return "".join(out)
