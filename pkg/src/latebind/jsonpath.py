"""Tiny dotted/indexed path language for pulling one value out of JSON.

Examples: "kwh", "report.kwh", "report.series[0].total", "[2].name".
That is the whole grammar — anything fancier belongs in the data source,
not in an email toolchain.
"""

from __future__ import annotations

from .errors import LateBindError


class PathError(LateBindError, ValueError):
    """Malformed path expression."""


class ExtractError(LateBindError, KeyError):
    """Path does not resolve against the document."""

    def __str__(self) -> str:
        return Exception.__str__(self)


Step = str | int


def parse_path(path: str) -> list[Step]:
    if not isinstance(path, str) or not path.strip():
        raise PathError("empty path")
    steps: list[Step] = []
    i = 0
    text = path.strip()
    need_key = not text.startswith("[")
    while i < len(text):
        ch = text[i]
        if ch == "[":
            if need_key and steps:
                raise PathError(f"'.' must be followed by a key in {path!r}")
            end = text.find("]", i)
            if end == -1:
                raise PathError(f"unclosed [ in {path!r}")
            body = text[i + 1 : end]
            if not body or not (body.isdigit() or (body[0] == "-" and body[1:].isdigit())):
                raise PathError(f"index must be an integer in {path!r}")
            steps.append(int(body))
            i = end + 1
            need_key = False
            continue
        if ch == ".":
            if need_key:
                raise PathError(f"unexpected '.' in {path!r}")
            i += 1
            need_key = True
            continue
        end = i
        while end < len(text) and text[end] not in ".[":
            end += 1
        steps.append(text[i:end])
        i = end
        need_key = False
    if need_key:
        raise PathError(f"path ends with '.' in {path!r}")
    return steps


def extract(document, path: str | list[Step]):
    steps = parse_path(path) if isinstance(path, str) else path
    current = document
    for step in steps:
        if isinstance(step, int):
            if not isinstance(current, list):
                raise ExtractError(f"cannot index non-array with [{step}]")
            if not -len(current) <= step < len(current):
                raise ExtractError(f"index {step} out of range")
            current = current[step]
        else:
            if not isinstance(current, dict) or step not in current:
                raise ExtractError(f"no key {step!r}")
            current = current[step]
    return current


def format_value(value) -> str:
    """Scalar form used for template substitution."""
    if value is None:
        raise ExtractError("path resolved to null")
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    if isinstance(value, (int, float, str)):
        return str(value)
    raise ExtractError(f"path resolved to a {type(value).__name__}, not a scalar")
