"""Minimal GIF89a writer.

Every frame is stored in full (no delta optimization and no merging of
identical frames), so a 10-frame animation always decodes to 10 frames even
when the frames are pixel-identical. One global palette is shared by all
frames; the NETSCAPE2.0 extension makes the animation loop forever.
"""

from __future__ import annotations

import struct

import numpy as np

MAX_CODE = 4096


def _lzw_compress(indices: bytes, min_code_size: int) -> bytes:
    clear_code = 1 << min_code_size
    end_code = clear_code + 1

    out = bytearray()
    acc = 0
    nbits = 0
    code_size = min_code_size + 1

    def emit(code: int) -> None:
        nonlocal acc, nbits
        acc |= code << nbits
        nbits += code_size
        while nbits >= 8:
            out.append(acc & 0xFF)
            acc >>= 8
            nbits -= 8

    table: dict[int, int] = {}
    next_code = end_code + 1

    emit(clear_code)
    prefix = -1
    for byte in indices:
        if prefix < 0:
            prefix = byte
            continue
        key = (prefix << 8) | byte
        code = table.get(key)
        if code is not None:
            prefix = code
            continue
        emit(prefix)
        table[key] = next_code
        next_code += 1
        if next_code > (1 << code_size) and code_size < 12:
            code_size += 1
        if next_code >= MAX_CODE:
            emit(clear_code)
            table.clear()
            next_code = end_code + 1
            code_size = min_code_size + 1
        prefix = byte
    if prefix >= 0:
        emit(prefix)
    emit(end_code)
    if nbits:
        out.append(acc & 0xFF)
    return bytes(out)


def _blocks(data: bytes) -> bytes:
    out = bytearray()
    for i in range(0, len(data), 255):
        chunk = data[i : i + 255]
        out.append(len(chunk))
        out.extend(chunk)
    out.append(0)
    return bytes(out)


def encode_gif(
    frames: list[np.ndarray],
    palette: list[tuple[int, int, int]],
    delay_cs: int = 10,
    loop: int = 0,
) -> bytes:
    """Encode uint8 index frames (all H x W, same shape) into GIF89a bytes.

    delay_cs is per-frame delay in centiseconds; loop=0 means loop forever.
    """
    if not frames:
        raise ValueError("need at least one frame")
    if not 1 <= len(palette) <= 256:
        raise ValueError("palette must hold 1..256 colors")
    height, width = frames[0].shape

    bits = 1
    while (1 << bits) < len(palette):
        bits += 1
    table_size = 1 << bits
    min_code_size = max(2, bits)

    out = bytearray()
    out.extend(b"GIF89a")
    packed = 0x80 | ((bits - 1) << 4) | (bits - 1)
    out.extend(struct.pack("<HHBBB", width, height, packed, 0, 0))
    for idx in range(table_size):
        r, g, b = palette[idx] if idx < len(palette) else (0, 0, 0)
        out.extend((r, g, b))

    out.extend(b"\x21\xff\x0bNETSCAPE2.0\x03\x01")
    out.extend(struct.pack("<H", loop))
    out.append(0)

    for frame in frames:
        if frame.shape != (height, width):
            raise ValueError("all frames must share one canvas size")
        out.extend(b"\x21\xf9\x04")
        out.append(0x04)  # disposal: do not dispose; no transparency
        out.extend(struct.pack("<H", delay_cs))
        out.extend(b"\x00\x00")
        out.extend(b"\x2c")
        out.extend(struct.pack("<HHHH", 0, 0, width, height))
        out.append(0)  # no local palette, not interlaced
        out.append(min_code_size)
        out.extend(_blocks(_lzw_compress(frame.astype(np.uint8).tobytes(), min_code_size)))

    out.append(0x3B)
    return bytes(out)


def palette_for(frames_rgb: list[np.ndarray]) -> tuple[list[np.ndarray], list[tuple[int, int, int]]] | None:
    """Build index frames plus an exact shared palette.

    Returns None when the frames use more than 256 distinct colors combined;
    callers then quantize before encoding.
    """
    stacked = np.concatenate([f.reshape(-1, 3) for f in frames_rgb], axis=0)
    colors, inverse = np.unique(stacked, axis=0, return_inverse=True)
    if len(colors) > 256:
        return None
    palette = [tuple(int(c) for c in rgb) for rgb in colors]
    index_frames = []
    offset = 0
    for f in frames_rgb:
        n = f.shape[0] * f.shape[1]
        index_frames.append(inverse[offset : offset + n].reshape(f.shape[:2]).astype(np.uint8))
        offset += n
    return index_frames, palette
