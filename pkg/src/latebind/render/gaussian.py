"""Separable Gaussian blur over uint8 rasters.

sigma equals the requested blur radius; the kernel is truncated at three
sigma and renormalized. Edges are handled by replicating border pixels once
over the whole image, so the row and column passes compose to exactly the
dense 2-D convolution.
"""

from __future__ import annotations

import math

import numpy as np


def kernel_1d(radius: float) -> np.ndarray:
    if radius <= 0:
        return np.array([1.0])
    half = max(1, math.ceil(3.0 * radius))
    xs = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(xs**2) / (2.0 * radius * radius))
    return k / k.sum()


def blur_channel(channel: np.ndarray, radius: float) -> np.ndarray:
    """Blur one float64 H x W channel; returns float64."""
    k = kernel_1d(radius)
    if k.size == 1:
        return channel.astype(np.float64)
    half = k.size // 2
    padded = np.pad(channel.astype(np.float64), half, mode="edge")
    rows = np.apply_along_axis(np.convolve, 1, padded, k, mode="valid")
    cols = np.apply_along_axis(np.convolve, 0, rows, k, mode="valid")
    return cols


def blur_u8(image: np.ndarray, radius: float) -> np.ndarray:
    """Blur a uint8 array of shape (H, W) or (H, W, C)."""
    if radius <= 0:
        return image.copy()
    if image.ndim == 2:
        out = blur_channel(image, radius)
        return np.clip(np.rint(out), 0, 255).astype(np.uint8)
    planes = [blur_channel(image[:, :, c], radius) for c in range(image.shape[2])]
    out = np.stack(planes, axis=2)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)
