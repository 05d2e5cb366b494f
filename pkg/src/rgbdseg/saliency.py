"""Center-surround saliency on integral images, plus the power-law sharpening."""

from __future__ import annotations

import numpy as np

from .imgcore import as_rgb, box_sums, build_integral


def opponent_channels(img) -> list[np.ndarray]:
    """Intensity, red-green and blue-yellow channels on a 0..1 scale."""
    rgb = as_rgb(img).astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    return [(r + g + b) / 3.0, r - g, b - 0.5 * (r + g)]


def compute_saliency(img, sigma: float = 8.0, scales=(0, 1, 2)) -> np.ndarray:
    """Saliency map in ``[0, 1]``.

    For each channel and scale ``s`` the absolute difference between the pixel
    and the mean of the surrounding box of half-width ``sigma * 2**s`` is
    accumulated; one integral image per channel serves every scale. The sum
    is min-max normalized, and a constant map normalizes to all zeros.
    """
    if sigma < 1:
        raise ValueError("sigma must be >= 1")
    scales = tuple(scales)
    if not scales:
        raise ValueError("at least one scale is required")
    acc = None
    for chan in opponent_channels(img):
        integral = build_integral(chan)
        for s in scales:
            half = int(round(sigma * 2 ** s))
            total, area = box_sums(integral, half)
            contrast = np.abs(chan - total / area)
            acc = contrast if acc is None else acc + contrast
    lo, hi = acc.min(), acc.max()
    if hi - lo <= 1e-12:
        return np.zeros_like(acc)
    return (acc - lo) / (hi - lo)


def power_law(saliency, exponent: int = 4) -> np.ndarray:
    v = np.asarray(saliency, dtype=np.float64)
    return v ** exponent
