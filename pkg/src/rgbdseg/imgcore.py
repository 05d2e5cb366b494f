"""Image containers, color conversion, integral images and back-projection.

Images are plain numpy arrays:

* RGB images are ``(H, W, 3)`` ``uint8``.
* HSV images are ``(H, W, 3)`` ``float64`` with hue in degrees ``[0, 360)``,
  saturation and value in ``[0, 1]``.
* Depth maps are ``(H, W)`` ``float64`` in meters, ``0`` meaning missing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NoDepthError(ValueError):
    """Raised when a pixel without depth is back-projected."""


def as_rgb(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError("image dimensions must be positive")
    return arr.astype(np.uint8, copy=False)


def as_depth(depth) -> np.ndarray:
    arr = np.asarray(depth, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty (H, W) depth map, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("depth map contains non-finite values")
    if np.any(arr < 0):
        raise ValueError("depth map contains negative values")
    return arr


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")

    def scaled(self, factor: float) -> "CameraIntrinsics":
        """Intrinsics for an image resized by ``factor`` (pixel-center aligned)."""
        return CameraIntrinsics(
            self.fx * factor,
            self.fy * factor,
            (self.cx + 0.5) * factor - 0.5,
            (self.cy + 0.5) * factor - 0.5,
        )


# Kinect-era VGA defaults.
DEFAULT_INTRINSICS = CameraIntrinsics(525.0, 525.0, 319.5, 239.5)


def rgb_to_hsv(img) -> np.ndarray:
    """Hexcone RGB -> HSV. Hue of achromatic pixels is 0."""
    rgb = as_rgb(img).astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=2)
    c = v - rgb.min(axis=2)
    s = np.divide(c, v, out=np.zeros_like(v), where=v > 0)

    safe_c = np.where(c > 0, c, 1.0)
    h = np.zeros_like(v)
    is_r = (v == r) & (c > 0)
    is_g = (v == g) & (c > 0) & ~is_r
    is_b = (c > 0) & ~is_r & ~is_g
    h[is_r] = (60.0 * (g - b) / safe_c)[is_r]
    h[is_g] = (60.0 * (b - r) / safe_c + 120.0)[is_g]
    h[is_b] = (60.0 * (r - g) / safe_c + 240.0)[is_b]
    h = np.mod(h, 360.0)
    # mod can round -tiny up to exactly 360
    h[h >= 360.0] = 0.0
    return np.stack([h, s, v], axis=2)


@dataclass(frozen=True)
class IntegralImage:
    """Summed-area table with a zero first row and column.

    ``table[y, x]`` is the sum of the source over ``[0, y) x [0, x)``.
    """

    table: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        h, w = self.table.shape
        return h - 1, w - 1


def build_integral(src, mask_zero_as_missing: bool = False) -> IntegralImage:
    """Build an integral image in double precision.

    With ``mask_zero_as_missing`` the table counts zero-valued pixels instead
    of summing values (the integral of the binary missing-depth mask).
    """
    arr = np.asarray(src, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError("integral source must be a non-empty 2-D map")
    if mask_zero_as_missing:
        arr = (arr == 0).astype(np.float64)
    h, w = arr.shape
    table = np.zeros((h + 1, w + 1), dtype=np.float64)
    np.cumsum(arr, axis=0, out=table[1:, 1:])
    np.cumsum(table[1:, 1:], axis=1, out=table[1:, 1:])
    return IntegralImage(table)


def _window(shape, y, x, r):
    h, w = shape
    y0 = np.clip(np.asarray(y) - r, 0, h)
    y1 = np.clip(np.asarray(y) + r + 1, 0, h)
    x0 = np.clip(np.asarray(x) - r, 0, w)
    x1 = np.clip(np.asarray(x) + r + 1, 0, w)
    return y0, y1, x0, x1


def box_sum(integral: IntegralImage, center: tuple[int, int], r: int) -> tuple[float, int]:
    """Sum over the ``(2r+1)^2`` window at ``center=(y, x)``, shrunk at borders.

    Returns ``(sum, effective_pixel_count)``.
    """
    y, x = center
    y0, y1, x0, x1 = _window(integral.shape, y, x, r)
    t = integral.table
    s = t[y1, x1] - t[y0, x1] - t[y1, x0] + t[y0, x0]
    return float(s), int((y1 - y0) * (x1 - x0))


def box_sums(integral: IntegralImage, radius) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`box_sum` for every pixel.

    ``radius`` is a scalar or a per-pixel integer map. Returns per-pixel sums
    and effective window areas.
    """
    h, w = integral.shape
    yy, xx = np.indices((h, w))
    r = np.broadcast_to(np.asarray(radius, dtype=np.int64), (h, w))
    y0, y1, x0, x1 = _window((h, w), yy, xx, r)
    t = integral.table
    s = t[y1, x1] - t[y0, x1] - t[y1, x0] + t[y0, x0]
    return s, (y1 - y0) * (x1 - x0)


def box_mean(src, r: int) -> np.ndarray:
    """Clamped-window box mean of a scalar map."""
    s, n = box_sums(build_integral(src), r)
    return s / n


def backproject(pixel: tuple[float, float], depth: float, K: CameraIntrinsics) -> np.ndarray:
    """Camera-frame point (X right, Y down, Z along the optical axis)."""
    if depth <= 0:
        raise NoDepthError(f"no-depth pixel at {pixel}")
    y, x = pixel
    return np.array([(x - K.cx) * depth / K.fx, (y - K.cy) * depth / K.fy, depth])


def backproject_many(ys, xs, depths, K: CameraIntrinsics) -> np.ndarray:
    """Back-project arrays of pixels; rows with zero depth come out as zeros."""
    d = np.asarray(depths, dtype=np.float64)
    pts = np.empty(d.shape + (3,))
    pts[..., 0] = (np.asarray(xs) - K.cx) * d / K.fx
    pts[..., 1] = (np.asarray(ys) - K.cy) * d / K.fy
    pts[..., 2] = d
    return pts


def project(point, K: CameraIntrinsics) -> tuple[float, float]:
    """Inverse of :func:`backproject`, returns ``(y, x)``."""
    X, Y, Z = point
    return K.cy + K.fy * Y / Z, K.cx + K.fx * X / Z
