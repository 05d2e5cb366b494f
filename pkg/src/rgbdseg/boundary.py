"""Depth-augmented Canny edge classification.

Edges are detected on the HSV value channel with Scharr gradients. Each edge
pixel is then tested for a depth step across it (depth boundary) and for a
roughly right angle between the back-projected surfaces on either side
(contact boundary). Their union is the final boundary map.

Gradient directions use the usual counter-clockwise angle with the image
``y`` axis pointing down, i.e. ``atan2(-gy, gx)``, folded into ``[0, 180)``
and rounded to 0, 45, 90 or 135 degrees. The sampling normal ``n`` for a
direction ``t`` is ``(dx, dy) = (cos t, -sin t)`` in pixel coordinates, so
for horizontal edges ``+n`` points up the image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ._accel import njit, pick
from .imgcore import CameraIntrinsics, as_rgb, backproject_many

ANGLES = np.array([0, 45, 90, 135], dtype=np.int16)
# (dy, dx) unit steps for each discretized direction
_STEPS = np.array([[0, 1], [-1, 1], [-1, 0], [-1, -1]], dtype=np.int64)

_SCHARR_X = np.array([[-3, 0, 3], [-10, 0, 10], [-3, 0, 3]], dtype=np.float64) / 16.0


@dataclass
class BoundaryParams:
    canny_low: float = 40.0
    canny_high: float = 90.0
    eps_rho: int = 3
    t_rho: float = 0.04
    eps_e: int = 5
    t_theta_low: float = 60.0
    t_theta_high: float = 120.0

    def __post_init__(self):
        if not self.canny_low < self.canny_high:
            raise ValueError("canny_low must be below canny_high")
        if not self.t_theta_low < self.t_theta_high:
            raise ValueError("t_theta_low must be below t_theta_high")
        if self.eps_rho < 1 or self.eps_e < 1:
            raise ValueError("sampling offsets must be >= 1 pixel")


@dataclass
class EdgeClassification:
    edges: np.ndarray  # bool, E_E
    theta: np.ndarray  # int16 degrees on edge pixels, -1 elsewhere
    depth_boundary: np.ndarray | None = None  # bool, E_B
    contact_boundary: np.ndarray | None = None  # bool, E_C
    contact_angle: np.ndarray | None = None  # signed degrees, nan where undefined

    @property
    def final(self) -> np.ndarray:
        return final_boundary_map(self.depth_boundary, self.contact_boundary)


def value_channel(img) -> np.ndarray:
    """HSV value on a 0..255 scale."""
    return as_rgb(img).max(axis=2).astype(np.float64)


def scharr_gradients(intensity: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scharr derivatives normalized so a step of height ``a`` peaks at ``a``."""
    gx = ndimage.correlate(intensity, _SCHARR_X, mode="nearest")
    gy = ndimage.correlate(intensity, _SCHARR_X.T, mode="nearest")
    return gx, gy


def discretize_direction(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Index 0..3 into :data:`ANGLES` for each gradient."""
    ang = np.degrees(np.arctan2(-gy, gx)) % 180.0
    return (np.rint(ang / 45.0).astype(np.int64) % 4).astype(np.int8)


@njit
def _nms_numba(mag, direction, steps, low):
    h, w = mag.shape
    out = np.zeros((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            m = mag[y, x]
            if m < low:
                continue
            dy = steps[direction[y, x], 0]
            dx = steps[direction[y, x], 1]
            # order the pair so (ya, xa) comes first in raster order
            if dy > 0 or (dy == 0 and dx > 0):
                dy, dx = -dy, -dx
            ya, xa = y + dy, x + dx
            yb, xb = y - dy, x - dx
            earlier = mag[ya, xa] if 0 <= ya < h and 0 <= xa < w else 0.0
            later = mag[yb, xb] if 0 <= yb < h and 0 <= xb < w else 0.0
            if m > earlier and m >= later:
                out[y, x] = m
    return out


def _nms_numpy(mag, direction, steps, low):
    h, w = mag.shape
    pad = np.pad(mag, 1)
    yy, xx = np.indices((h, w))
    dy = steps[direction, 0]
    dx = steps[direction, 1]
    flip = (dy > 0) | ((dy == 0) & (dx > 0))
    dy = np.where(flip, -dy, dy)
    dx = np.where(flip, -dx, dx)
    earlier = pad[yy + dy + 1, xx + dx + 1]
    later = pad[yy - dy + 1, xx - dx + 1]
    keep = (mag >= low) & (mag > earlier) & (mag >= later)
    return np.where(keep, mag, 0.0)


@njit
def _hysteresis_numba(nms, low, high):
    h, w = nms.shape
    out = np.zeros((h, w), dtype=np.bool_)
    stack = np.empty(h * w, dtype=np.int64)
    top = 0
    for y in range(h):
        for x in range(w):
            if nms[y, x] >= high and not out[y, x]:
                out[y, x] = True
                stack[top] = y * w + x
                top += 1
                while top > 0:
                    top -= 1
                    p = stack[top]
                    py, px = p // w, p % w
                    for dy in range(-1, 2):
                        for dx in range(-1, 2):
                            qy, qx = py + dy, px + dx
                            if 0 <= qy < h and 0 <= qx < w and not out[qy, qx]:
                                if nms[qy, qx] >= low:
                                    out[qy, qx] = True
                                    stack[top] = qy * w + qx
                                    top += 1
    return out


def _hysteresis_numpy(nms, low, high):
    weak = nms >= low
    labels, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
    strong = np.zeros(n + 1, dtype=bool)
    strong[np.unique(labels[nms >= high])] = True
    strong[0] = False
    return strong[labels]


_nms = pick(_nms_numba, _nms_numpy)
_hysteresis = pick(_hysteresis_numba, _hysteresis_numpy)


def scharr_canny(img, params: BoundaryParams | None = None) -> EdgeClassification:
    """Canny edges from Scharr gradients of the value channel."""
    p = params or BoundaryParams()
    gx, gy = scharr_gradients(value_channel(img))
    mag = np.hypot(gx, gy)
    direction = discretize_direction(gx, gy)
    nms = _nms(mag, direction, _STEPS, float(p.canny_low))
    edges = _hysteresis(nms, float(p.canny_low), float(p.canny_high))
    theta = np.where(edges, ANGLES[direction], -1).astype(np.int16)
    return EdgeClassification(edges=edges, theta=theta)


def normal_offsets(theta: np.ndarray, eps: int) -> tuple[np.ndarray, np.ndarray]:
    """Integer ``(dy, dx)`` of ``eps * n`` for each edge direction in degrees."""
    idx = (np.asarray(theta) // 45).astype(np.int64)
    unit = _STEPS[idx].astype(np.float64)
    diag = (idx % 2) == 1
    unit[diag] /= np.sqrt(2.0)
    off = np.rint(unit * eps).astype(np.int64)
    return off[:, 0], off[:, 1]


def _sample(ds, ys, xs):
    """Depth at integer pixels; out-of-bounds samples read as missing."""
    h, w = ds.shape
    inside = (ys >= 0) & (ys < h) & (xs >= 0) & (xs < w)
    vals = np.zeros(len(ys))
    vals[inside] = ds[ys[inside], xs[inside]]
    return vals


def depth_boundary_map(edges: EdgeClassification, ds, params: BoundaryParams | None = None) -> np.ndarray:
    """Edge pixels with a depth step across them.

    An edge is dropped as texture only when both one-sided depth differences
    are measured and below ``t_rho``; any missing sample keeps it.
    """
    p = params or BoundaryParams()
    ds = np.asarray(ds, dtype=np.float64)
    if ds.shape != edges.edges.shape:
        raise ValueError("edge map and depth map differ in size")
    ys, xs = np.nonzero(edges.edges)
    dy, dx = normal_offsets(edges.theta[ys, xs], p.eps_rho)
    center = ds[ys, xs]
    plus = _sample(ds, ys + dy, xs + dx)
    minus = _sample(ds, ys - dy, xs - dx)
    measured = (center > 0) & (plus > 0) & (minus > 0)
    flat = measured & (np.abs(center - plus) < p.t_rho) & (np.abs(center - minus) < p.t_rho)
    out = np.zeros(ds.shape, dtype=bool)
    out[ys, xs] = ~flat
    return out


def contact_angles(p_e, p_plus, p_minus) -> np.ndarray:
    """Signed angle in degrees at ``p_e`` between the rays to its two neighbours.

    The magnitude is ``atan2(|v+ x v-|, v+ . v-)``; it is negated where the
    x component of the cross product is negative (internal boundaries).
    Samples along one image row give an x component that is zero up to
    rounding, so only clearly negative components flip the sign.
    Degenerate inputs give nan.
    """
    p_e = np.atleast_2d(np.asarray(p_e, dtype=np.float64))
    a = np.atleast_2d(np.asarray(p_plus, dtype=np.float64)) - p_e
    b = np.atleast_2d(np.asarray(p_minus, dtype=np.float64)) - p_e
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    ok = (na > 0) & (nb > 0)
    a = a / np.where(ok, na, 1.0)[:, None]
    b = b / np.where(ok, nb, 1.0)[:, None]
    cross = np.cross(a, b)
    dot = np.einsum("ij,ij->i", a, b)
    norm = np.linalg.norm(cross, axis=1)
    theta = np.degrees(np.arctan2(norm, dot))
    theta = np.where(cross[:, 0] < -1e-9 * norm, -theta, theta)
    return np.where(ok, theta, np.nan)


def contact_boundary_map(edges: EdgeClassification, ds, K: CameraIntrinsics,
                         params: BoundaryParams | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Edge pixels where two surfaces meet at a contact-like angle.

    Returns the boolean map and the signed per-pixel angle (nan off the edge
    map or where any of the three samples lacks depth).
    """
    p = params or BoundaryParams()
    ds = np.asarray(ds, dtype=np.float64)
    ys, xs = np.nonzero(edges.edges)
    dy, dx = normal_offsets(edges.theta[ys, xs], p.eps_e)
    d_e = ds[ys, xs]
    d_p = _sample(ds, ys + dy, xs + dx)
    d_m = _sample(ds, ys - dy, xs - dx)
    measured = (d_e > 0) & (d_p > 0) & (d_m > 0)
    theta = contact_angles(
        backproject_many(ys, xs, d_e, K),
        backproject_many(ys + dy, xs + dx, d_p, K),
        backproject_many(ys - dy, xs - dx, d_m, K),
    )
    theta[~measured] = np.nan
    with np.errstate(invalid="ignore"):
        hit = (theta >= p.t_theta_low) & (theta <= p.t_theta_high)
    out = np.zeros(ds.shape, dtype=bool)
    out[ys, xs] = hit
    angle = np.full(ds.shape, np.nan)
    angle[ys, xs] = theta
    return out, angle


def final_boundary_map(depth_boundary, contact_boundary) -> np.ndarray:
    eb = np.asarray(depth_boundary, dtype=bool)
    ec = np.asarray(contact_boundary, dtype=bool)
    if eb.shape != ec.shape:
        raise ValueError("boundary maps differ in size")
    return eb | ec


def classify_edges(img, ds, K: CameraIntrinsics, params: BoundaryParams | None = None) -> EdgeClassification:
    """Run edge detection and both boundary tests."""
    p = params or BoundaryParams()
    ec = scharr_canny(img, p)
    ec.depth_boundary = depth_boundary_map(ec, ds, p)
    ec.contact_boundary, ec.contact_angle = contact_boundary_map(ec, ds, K, p)
    return ec
