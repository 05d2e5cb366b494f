"""Shadow-aware depth smoothing, small-hole in-painting and the depth cue."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ._accel import njit, pick
from .imgcore import as_depth, box_sums, build_integral

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass
class DepthParams:
    alpha: float = 3.0  # kernel half-width per meter of depth
    r_max: int = 8
    t_step: float = 0.05
    d_max: float = 10.0
    max_hole_area: int = 400
    shadow_fraction_max: float = 0.02
    inpaint_tol: float = 1e-4
    inpaint_max_iter: int = 20000


@dataclass(frozen=True)
class ShadowStats:
    shadow_fraction: float
    largest_hole_area: int


def binary_depth_mask(depth) -> np.ndarray:
    """1 where depth is missing, 0 elsewhere."""
    return (as_depth(depth) == 0).astype(np.uint8)


def step_pixels(depth: np.ndarray, t_step: float) -> np.ndarray:
    """Valid pixels having a valid 8-neighbour more than ``t_step`` away in depth."""
    d = as_depth(depth)
    h, w = d.shape
    valid = d > 0
    pad = np.pad(d, 1)
    vpad = np.pad(valid, 1)
    out = np.zeros((h, w), dtype=bool)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            nb = pad[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
            nv = vpad[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
            out |= nv & (np.abs(nb - d) > t_step)
    return out & valid


def smoothing_area_map(depth, params: DepthParams | None = None) -> np.ndarray:
    """Per-pixel smoothing half-width.

    The radius grows linearly with depth (``alpha`` px per meter, capped at
    ``r_max``) and is cut to the chessboard distance to the nearest missing
    pixel or depth-step pixel, so windows never reach across an object edge.
    """
    p = params or DepthParams()
    d = as_depth(depth)
    r = np.clip(np.rint(p.alpha * d), 0, p.r_max).astype(np.int64)
    barrier = (d == 0) | step_pixels(d, p.t_step)
    if barrier.any():
        dist = ndimage.distance_transform_cdt(~barrier, metric="chessboard")
        r = np.minimum(r, dist)
    r[d == 0] = 0
    return r


def smooth_depth(depth, radius) -> np.ndarray:
    """Average valid depths in each pixel's window, ignoring missing ones.

    ``radius`` may be a scalar or a per-pixel map. Windows are clamped at the
    image border. A window without any valid depth leaves the pixel as is.
    """
    d = as_depth(depth)
    radius = np.asarray(radius)
    if radius.ndim and radius.shape != d.shape:
        raise ValueError("smoothing area map does not match the depth map")
    sums, area = box_sums(build_integral(d), radius)
    gamma0, _ = box_sums(build_integral(d, mask_zero_as_missing=True), radius)
    n_valid = area - np.rint(gamma0)
    out = d.copy()
    ok = n_valid > 0
    out[ok] = sums[ok] / n_valid[ok]
    # missing pixels stay missing even if their window has depth
    out[d == 0] = 0.0
    return out


def smooth_depth_unmasked(depth, radius) -> np.ndarray:
    """Plain box average that treats missing pixels as zero depth."""
    d = as_depth(depth)
    sums, area = box_sums(build_integral(d), radius)
    return sums / area


def shadow_stats(depth) -> ShadowStats:
    d = as_depth(depth)
    missing = d == 0
    if not missing.any():
        return ShadowStats(0.0, 0)
    labels, n = ndimage.label(missing, structure=_EIGHT)
    sizes = np.bincount(labels.ravel())[1:]
    return ShadowStats(float(missing.mean()), int(sizes.max()))


def use_inpainting(stats: ShadowStats, params: DepthParams | None = None) -> bool:
    """True when the frame has few enough shadows to in-paint and use w2."""
    p = params or DepthParams()
    return not (
        stats.shadow_fraction > p.shadow_fraction_max
        or stats.largest_hole_area > p.max_hole_area
    )


@njit
def _diffuse_numba(values, fill_idx, nbr_idx, nbr_ok, tol, max_iter):
    n = fill_idx.shape[0]
    cur = np.empty(n)
    for k in range(n):
        cur[k] = values[fill_idx[k]]
    new = np.empty(n)
    for it in range(max_iter):
        delta = 0.0
        for k in range(n):
            acc = 0.0
            cnt = 0
            for j in range(4):
                if nbr_ok[k, j]:
                    acc += values[nbr_idx[k, j]]
                    cnt += 1
            new[k] = acc / cnt
            diff = abs(new[k] - cur[k])
            if diff > delta:
                delta = diff
        for k in range(n):
            cur[k] = new[k]
            values[fill_idx[k]] = new[k]
        if delta < tol:
            return it + 1
    return max_iter


def _diffuse_numpy(values, fill_idx, nbr_idx, nbr_ok, tol, max_iter):
    weights = nbr_ok.astype(np.float64)
    count = weights.sum(axis=1)
    safe_idx = np.where(nbr_ok, nbr_idx, 0)
    cur = values[fill_idx].copy()
    for it in range(max_iter):
        new = (values[safe_idx] * weights).sum(axis=1) / count
        delta = np.abs(new - cur).max() if len(new) else 0.0
        cur = new
        values[fill_idx] = new
        if delta < tol:
            return it + 1
    return max_iter


_diffuse = pick(_diffuse_numba, _diffuse_numpy)


def inpaint_small_holes(depth, max_hole_area: int = 400, tol: float = 1e-4,
                        max_iter: int = 20000) -> np.ndarray:
    """Fill 8-connected missing areas of at most ``max_hole_area`` pixels.

    Holes are seeded with the mean of their valid rim and relaxed by Jacobi
    neighbour averaging (4-neighbourhood) until the largest update drops
    below ``tol``. Valid pixels and larger holes are left untouched.
    """
    d = as_depth(depth).copy()
    missing = d == 0
    if not missing.any():
        return d
    labels, n = ndimage.label(missing, structure=_EIGHT)
    sizes = np.bincount(labels.ravel(), minlength=n + 1)
    valid = ~missing
    ring = ndimage.binary_dilation(missing, structure=_EIGHT) & valid
    # seed value per hole: mean of valid pixels touching it
    seed_sum = np.zeros(n + 1)
    seed_cnt = np.zeros(n + 1)
    grown = ndimage.grey_dilation(labels, footprint=_EIGHT)
    np.add.at(seed_sum, grown[ring], d[ring])
    np.add.at(seed_cnt, grown[ring], 1)
    fillable = np.zeros(n + 1, dtype=bool)
    fillable[1:] = (sizes[1:] <= max_hole_area) & (seed_cnt[1:] > 0)
    if not fillable.any():
        return d

    fill = fillable[labels] & missing
    seeds = np.divide(seed_sum, seed_cnt, out=np.zeros(n + 1), where=seed_cnt > 0)
    d[fill] = seeds[labels[fill]]

    h, w = d.shape
    usable = valid | fill
    ys, xs = np.nonzero(fill)
    nbr_idx = np.empty((len(ys), 4), dtype=np.int64)
    nbr_ok = np.zeros((len(ys), 4), dtype=np.bool_)
    for j, (dy, dx) in enumerate(((-1, 0), (1, 0), (0, -1), (0, 1))):
        ny, nx = ys + dy, xs + dx
        inside = (ny >= 0) & (ny < h) & (nx >= 0) & (nx < w)
        cy, cx = np.clip(ny, 0, h - 1), np.clip(nx, 0, w - 1)
        nbr_idx[:, j] = cy * w + cx
        nbr_ok[:, j] = inside & usable[cy, cx]
    flat = d.ravel()
    _diffuse(flat, ys * w + xs, nbr_idx, nbr_ok, float(tol), int(max_iter))
    return flat.reshape(h, w)


def depth_difference(ds, vi: tuple[int, int], vj: tuple[int, int], d_max: float = 10.0) -> float:
    """Normalized absolute depth difference; 0 when either pixel has no depth."""
    a, b = float(ds[vi]), float(ds[vj])
    if a == 0 or b == 0:
        return 0.0
    return min(abs(a - b) / d_max, 1.0)


def depth_difference_edges(ds_flat: np.ndarray, i: np.ndarray, j: np.ndarray,
                           d_max: float = 10.0) -> np.ndarray:
    """Vectorized :func:`depth_difference` over flat pixel index pairs."""
    a, b = ds_flat[i], ds_flat[j]
    out = np.minimum(np.abs(a - b) / d_max, 1.0)
    out[(a == 0) | (b == 0)] = 0.0
    return out
