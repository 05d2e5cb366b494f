"""Edge weights and graph partitioning with a disjoint-set forest."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._accel import njit, pick
from .depth_prep import depth_difference_edges

WEIGHT_MODES = ("w1", "w2", "auto")


@dataclass
class SegParams:
    gamma: float = 0.0016
    k_dv: float = 4.5
    k_ds: float = 0.1
    k_x: float = 7.5
    k_y: float = 1.5
    k_s: float = 0.5
    k_b: float = 0.66
    weight_mode: str = "auto"
    min_region_size: int = 50
    connectivity: int = 8

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        for name in ("k_dv", "k_ds", "k_x", "k_y", "k_s", "k_b"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.weight_mode not in WEIGHT_MODES:
            raise ValueError(f"weight_mode must be one of {WEIGHT_MODES}")
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")


def color_difference(vi, vj, k_dv: float = 4.5, k_ds: float = 0.1):
    """Normalized HSV distance between pixels ``(h, s, v)``, clamped to 1.

    Works on single pixels or on arrays with a trailing axis of 3.
    """
    vi = np.asarray(vi, dtype=np.float64)
    vj = np.asarray(vj, dtype=np.float64)
    d_v = k_dv * np.abs(vi[..., 2] - vj[..., 2])
    d_h = np.abs(vi[..., 0] - vj[..., 0])
    theta = np.where(d_h < 180.0, d_h, 360.0 - d_h)
    si, sj = vi[..., 1], vj[..., 1]
    # rounding can push the radicand a hair below zero when si == sj
    d_s = k_ds * np.sqrt(np.maximum(si * si + sj * sj - 2.0 * si * sj * np.cos(np.radians(theta)), 0.0))
    raw = np.sqrt(d_v * d_v + d_s * d_s) / np.sqrt(k_dv * k_dv + k_ds * k_ds)
    out = np.minimum(raw, 1.0)
    return float(out) if out.ndim == 0 else out


def _coupled(depth, cue):
    # 0 ** (1 + d) is 0 for every d in [0, 1]
    return depth * np.power(cue, 1.0 + depth)


def weight_w1(d_hsv, d_depth, d_sal, k_x: float, k_y: float, k_s: float):
    """Color + depth + saliency weight, normalized to ``[0, 1]``."""
    d_hsv = np.asarray(d_hsv, dtype=np.float64)
    d_depth = np.asarray(d_depth, dtype=np.float64)
    d_sal = np.asarray(d_sal, dtype=np.float64)
    num = (
        k_y * np.log2(1.0 + d_hsv)
        + k_x * np.log2(1.0 + d_depth)
        + _coupled(d_depth, d_sal)
        + _coupled(d_depth, d_hsv)
        + k_s * np.log2(1.0 + d_sal)
    )
    # same summation order as the numerator so w(1, 1, 1) is exactly 1
    w = num / (k_y + k_x + 1.0 + 1.0 + k_s)
    return float(w) if w.ndim == 0 else w


def weight_w2(d_hsv, d_depth, d_bound, k_x: float, k_b: float):
    """Depth-gated color weight plus a boundary bias, normalized to ``[0, 1]``."""
    d_hsv = np.asarray(d_hsv, dtype=np.float64)
    d_depth = np.asarray(d_depth, dtype=np.float64)
    d_bound = np.asarray(d_bound, dtype=np.float64)
    w = (k_x * d_depth * np.log2(1.0 + d_hsv) + k_b * d_bound) / (k_x + k_b)
    return float(w) if w.ndim == 0 else w


@dataclass
class WeightedGridGraph:
    shape: tuple[int, int]
    i: np.ndarray
    j: np.ndarray
    w: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.shape[0] * self.shape[1]

    @property
    def n_edges(self) -> int:
        return len(self.w)


def grid_edges(h: int, w: int, connectivity: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Flat index pairs of the pixel lattice, in a fixed order.

    Right neighbours come first, then down, then the two diagonals
    (down-right, down-left). Edge order is the tie-breaker during
    segmentation, so it is part of the contract.
    """
    idx = np.arange(h * w, dtype=np.int64).reshape(h, w)
    pairs = [(idx[:, :-1], idx[:, 1:]), (idx[:-1, :], idx[1:, :])]
    if connectivity == 8:
        pairs += [(idx[:-1, :-1], idx[1:, 1:]), (idx[:-1, 1:], idx[1:, :-1])]
    i = np.concatenate([a.ravel() for a, _ in pairs])
    j = np.concatenate([b.ravel() for _, b in pairs])
    return i, j


@dataclass
class FrameCues:
    """Per-pixel inputs to the weight functions."""

    hsv: np.ndarray
    depth: np.ndarray  # smoothed, meters, 0 = missing
    saliency: np.ndarray | None = None  # after the power law
    boundary: np.ndarray | None = None  # final boundary map
    d_max: float = 10.0


def edge_cues(cues: FrameCues, i: np.ndarray, j: np.ndarray, params: SegParams) -> dict:
    hsv = cues.hsv.reshape(-1, 3)
    out = {
        "hsv": color_difference(hsv[i], hsv[j], params.k_dv, params.k_ds),
        "depth": depth_difference_edges(cues.depth.ravel(), i, j, cues.d_max),
    }
    if cues.saliency is not None:
        sal = cues.saliency.ravel()
        out["sal"] = np.maximum(sal[i], sal[j])
    if cues.boundary is not None:
        out["bound"] = edge_boundary(cues.boundary, i, j)
    return out


def edge_boundary(boundary: np.ndarray, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    """Boundary cue per edge: the larger endpoint value.

    A diagonal edge also counts as crossing the boundary when both pixels of
    the opposite diagonal are boundary pixels; otherwise a one-pixel-wide
    diagonal contour would leave a zero-cost gap between the regions.
    """
    b = np.asarray(boundary, dtype=bool)
    w = b.shape[1]
    flat = b.ravel()
    yi, xi = np.divmod(i, w)
    yj, xj = np.divmod(j, w)
    crossed = flat[yi * w + xj] & flat[yj * w + xi]
    return (flat[i] | flat[j] | crossed).astype(np.float64)


def build_grid_graph(cues: FrameCues, params: SegParams, mode: str | None = None) -> WeightedGridGraph:
    """Weighted 8- (or 4-) connected pixel graph.

    ``mode`` is ``"w1"`` or ``"w2"``; it defaults to ``params.weight_mode``
    which must then already be resolved. Per-vertex cues (saliency, boundary)
    are taken as the larger of the two endpoint values.
    """
    mode = mode or params.weight_mode
    h, w = cues.depth.shape
    if cues.hsv.shape[:2] != (h, w):
        raise ValueError("cue maps differ in size")
    i, j = grid_edges(h, w, params.connectivity)
    c = edge_cues(cues, i, j, params)
    if mode == "w1":
        if "sal" not in c:
            raise ValueError("w1 needs a saliency map")
        wts = weight_w1(c["hsv"], c["depth"], c["sal"], params.k_x, params.k_y, params.k_s)
    elif mode == "w2":
        if "bound" not in c:
            raise ValueError("w2 needs a boundary map")
        wts = weight_w2(c["hsv"], c["depth"], c["bound"], params.k_x, params.k_b)
    else:
        raise ValueError(f"unresolved weight mode {mode!r}")
    return WeightedGridGraph((h, w), i, j, np.clip(wts, 0.0, 1.0))


def _segment_loop(n, ei, ej, ew, gamma, min_size):
    parent = np.arange(n)
    rank = np.zeros(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    internal = np.zeros(n)
    thresh = np.full(n, gamma)
    m = ei.shape[0]
    for phase in range(2):
        if phase == 1 and min_size <= 1:
            break
        for k in range(m):
            # find with path compression, inlined so the loop compiles as is
            a = ei[k]
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            b = ej[k]
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a == b:
                continue
            wk = ew[k]
            if phase == 0:
                if wk > thresh[a] or wk > thresh[b]:
                    continue
            elif size[a] >= min_size and size[b] >= min_size:
                continue
            if rank[a] < rank[b]:
                a, b = b, a
            parent[b] = a
            if rank[a] == rank[b]:
                rank[a] += 1
            size[a] += size[b]
            internal[a] = max(internal[a], internal[b], wk)
            thresh[a] = internal[a] + gamma / size[a]
    roots = np.empty(n, dtype=np.int64)
    for v in range(n):
        r = v
        while parent[r] != r:
            r = parent[r]
        roots[v] = r
    return roots


_segment = pick(njit(_segment_loop), _segment_loop)


@dataclass
class Segmentation:
    labels: np.ndarray  # (H, W) int64 region ids 0..n-1 in raster order of first pixel
    n_regions: int = field(init=False)

    def __post_init__(self):
        self.n_regions = int(self.labels.max()) + 1 if self.labels.size else 0

    def region_pixels(self) -> list[np.ndarray]:
        """Flat pixel indices of each region, ordered by id."""
        flat = self.labels.ravel()
        order = np.argsort(flat, kind="stable")
        bounds = np.searchsorted(flat[order], np.arange(self.n_regions + 1))
        return [order[bounds[k]:bounds[k + 1]] for k in range(self.n_regions)]


def relabel_raster(roots: np.ndarray) -> np.ndarray:
    """Map arbitrary ids to 0..n-1 by order of first appearance."""
    _, first, inverse = np.unique(roots, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse.ravel()]


def segment_graph(g: WeightedGridGraph, gamma: float, min_region_size: int = 0) -> Segmentation:
    """Greedy region merging over edges sorted by weight.

    An edge joins its two regions when its weight is at most
    ``internal + gamma / size`` for both, where ``internal`` is the largest
    weight merged into that region so far. Ties are processed in edge-index
    order. Regions smaller than ``min_region_size`` are afterwards merged
    along the cheapest remaining edges.
    """
    order = np.argsort(g.w, kind="stable")
    roots = _segment(
        g.n_vertices,
        np.ascontiguousarray(g.i[order]),
        np.ascontiguousarray(g.j[order]),
        np.ascontiguousarray(g.w[order], dtype=np.float64),
        float(gamma),
        int(min_region_size),
    )
    labels = relabel_raster(np.asarray(roots)).reshape(g.shape)
    return Segmentation(labels)


@dataclass
class Region:
    id: int
    pixels: np.ndarray  # flat indices
    ys: np.ndarray
    xs: np.ndarray

    @property
    def size(self) -> int:
        return len(self.pixels)

    @property
    def bbox(self) -> tuple[int, int, int, int]:
        """``(x0, y0, x1, y1)`` inclusive."""
        return int(self.xs.min()), int(self.ys.min()), int(self.xs.max()), int(self.ys.max())

    def mask(self, shape) -> np.ndarray:
        m = np.zeros(shape[0] * shape[1], dtype=bool)
        m[self.pixels] = True
        return m.reshape(shape)


def extract_regions(seg: Segmentation) -> list[Region]:
    w = seg.labels.shape[1]
    return [
        Region(k, px, px // w, px % w)
        for k, px in enumerate(seg.region_pixels())
    ]
