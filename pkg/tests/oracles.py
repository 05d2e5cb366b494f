"""Slow, obviously-correct reference implementations used by the tests."""

from __future__ import annotations

from collections import deque

import numpy as np


def canonical(labels) -> tuple:
    """Partition as a tuple of ids renumbered by first appearance."""
    seen, out = {}, []
    for v in np.asarray(labels).ravel().tolist():
        out.append(seen.setdefault(v, len(seen)))
    return tuple(out)


def naive_segment(n, edges, gamma, min_size=0, scan="merged"):
    """Greedy merging with the internal difference recomputed by full scan.

    ``edges`` is a list of ``(i, j, w)``; processing order is ``(w, index)``.
    ``scan="merged"`` takes the internal difference of a region as the largest
    merged edge inside it; ``scan="processed"`` scans every already processed
    edge inside it instead.
    """
    label = list(range(n))
    order = sorted(range(len(edges)), key=lambda k: (edges[k][2], k))
    merged = []
    processed = []

    def internal(r):
        pool = merged if scan == "merged" else processed
        best = 0.0
        for a, b, w in pool:
            if label[a] == r and label[b] == r and w > best:
                best = w
        return best

    def join(la, lb):
        for v in range(n):
            if label[v] == lb:
                label[v] = la

    for k in order:
        a, b, w = edges[k]
        la, lb = label[a], label[b]
        if la != lb:
            sa, sb = label.count(la), label.count(lb)
            if w <= internal(la) + gamma / sa and w <= internal(lb) + gamma / sb:
                join(la, lb)
                merged.append((a, b, w))
        processed.append((a, b, w))
    if min_size > 1:
        for k in order:
            a, b, w = edges[k]
            la, lb = label[a], label[b]
            if la != lb and (label.count(la) < min_size or label.count(lb) < min_size):
                join(la, lb)
    return label


def grid_edge_list(h, w, connectivity=8):
    """Same ordering as the library: right, down, down-right, down-left."""
    out = []
    for y in range(h):
        for x in range(w - 1):
            out.append((y * w + x, y * w + x + 1))
    for y in range(h - 1):
        for x in range(w):
            out.append((y * w + x, (y + 1) * w + x))
    if connectivity == 8:
        for y in range(h - 1):
            for x in range(w - 1):
                out.append((y * w + x, (y + 1) * w + x + 1))
        for y in range(h - 1):
            for x in range(1, w):
                out.append((y * w + x, (y + 1) * w + x - 1))
    return out


def rgbxy_weight(rgb, pairs, w_xy=0.0):
    """Plain RGB+xy feature distance, the classic baseline weight, scaled to [0, 1]."""
    h, w = rgb.shape[:2]
    f = np.concatenate(
        [rgb.reshape(-1, 3) / 255.0, w_xy * np.indices((h, w)).reshape(2, -1).T / max(h, w)], axis=1
    )
    d = np.array([np.linalg.norm(f[i] - f[j]) for i, j in pairs])
    return d / max(d.max(initial=0.0), 1e-12) if len(d) else d


def components(n, pairs, keep):
    """Connected components (BFS) of the subgraph made of ``pairs[k]`` with ``keep[k]``."""
    adj = [[] for _ in range(n)]
    for (i, j), k in zip(pairs, keep):
        if k:
            adj[i].append(j)
            adj[j].append(i)
    label = [-1] * n
    nxt = 0
    for s in range(n):
        if label[s] >= 0:
            continue
        label[s] = nxt
        q = deque([s])
        while q:
            v = q.popleft()
            for u in adj[v]:
                if label[u] < 0:
                    label[u] = nxt
                    q.append(u)
        nxt += 1
    return label


def flood_components(mask, eight=True):
    """Label map of True-pixel components by flood fill; 0 is background."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    out = np.zeros((h, w), dtype=np.int64)
    nbrs = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]
    if not eight:
        nbrs = [(0, 1), (1, 0), (0, -1), (-1, 0)]
    nxt = 0
    for y in range(h):
        for x in range(w):
            if mask[y, x] and not out[y, x]:
                nxt += 1
                out[y, x] = nxt
                q = deque([(y, x)])
                while q:
                    cy, cx = q.popleft()
                    for dy, dx in nbrs:
                        qy, qx = cy + dy, cx + dx
                        if 0 <= qy < h and 0 <= qx < w and mask[qy, qx] and not out[qy, qx]:
                            out[qy, qx] = nxt
                            q.append((qy, qx))
    return out


def naive_box(src, y, x, r):
    """(sum, count) over the clamped window, by double loop."""
    h, w = src.shape
    s, c = 0.0, 0
    for yy in range(max(0, y - r), min(h, y + r + 1)):
        for xx in range(max(0, x - r), min(w, x + r + 1)):
            s += float(src[yy, xx])
            c += 1
    return s, c


def naive_smooth(depth, radius):
    """Masked window mean over valid pixels; missing pixels stay 0."""
    h, w = depth.shape
    out = np.array(depth, dtype=np.float64)
    for y in range(h):
        for x in range(w):
            if depth[y, x] <= 0:
                continue
            r = int(radius[y, x])
            win = depth[max(0, y - r):y + r + 1, max(0, x - r):x + r + 1]
            vals = win[win > 0]
            out[y, x] = vals.mean()
    return out


def hsv_to_rgb(hsv):
    """Inverse hexcone conversion: hue in degrees, s and v in [0, 1]; returns 0..255 floats."""
    hsv = np.asarray(hsv, dtype=np.float64)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    c = v * s
    hp = (h % 360.0) / 60.0
    x = c * (1 - np.abs(hp % 2 - 1))
    zero = np.zeros_like(h)
    sector = np.floor(hp).astype(int) % 6
    table = [(c, x, zero), (x, c, zero), (zero, c, x), (zero, x, c), (x, zero, c), (c, zero, x)]
    rgb = np.zeros(hsv.shape)
    for k, (r_, g_, b_) in enumerate(table):
        m = sector == k
        rgb[..., 0][m], rgb[..., 1][m], rgb[..., 2][m] = r_[m], g_[m], b_[m]
    return (rgb + (v - c)[..., None]) * 255.0
