"""Region statistics and the rejection chain applied to candidate regions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphseg import Region

N_BINS = 32


@dataclass
class RejectionConfig:
    lambda1_max: float = 20000.0
    lambda2_max: float = 12000.0
    ecc_max: float = 0.98
    missing_max: float = 0.30
    dark_bins: int = 3
    dark_frac: float = 0.30
    reach_max: float = 1.5

    def __post_init__(self):
        for name, value in vars(self).items():
            if value <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class RegionStats:
    size: int
    centroid: tuple[float, float]  # (x, y)
    lambda1: float
    lambda2: float
    eccentricity: float
    axes: np.ndarray | None = None  # columns are principal directions (x, y)
    missing_depth_fraction: float = 0.0
    brightness_hist: np.ndarray = field(default_factory=lambda: np.zeros(N_BINS, dtype=np.int64))
    mean_depth: float = float("nan")


def region_pca(ys, xs) -> RegionStats:
    """Covariance eigen-analysis of pixel coordinates.

    Uses the population covariance, so an ``n x n`` square has
    ``lambda = (n**2 - 1) / 12`` on both axes.
    """
    ys = np.asarray(ys, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    n = len(xs)
    if n == 0:
        return RegionStats(0, (float("nan"), float("nan")), 0.0, 0.0, 0.0)
    centroid = (float(xs.mean()), float(ys.mean()))
    if n < 2:
        return RegionStats(n, centroid, 0.0, 0.0, 0.0)
    pts = np.stack([xs - centroid[0], ys - centroid[1]])
    cov = pts @ pts.T / n
    evals, evecs = np.linalg.eigh(cov)
    l2, l1 = np.maximum(evals, 0.0)
    ecc = float(np.sqrt(max(1.0 - l2 / l1, 0.0))) if l1 > 0 else 0.0
    return RegionStats(n, centroid, float(l1), float(l2), ecc, evecs[:, ::-1])


def brightness_histogram(value: np.ndarray) -> np.ndarray:
    """32-bin histogram of HSV value scaled to 0..255 (bins 8 levels wide)."""
    levels = np.clip(np.floor(np.asarray(value) * 255.0 + 0.5), 0, 255)
    return np.bincount((levels // 8).astype(np.int64), minlength=N_BINS)


def region_stats(region: Region, value: np.ndarray, raw_depth: np.ndarray,
                 depth: np.ndarray) -> RegionStats:
    """Shape, brightness and depth statistics of one region.

    ``value`` is the HSV value channel in ``[0, 1]``; ``raw_depth`` decides the
    missing-depth fraction and ``depth`` (the processed map) the mean depth.
    """
    st = region_pca(region.ys, region.xs)
    px = region.pixels
    st.brightness_hist = brightness_histogram(value.ravel()[px])
    st.missing_depth_fraction = float(np.mean(raw_depth.ravel()[px] == 0))
    d = depth.ravel()[px]
    d = d[d > 0]
    st.mean_depth = float(d.mean()) if len(d) else float("nan")
    return st


def rejection_reasons(st: RegionStats, cfg: RejectionConfig, inpainted: bool) -> list[str]:
    """Every gate the region fails; an empty list means accepted."""
    reasons = []
    if st.lambda1 > cfg.lambda1_max:
        reasons.append("lambda1")
    if st.lambda2 > cfg.lambda2_max:
        reasons.append("lambda2")
    if st.eccentricity > cfg.ecc_max:
        reasons.append("eccentricity")
    if not inpainted and st.missing_depth_fraction > cfg.missing_max:
        reasons.append("missing-depth")
    if st.size and st.brightness_hist[:cfg.dark_bins].sum() >= cfg.dark_frac * st.size:
        reasons.append("dark")
    if np.isfinite(st.mean_depth) and st.mean_depth > cfg.reach_max:
        reasons.append("reach")
    return reasons


@dataclass
class Verdict:
    region: Region
    stats: RegionStats
    reasons: list[str]

    @property
    def accepted(self) -> bool:
        return not self.reasons


def reject_regions(regions, stats, cfg: RejectionConfig | None = None,
                   inpainted: bool = False) -> tuple[list[Verdict], list[Verdict]]:
    """Split regions into ``(accepted, rejected)`` verdict lists."""
    cfg = cfg or RejectionConfig()
    accepted, rejected = [], []
    for region, st in zip(regions, stats):
        v = Verdict(region, st, rejection_reasons(st, cfg, inpainted))
        (accepted if v.accepted else rejected).append(v)
    return accepted, rejected
