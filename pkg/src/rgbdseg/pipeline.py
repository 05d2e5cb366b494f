"""End-to-end segmentation of one RGB-D frame."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import boundary, depth_prep, graphseg, postproc, saliency
from .config import PipelineConfig
from .imgcore import rgb_to_hsv
from .io_datasets import FramePair


@dataclass
class PipelineResult:
    segmentation: graphseg.Segmentation
    accepted: list[postproc.Verdict]
    rejected: list[postproc.Verdict]
    mode: str
    inpainted: bool
    timings: dict[str, float]
    intermediates: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def accepted_masks(self) -> list[np.ndarray]:
        shape = self.segmentation.labels.shape
        return [v.region.mask(shape) for v in self.accepted]


class _Timer:
    def __init__(self):
        self.timings: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - t0


def resolve_mode(weight_mode: str, stats: depth_prep.ShadowStats, params: depth_prep.DepthParams) -> str:
    if weight_mode != "auto":
        return weight_mode
    return "w2" if depth_prep.use_inpainting(stats, params) else "w1"


def run_pipeline(frame: FramePair, cfg: PipelineConfig | None = None,
                 keep_intermediates: bool = False) -> PipelineResult:
    """Segment one frame and filter the regions.

    Stages: depth smoothing, shadow statistics and optional in-painting,
    saliency (w1 only), boundary maps (w2 only), graph construction,
    partitioning and post-processing. ``timings`` holds wall-clock seconds
    per stage plus ``total``.
    """
    cfg = cfg or PipelineConfig()
    timer = _Timer()
    t_start = time.perf_counter()
    inter = {}

    with timer.stage("smoothing"):
        area = depth_prep.smoothing_area_map(frame.depth, cfg.depth)
        ds = depth_prep.smooth_depth(frame.depth, area)

    with timer.stage("shadows"):
        stats = depth_prep.shadow_stats(frame.depth)
        mode = resolve_mode(cfg.seg.weight_mode, stats, cfg.depth)
        inpainted = mode == "w2"
        if inpainted:
            ds = depth_prep.inpaint_small_holes(
                ds, cfg.depth.max_hole_area, cfg.depth.inpaint_tol, cfg.depth.inpaint_max_iter
            )

    with timer.stage("color"):
        hsv = rgb_to_hsv(frame.rgb)

    cues = graphseg.FrameCues(hsv=hsv, depth=ds, d_max=cfg.depth.d_max)
    if mode == "w1":
        with timer.stage("saliency"):
            sal = saliency.compute_saliency(frame.rgb, cfg.saliency.sigma, cfg.saliency.scales)
            cues.saliency = saliency.power_law(sal)
        inter["saliency"] = cues.saliency
    else:
        with timer.stage("boundary"):
            edges = boundary.classify_edges(frame.rgb, ds, frame.intrinsics, cfg.boundary)
            cues.boundary = edges.final
        inter.update(
            edges=edges.edges,
            depth_boundary=edges.depth_boundary,
            contact_boundary=edges.contact_boundary,
            final_boundary=cues.boundary,
        )

    with timer.stage("graph"):
        g = graphseg.build_grid_graph(cues, cfg.seg, mode)

    with timer.stage("segment"):
        seg = graphseg.segment_graph(g, cfg.seg.gamma, cfg.seg.min_region_size)

    with timer.stage("postproc"):
        regions = graphseg.extract_regions(seg)
        stats_list = [postproc.region_stats(r, hsv[..., 2], frame.depth, ds) for r in regions]
        accepted, rejected = postproc.reject_regions(regions, stats_list, cfg.reject, inpainted)

    timer.timings["total"] = time.perf_counter() - t_start
    if keep_intermediates:
        inter["smoothed_depth"] = ds
        inter["weights"] = g.w
    else:
        inter = {}
    return PipelineResult(seg, accepted, rejected, mode, inpainted, timer.timings, inter)
