"""Detection-rate evaluation against ground-truth object masks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .io_datasets import GroundTruth

OVERLAP_THRESHOLD = 0.70


@dataclass
class FrameEval:
    frame_id: str
    n_objects: int
    matches: list[tuple[int, int, float]]  # (region index, object id, score)
    time_s: float = float("nan")

    @property
    def n_detected(self) -> int:
        return len(self.matches)


@dataclass
class EvalResult:
    frames: list[FrameEval] = field(default_factory=list)

    @property
    def n_objects(self) -> int:
        return sum(f.n_objects for f in self.frames)

    @property
    def n_detected(self) -> int:
        return sum(f.n_detected for f in self.frames)

    @property
    def detection_rate(self) -> float:
        """Percentage of annotated objects detected."""
        return 100.0 * self.n_detected / self.n_objects if self.n_objects else 0.0

    @property
    def mean_frame_time(self) -> float:
        times = [f.time_s for f in self.frames if np.isfinite(f.time_s)]
        return float(np.mean(times)) if times else float("nan")


def overlap_scores(region_masks, object_masks, metric: str = "overlap") -> np.ndarray:
    """Score matrix ``[region, object]``.

    ``overlap`` is ``|R & M| / |M|``; ``iou`` is ``|R & M| / |R | M|``.
    """
    if metric not in ("overlap", "iou"):
        raise ValueError(f"unknown metric {metric!r}")
    if not len(region_masks) or not len(object_masks):
        return np.zeros((len(region_masks), len(object_masks)))
    R = np.stack([np.asarray(m, dtype=bool).ravel() for m in region_masks]).astype(np.float64)
    M = np.stack([np.asarray(m, dtype=bool).ravel() for m in object_masks]).astype(np.float64)
    inter = R @ M.T
    m_size = M.sum(axis=1)
    if metric == "overlap":
        denom = np.broadcast_to(m_size, inter.shape)
    else:
        denom = R.sum(axis=1)[:, None] + m_size[None, :] - inter
    return np.divide(inter, denom, out=np.zeros_like(inter), where=denom > 0)


def match_greedy(scores: np.ndarray, threshold: float = OVERLAP_THRESHOLD) -> list[tuple[int, int, float]]:
    """One-to-one matching by descending score, keeping pairs above ``threshold``.

    Ties are broken by region index then object index.
    """
    pairs = [
        (-scores[r, o], r, o)
        for r in range(scores.shape[0])
        for o in range(scores.shape[1])
        if scores[r, o] > threshold
    ]
    pairs.sort()
    used_r, used_o, out = set(), set(), []
    for neg, r, o in pairs:
        if r in used_r or o in used_o:
            continue
        used_r.add(r)
        used_o.add(o)
        out.append((r, o, -neg))
    return out


def evaluate_frame(region_masks, gt: GroundTruth, metric: str = "overlap",
                   threshold: float = OVERLAP_THRESHOLD) -> FrameEval:
    ids = sorted(gt.masks)
    scores = overlap_scores(region_masks, [gt.masks[k] for k in ids], metric)
    matches = [(r, ids[o], s) for r, o, s in match_greedy(scores, threshold)]
    return FrameEval(gt.frame_id, len(ids), matches)


def evaluate(results, metric: str = "overlap") -> EvalResult:
    """Aggregate ``(region_masks, ground_truth, seconds)`` triples."""
    out = EvalResult()
    for masks, gt, t in results:
        fe = evaluate_frame(masks, gt, metric)
        fe.time_s = t
        out.frames.append(fe)
    return out
