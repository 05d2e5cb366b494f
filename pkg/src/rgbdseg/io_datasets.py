"""Frame loading, ground truth masks and result files.

Dataset layout used by the CLI (``synth`` writes it, ``evaluate`` and
``bench`` read it)::

    <root>/rgb/<frame_id>.png        8-bit RGB
    <root>/depth/<frame_id>.png      16-bit depth in millimeters, 0 = missing
    <root>/intrinsics.txt            "fx fy cx cy" (optional)
    <root>/gt/<frame_id>_obj<k>.png  one binary mask per object

Region report format: ``#`` lines are comments; every other line is one
region written as space-separated ``key=value`` pairs with the keys
``id size bbox centroid lambda1 lambda2 eccentricity mean_depth verdict
reasons``. ``bbox`` is ``x0,y0,x1,y1`` (inclusive), ``centroid`` is ``x,y``
and ``reasons`` is a comma-separated list (``-`` when empty).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .imgcore import DEFAULT_INTRINSICS, CameraIntrinsics, as_depth, as_rgb

log = logging.getLogger(__name__)

REPORT_KEYS = ("id", "size", "bbox", "centroid", "lambda1", "lambda2",
               "eccentricity", "mean_depth", "verdict", "reasons")


class UnregisteredPairError(ValueError):
    pass


@dataclass
class FramePair:
    rgb: np.ndarray
    depth: np.ndarray
    intrinsics: CameraIntrinsics
    frame_id: str = ""

    def __post_init__(self):
        self.rgb = as_rgb(self.rgb)
        self.depth = as_depth(self.depth)
        if self.rgb.shape[:2] != self.depth.shape:
            raise UnregisteredPairError(
                f"unregistered pair: rgb {self.rgb.shape[:2]} vs depth {self.depth.shape}"
            )


@dataclass
class GroundTruth:
    frame_id: str
    masks: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return not self.masks


def read_rgb(path) -> np.ndarray:
    img = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if img is None:
        raise OSError(f"cannot read image {path}")
    return cv2.cvtColor(img, cv2.COLOR_BGR2RGB)


def write_rgb(path, rgb) -> None:
    if not cv2.imwrite(str(path), cv2.cvtColor(as_rgb(rgb), cv2.COLOR_RGB2BGR)):
        raise OSError(f"cannot write {path}")


def read_depth_mm(path) -> np.ndarray:
    """16-bit depth PNG in millimeters -> meters."""
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise OSError(f"cannot read depth image {path}")
    if raw.ndim != 2:
        raise ValueError(f"depth image {path} is not single-channel")
    return raw.astype(np.float64) / 1000.0


def write_depth_mm(path, depth) -> None:
    mm = np.rint(as_depth(depth) * 1000.0)
    if mm.max(initial=0) > np.iinfo(np.uint16).max:
        raise ValueError("depth exceeds the 16-bit millimeter range")
    if not cv2.imwrite(str(path), mm.astype(np.uint16)):
        raise OSError(f"cannot write {path}")


def read_intrinsics(path) -> CameraIntrinsics:
    if path is None or not Path(path).exists():
        log.warning("no intrinsics file%s, using defaults %s",
                    f" at {path}" if path else "", DEFAULT_INTRINSICS)
        return DEFAULT_INTRINSICS
    vals = [float(t) for t in Path(path).read_text().split()]
    if len(vals) != 4:
        raise ValueError(f"{path}: expected 'fx fy cx cy'")
    return CameraIntrinsics(*vals)


def write_intrinsics(path, K: CameraIntrinsics) -> None:
    Path(path).write_text(f"{K.fx!r} {K.fy!r} {K.cx!r} {K.cy!r}\n")


def load_frame(rgb_path, depth_path, intrinsics_path=None, frame_id: str | None = None) -> FramePair:
    rgb = read_rgb(rgb_path)
    depth = read_depth_mm(depth_path)
    K = read_intrinsics(intrinsics_path)
    return FramePair(rgb, depth, K, frame_id or Path(rgb_path).stem)


_MASK_RE = re.compile(r"^(?P<frame>.+)_obj(?P<k>\d+)\.png$")


def load_ground_truth(gt_dir, frame_id: str) -> GroundTruth:
    gt_dir = Path(gt_dir)
    if not gt_dir.is_dir():
        raise FileNotFoundError(f"ground truth directory {gt_dir} not found")
    gt = GroundTruth(frame_id)
    for path in sorted(gt_dir.glob(f"{frame_id}_obj*.png")):
        m = _MASK_RE.match(path.name)
        if not m or m["frame"] != frame_id:
            continue
        img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
        if img is None:
            raise OSError(f"cannot read mask {path}")
        if img.ndim == 3:
            img = img.max(axis=2)
        gt.masks[int(m["k"])] = img != 0
    if gt.empty:
        log.warning("frame %s has no ground-truth masks", frame_id)
    return gt


def write_mask(path, mask) -> None:
    if not cv2.imwrite(str(path), np.asarray(mask, dtype=np.uint8) * 255):
        raise OSError(f"cannot write {path}")


def write_label_map(path, labels) -> None:
    labels = np.asarray(labels)
    if labels.max(initial=0) > np.iinfo(np.uint16).max:
        raise ValueError("too many regions for a 16-bit label map")
    if not cv2.imwrite(str(path), labels.astype(np.uint16)):
        raise OSError(f"cannot write {path}")


def read_label_map(path) -> np.ndarray:
    img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if img is None:
        raise OSError(f"cannot read {path}")
    return img.astype(np.int64)


def _palette(k: int) -> np.ndarray:
    rng = np.random.default_rng(k)
    return rng.integers(64, 256, size=3)


def overlay(rgb, regions, alpha: float = 0.5) -> np.ndarray:
    """Blend a distinct color over each accepted region."""
    out = as_rgb(rgb).copy()
    flat = out.reshape(-1, 3)
    for r in regions:
        color = _palette(r.id)
        flat[r.pixels] = np.rint((1 - alpha) * flat[r.pixels] + alpha * color).astype(np.uint8)
    return out


def _fmt(x: float) -> str:
    return "nan" if not np.isfinite(x) else f"{x:.6g}"


def format_record(verdict) -> str:
    r, st = verdict.region, verdict.stats
    x0, y0, x1, y1 = r.bbox
    fields = {
        "id": str(r.id),
        "size": str(r.size),
        "bbox": f"{x0},{y0},{x1},{y1}",
        "centroid": f"{_fmt(st.centroid[0])},{_fmt(st.centroid[1])}",
        "lambda1": _fmt(st.lambda1),
        "lambda2": _fmt(st.lambda2),
        "eccentricity": _fmt(st.eccentricity),
        "mean_depth": _fmt(st.mean_depth),
        "verdict": "accepted" if verdict.accepted else "rejected",
        "reasons": ",".join(verdict.reasons) or "-",
    }
    return " ".join(f"{k}={fields[k]}" for k in REPORT_KEYS)


def parse_report(text: str) -> list[dict[str, str]]:
    records = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        records.append(dict(tok.split("=", 1) for tok in line.split()))
    return records


def write_outputs(rgb, seg, accepted, out_dir, rejected=(), frame_id: str = "frame") -> dict[str, Path]:
    """Write the label map, the overlay and the region report.

    Only regions passed in ``accepted``/``rejected`` appear in the report.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    paths = {
        "labels": out / f"{frame_id}_labels.png",
        "overlay": out / f"{frame_id}_overlay.png",
        "report": out / f"{frame_id}_regions.txt",
    }
    write_label_map(paths["labels"], seg.labels)
    write_rgb(paths["overlay"], overlay(rgb, [v.region for v in accepted]))
    verdicts = sorted([*accepted, *rejected], key=lambda v: v.region.id)
    lines = [f"# regions for {frame_id}: " + " ".join(REPORT_KEYS)]
    lines += [format_record(v) for v in verdicts]
    paths["report"].write_text("\n".join(lines) + "\n")
    return paths


def list_frames(root) -> list[str]:
    root = Path(root)
    rgb_dir = root / "rgb"
    if not rgb_dir.is_dir():
        raise FileNotFoundError(f"{rgb_dir} not found")
    return sorted(p.stem for p in rgb_dir.glob("*.png"))


def load_dataset_frame(root, frame_id: str) -> FramePair:
    root = Path(root)
    return load_frame(
        root / "rgb" / f"{frame_id}.png",
        root / "depth" / f"{frame_id}.png",
        root / "intrinsics.txt",
        frame_id,
    )
