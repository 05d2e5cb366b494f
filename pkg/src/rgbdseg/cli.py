"""Command line interface: ``segment``, ``evaluate``, ``synth`` and ``bench``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io_datasets as io
from .config import PROFILES, PipelineConfig, apply_overrides, load_config, profile_config
from .evaluate import EvalResult, evaluate_frame
from .pipeline import run_pipeline
from .synth import format_scene, parse_scene, synth_scene

log = logging.getLogger("rgbdseg")


def build_config(profile: str | None, config_path: str | None, weight: str | None = None,
                 metric: str | None = None) -> PipelineConfig:
    cfg = profile_config(profile or "default")
    if config_path:
        cfg = load_config(config_path, base=cfg if profile else None)
    overrides = {}
    if weight:
        overrides["seg.weight_mode"] = weight
    if metric:
        overrides["metric"] = metric
    return apply_overrides(cfg, overrides) if overrides else cfg


def _to_u8(img) -> np.ndarray:
    a = np.asarray(img, dtype=np.float64)
    if a.max(initial=0) <= 1.0:
        return np.rint(np.clip(a, 0, 1) * 255).astype(np.uint8)
    lo, hi = a.min(), a.max()
    return np.rint(255 * (a - lo) / (hi - lo if hi > lo else 1)).astype(np.uint8)


def cmd_segment(args) -> int:
    cfg = build_config(args.profile, args.config, args.weight)
    frame = io.load_frame(args.rgb, args.depth, args.intrinsics)
    res = run_pipeline(frame, cfg, keep_intermediates=args.dump_intermediates)
    out = Path(args.out)
    paths = io.write_outputs(frame.rgb, res.segmentation, res.accepted, out,
                             rejected=res.rejected, frame_id=frame.frame_id)
    if args.dump_intermediates:
        import cv2

        for name, img in res.intermediates.items():
            if name == "weights":
                continue
            cv2.imwrite(str(out / f"{frame.frame_id}_{name}.png"), _to_u8(img))
    print(f"mode={res.mode} regions={res.segmentation.n_regions} "
          f"accepted={len(res.accepted)} time={res.timings['total']:.3f}s")
    for key, p in paths.items():
        print(f"{key}: {p}")
    return 0


def _process_frame(task):
    root, frame_id, cfg = task
    frame = io.load_dataset_frame(root, frame_id)
    gt = io.load_ground_truth(Path(root) / "gt", frame_id)
    res = run_pipeline(frame, cfg)
    fe = evaluate_frame(res.accepted_masks, gt, cfg.metric)
    fe.time_s = res.timings["total"]
    return fe, res.segmentation.labels, res.timings


def run_dataset(root, cfg: PipelineConfig, jobs: int = 1):
    """Process every frame of a dataset directory; returns (EvalResult, labels, timings)."""
    frames = io.list_frames(root)
    tasks = [(str(root), f, cfg) for f in frames]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            outs = list(ex.map(_process_frame, tasks))
    else:
        outs = [_process_frame(t) for t in tasks]
    result = EvalResult([o[0] for o in outs])
    return result, {f: o[1] for f, o in zip(frames, outs)}, [o[2] for o in outs]


def cmd_evaluate(args) -> int:
    cfg = build_config(args.profile, args.config, metric=args.metric)
    result, _, _ = run_dataset(args.dataset_dir, cfg, args.jobs)
    for fe in result.frames:
        print(f"{fe.frame_id}: {fe.n_detected}/{fe.n_objects} detected")
    print(f"objects={result.n_objects} detected={result.n_detected} "
          f"rate={result.detection_rate:.1f}% mean_time={result.mean_frame_time:.3f}s")
    return 0


def cmd_synth(args) -> int:
    out = Path(args.out)
    for sub in ("rgb", "depth", "gt"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    chunks = [c for c in Path(args.spec_file).read_text().split("\n---") if c.strip()]
    K = None
    for n, chunk in enumerate(chunks):
        spec = parse_scene(chunk)
        frame_id = f"scene_{n:03d}"
        frame, gt = synth_scene(spec, frame_id)
        if K is not None and frame.intrinsics != K:
            raise ValueError("all scenes of one dataset must share intrinsics")
        K = frame.intrinsics
        io.write_rgb(out / "rgb" / f"{frame_id}.png", frame.rgb)
        io.write_depth_mm(out / "depth" / f"{frame_id}.png", frame.depth)
        for k, mask in gt.masks.items():
            io.write_mask(out / "gt" / f"{frame_id}_obj{k}.png", mask)
        (out / f"{frame_id}.scene").write_text(format_scene(spec))
    if K is not None:
        io.write_intrinsics(out / "intrinsics.txt", K)
    print(f"wrote {len(chunks)} scene(s) to {out}")
    return 0


def cmd_bench(args) -> int:
    if args.single_thread:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMBA_NUM_THREADS"):
            os.environ[var] = "1"
        try:
            import cv2

            cv2.setNumThreads(1)
        except ImportError:  # pragma: no cover
            pass
    from ._accel import BACKEND

    cfg = build_config(args.profile, args.config)
    frames = io.list_frames(args.dataset_dir)
    if frames:
        # compile kernels before timing
        run_pipeline(io.load_dataset_frame(args.dataset_dir, frames[0]), cfg)
    totals, stages = [], {}
    for f in frames:
        frame = io.load_dataset_frame(args.dataset_dir, f)
        for _ in range(args.repeat):
            res = run_pipeline(frame, cfg)
            totals.append(res.timings["total"])
            for k, v in res.timings.items():
                stages.setdefault(k, []).append(v)
    print(f"backend={BACKEND} frames={len(frames)} runs={len(totals)}")
    for k, v in stages.items():
        print(f"  {k:10s} {np.mean(v) * 1000:8.1f} ms")
    if totals:
        print(f"mean frame time {np.mean(totals):.3f}s (median {np.median(totals):.3f}s)")
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rgbdseg", description="Graph-based RGB-D object segmentation")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("segment", help="segment one RGB-D frame")
    s.add_argument("rgb")
    s.add_argument("depth")
    s.add_argument("--intrinsics")
    s.add_argument("--config")
    s.add_argument("--profile", choices=sorted(PROFILES))
    s.add_argument("--weight", choices=("w1", "w2", "auto"))
    s.add_argument("--dump-intermediates", action="store_true")
    s.add_argument("--out", default="out")
    s.set_defaults(func=cmd_segment)

    e = sub.add_parser("evaluate", help="detection rate over a dataset directory")
    e.add_argument("dataset_dir")
    e.add_argument("--profile", required=True, choices=sorted(PROFILES))
    e.add_argument("--config")
    e.add_argument("--metric", choices=("overlap", "iou"))
    e.add_argument("--jobs", type=int, default=1)
    e.set_defaults(func=cmd_evaluate)

    y = sub.add_parser("synth", help="render synthetic scenes into a dataset directory")
    y.add_argument("spec_file", help="scene file; separate several scenes with '---' lines")
    y.add_argument("--out", required=True)
    y.set_defaults(func=cmd_synth)

    b = sub.add_parser("bench", help="per-stage timing over a dataset directory")
    b.add_argument("dataset_dir")
    b.add_argument("--single-thread", action="store_true")
    b.add_argument("--profile", choices=sorted(PROFILES))
    b.add_argument("--config")
    b.add_argument("--repeat", type=int, default=1)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
