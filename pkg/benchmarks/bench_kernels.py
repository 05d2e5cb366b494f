"""Compiled kernels vs their numpy fallbacks on VGA-sized inputs.

    python3 benchmarks/bench_kernels.py [--repeat N] [--pipeline]

Kernel timings run both implementations in one process. ``--pipeline`` also
times a full frame under each backend, selected through RGBDSEG_NO_NUMBA in a
subprocess.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from rgbdseg import _accel
from rgbdseg.boundary import (
    _STEPS,
    _hysteresis_numba,
    _hysteresis_numpy,
    _nms_numba,
    _nms_numpy,
    discretize_direction,
    scharr_gradients,
    value_channel,
)
from rgbdseg.depth_prep import _diffuse_numba, _diffuse_numpy
from rgbdseg.graphseg import _segment_loop, grid_edges
from rgbdseg.synth import random_scene, synth_scene

PIPELINE = """
import time, numpy as np
from rgbdseg._accel import BACKEND
from rgbdseg.config import profile_config
from rgbdseg.pipeline import run_pipeline
from rgbdseg.synth import random_scene, synth_scene
fr, _ = synth_scene(random_scene(np.random.default_rng(1), 3, width=640, height=480))
cfg = profile_config("{profile}")
run_pipeline(fr, cfg)
ts = []
for _ in range({repeat}):
    t0 = time.perf_counter(); run_pipeline(fr, cfg); ts.append(time.perf_counter() - t0)
print(BACKEND, np.median(ts))
"""


def best(fn, repeat):
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    return min(ts)


def kernel_cases():
    fr, _ = synth_scene(random_scene(np.random.default_rng(1), 3, width=640, height=480, texture="checker"))
    gx, gy = scharr_gradients(value_channel(fr.rgb))
    mag = np.hypot(gx, gy)
    direction = discretize_direction(gx, gy)
    nms = _nms_numpy(mag, direction, _STEPS, 40.0)

    rng = np.random.default_rng(0)
    n = 3000  # roughly a 1% shadow budget of scattered small holes
    size = 640 * 480
    values = rng.uniform(0.5, 2.0, size)
    fill = rng.choice(size, n, replace=False)
    nbr = np.clip(fill[:, None] + np.array([-640, 640, -1, 1]), 0, size - 1)
    ok = np.ones((n, 4), dtype=bool)

    h, w = 480, 640
    i, j = grid_edges(h, w)
    wts = np.floor(rng.random(len(i)) * 256) / 256
    order = np.argsort(wts, kind="stable")
    seg_args = (h * w, i[order], j[order], wts[order], 0.0016, 50)
    seg_numba = _accel.njit(_segment_loop)

    return {
        "nms": (lambda: _nms_numba(mag, direction, _STEPS, 40.0),
                lambda: _nms_numpy(mag, direction, _STEPS, 40.0)),
        "hysteresis": (lambda: _hysteresis_numba(nms, 40.0, 90.0),
                       lambda: _hysteresis_numpy(nms, 40.0, 90.0)),
        "diffusion": (lambda: _diffuse_numba(values.copy(), fill, nbr, ok, 1e-4, 200),
                      lambda: _diffuse_numpy(values.copy(), fill, nbr, ok, 1e-4, 200)),
        "segment": (lambda: seg_numba(*seg_args), lambda: _segment_loop(*seg_args)),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--pipeline", action="store_true")
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 1
    print(f"{'kernel':12s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, (fast, slow) in kernel_cases().items():
        fast()  # compile
        tf = best(fast, args.repeat)
        ts = best(slow, max(1, args.repeat // 2 if name == "segment" else args.repeat))
        print(f"{name:12s} {tf * 1e3:10.1f} {ts * 1e3:10.1f} {ts / tf:8.1f}x")
    if args.pipeline:
        for profile in ("rgbd_scenes", "rutgers"):
            for flag in ("0", "1"):
                env = dict(os.environ, RGBDSEG_NO_NUMBA=flag)
                code = PIPELINE.format(profile=profile, repeat=args.repeat)
                out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                     text=True, check=True).stdout.split()
                print(f"pipeline {profile:12s} {out[0]:6s} {float(out[1]):.3f}s per VGA frame")
    return 0


if __name__ == "__main__":
    sys.exit(main())
