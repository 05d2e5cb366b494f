"""Pipeline configuration, dataset profiles and the key=value config format.

Config files hold one ``section.name = value`` pair per line; ``#`` starts a
comment. Sections are ``seg``, ``boundary``, ``reject``, ``depth`` and
``saliency``; the top-level keys are ``profile`` and ``metric``. Unlisted keys
keep their defaults, so an empty file is the default configuration::

    profile = rgbd_scenes
    seg.gamma = 0.0016
    seg.weight_mode = w2
    boundary.t_rho = 0.04
    saliency.scales = 0,1,2
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .boundary import BoundaryParams
from .depth_prep import DepthParams
from .graphseg import SegParams
from .postproc import RejectionConfig


@dataclass
class SaliencyParams:
    sigma: float = 8.0
    scales: tuple[int, ...] = (0, 1, 2)


@dataclass
class PipelineConfig:
    profile: str = "default"
    metric: str = "overlap"
    seg: SegParams = field(default_factory=SegParams)
    boundary: BoundaryParams = field(default_factory=BoundaryParams)
    reject: RejectionConfig = field(default_factory=RejectionConfig)
    depth: DepthParams = field(default_factory=DepthParams)
    saliency: SaliencyParams = field(default_factory=SaliencyParams)


SECTIONS = ("seg", "boundary", "reject", "depth", "saliency")

# Per-dataset parameter sets; everything else keeps its default.
PROFILES = {
    "default": {},
    "rutgers": {"seg.gamma": 5.0, "seg.k_x": 1.05, "seg.k_y": 1.5, "seg.k_s": 0.5,
                "seg.weight_mode": "w1"},
    "rgbd_scenes": {"seg.gamma": 0.0016, "seg.k_x": 7.5, "seg.k_b": 0.66,
                    "seg.weight_mode": "w2"},
    "multi_instance": {"seg.gamma": 0.001, "seg.k_x": 1.2, "seg.k_b": 0.05,
                       "seg.weight_mode": "w2"},
}


def _parse_value(text: str, current):
    if isinstance(current, bool):
        return text.lower() in ("1", "true", "yes", "on")
    if isinstance(current, int):
        return int(text)
    if isinstance(current, float):
        return float(text)
    if isinstance(current, tuple):
        return tuple(int(t) for t in text.split(",") if t.strip())
    return text


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def apply_overrides(cfg: PipelineConfig, items: dict) -> PipelineConfig:
    """Return a copy of ``cfg`` with dotted-key overrides applied and validated."""
    sections = {name: dataclasses.asdict(getattr(cfg, name)) for name in SECTIONS}
    top = {"profile": cfg.profile, "metric": cfg.metric}
    for key, value in items.items():
        if "." in key:
            sec, name = key.split(".", 1)
            if sec not in sections or name not in sections[sec]:
                raise KeyError(f"unknown config key {key!r}")
            cur = sections[sec][name]
            sections[sec][name] = _parse_value(value, cur) if isinstance(value, str) else value
        elif key in top:
            top[key] = value
        else:
            raise KeyError(f"unknown config key {key!r}")
    if top["metric"] not in ("overlap", "iou"):
        raise ValueError("metric must be 'overlap' or 'iou'")
    sal = sections["saliency"]
    sal["scales"] = tuple(sal["scales"])
    return PipelineConfig(
        profile=top["profile"],
        metric=top["metric"],
        seg=SegParams(**sections["seg"]),
        boundary=BoundaryParams(**sections["boundary"]),
        reject=RejectionConfig(**sections["reject"]),
        depth=DepthParams(**sections["depth"]),
        saliency=SaliencyParams(**sal),
    )


def profile_config(name: str) -> PipelineConfig:
    if name not in PROFILES:
        raise KeyError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}")
    return apply_overrides(PipelineConfig(profile=name), PROFILES[name])


def parse_config(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    items = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, value = (t.strip() for t in line.split("=", 1))
        items[key] = value
    if base is None:
        base = profile_config(items.get("profile", "default"))
    return apply_overrides(base, items)


def format_config(cfg: PipelineConfig) -> str:
    lines = [f"profile = {cfg.profile}", f"metric = {cfg.metric}"]
    for sec in SECTIONS:
        for name, value in dataclasses.asdict(getattr(cfg, sec)).items():
            lines.append(f"{sec}.{name} = {_format_value(value)}")
    return "\n".join(lines) + "\n"


def load_config(path, base: PipelineConfig | None = None) -> PipelineConfig:
    return parse_config(Path(path).read_text(), base)


def save_config(cfg: PipelineConfig, path) -> None:
    Path(path).write_text(format_config(cfg))
