"""Ray-cast synthetic RGB-D scenes: boxes and cylinders on a ground plane.

World frame: ``x`` right, ``y`` up, ``z`` forward along the ground. The
camera sits at height ``camera_height`` above the origin looking forward and
pitched down by ``camera_pitch_deg``.

Scene files are line-oriented ``key=value`` text::

    width=320
    height=240
    camera_height=0.6
    camera_pitch_deg=50
    texture=checker
    noise_std=0.005
    shadow_fraction=0.01
    seed=3
    object=box x=0.0 z=0.6 sx=0.1 sy=0.15 sz=0.1 yaw=20 color=220,40,40
    object=cylinder x=0.15 z=0.6 radius=0.05 height=0.12 color=40,200,60

Optional keys: ``fx fy cx cy`` (defaults scale the VGA Kinect intrinsics to
the image size), ``plane_color``, ``plane_color2``, ``texture_size``,
``antialias``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .imgcore import DEFAULT_INTRINSICS, CameraIntrinsics
from .io_datasets import FramePair, GroundTruth


class OutOfFrustumError(ValueError):
    pass


@dataclass
class SceneObject:
    kind: str  # "box" or "cylinder"
    x: float
    z: float
    color: tuple[int, int, int] = (220, 40, 40)
    sx: float = 0.1
    sy: float = 0.1
    sz: float = 0.1
    yaw: float = 0.0
    radius: float = 0.05
    height: float = 0.1

    def __post_init__(self):
        if self.kind not in ("box", "cylinder"):
            raise ValueError(f"unknown object kind {self.kind!r}")

    @property
    def top(self) -> float:
        return self.sy if self.kind == "box" else self.height

    @property
    def extent(self) -> float:
        """Horizontal bounding radius."""
        if self.kind == "box":
            return 0.5 * float(np.hypot(self.sx, self.sz))
        return self.radius


@dataclass
class SceneSpec:
    width: int = 320
    height: int = 240
    camera_height: float = 0.6
    camera_pitch_deg: float = 50.0
    fx: float | None = None
    fy: float | None = None
    cx: float | None = None
    cy: float | None = None
    texture: str = "flat"  # "flat" or "checker"
    texture_size: float = 0.04
    antialias: int = 3  # color samples per pixel side
    plane_color: tuple[int, int, int] = (100, 100, 100)
    plane_color2: tuple[int, int, int] = (60, 60, 60)
    noise_std: float = 0.0
    shadow_fraction: float = 0.0
    seed: int = 0
    objects: list[SceneObject] = field(default_factory=list)

    def intrinsics(self) -> CameraIntrinsics:
        base = DEFAULT_INTRINSICS.scaled(self.width / 640.0)
        return CameraIntrinsics(
            self.fx if self.fx is not None else base.fx,
            self.fy if self.fy is not None else base.fx,
            self.cx if self.cx is not None else (self.width - 1) / 2.0,
            self.cy if self.cy is not None else (self.height - 1) / 2.0,
        )


def _color(text: str) -> tuple[int, int, int]:
    r, g, b = (int(t) for t in text.split(","))
    return (r, g, b)


_SCENE_TYPES = {f.name: f.type for f in fields(SceneSpec)}
_OBJECT_TYPES = {f.name: f.type for f in fields(SceneObject)}


def _convert(value: str, typ: str):
    if "tuple" in typ:
        return _color(value)
    if typ.startswith("int"):
        return int(value)
    if typ.startswith("float"):
        return float(value)
    return value


def parse_scene(text: str) -> SceneSpec:
    spec = SceneSpec()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "object":
            kind, *rest = value.split()
            kw = {}
            for tok in rest:
                k, _, v = tok.partition("=")
                if k not in _OBJECT_TYPES:
                    raise ValueError(f"line {lineno}: unknown object key {k!r}")
                kw[k] = _convert(v, _OBJECT_TYPES[k])
            spec.objects.append(SceneObject(kind=kind, **kw))
        elif key in _SCENE_TYPES and key != "objects":
            setattr(spec, key, _convert(value, _SCENE_TYPES[key]))
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    return spec


def format_scene(spec: SceneSpec) -> str:
    lines = []
    for f in fields(SceneSpec):
        if f.name == "objects":
            continue
        v = getattr(spec, f.name)
        if v is None:
            continue
        lines.append(f"{f.name}={','.join(map(str, v)) if isinstance(v, tuple) else v}")
    for ob in spec.objects:
        keys = ["x", "z", "color"] + (["sx", "sy", "sz", "yaw"] if ob.kind == "box" else ["radius", "height"])
        toks = [f"{k}={','.join(map(str, getattr(ob, k))) if k == 'color' else getattr(ob, k)}" for k in keys]
        lines.append(f"object={ob.kind} " + " ".join(toks))
    return "\n".join(lines) + "\n"


def load_scene(path) -> SceneSpec:
    return parse_scene(Path(path).read_text())


def camera_axes(pitch_deg: float) -> np.ndarray:
    """Rows are the camera X (right), Y (image down), Z (optical axis) in world."""
    p = np.radians(pitch_deg)
    return np.array([
        [1.0, 0.0, 0.0],
        [0.0, -np.cos(p), -np.sin(p)],
        [0.0, -np.sin(p), np.cos(p)],
    ])


def _rays(spec: SceneSpec, K: CameraIntrinsics, dv: float = 0.0, du: float = 0.0):
    v, u = np.indices((spec.height, spec.width), dtype=np.float64)
    xn = (u + du - K.cx) / K.fx
    yn = (v + dv - K.cy) / K.fy
    axes = camera_axes(spec.camera_pitch_deg)
    d = xn[..., None] * axes[0] + yn[..., None] * axes[1] + axes[2]
    return d.reshape(-1, 3)


def _hit_box(o, d, ob: SceneObject):
    yaw = np.radians(ob.yaw)
    c, s = np.cos(yaw), np.sin(yaw)
    # world -> box-local rotation about y
    rot = np.array([[c, 0, -s], [0, 1, 0], [s, 0, c]])
    lo = rot @ (o - np.array([ob.x, ob.sy / 2.0, ob.z]))
    ld = d @ rot.T
    half = np.array([ob.sx, ob.sy, ob.sz]) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (-half - lo) / ld
        t2 = (half - lo) / ld
    t1 = np.where(np.isnan(t1), -np.inf, t1)
    t2 = np.where(np.isnan(t2), np.inf, t2)
    near = np.minimum(t1, t2).max(axis=1)
    far = np.maximum(t1, t2).min(axis=1)
    hit = (near <= far) & (near > 0)
    return np.where(hit, near, np.inf)


def _hit_cylinder(o, d, ob: SceneObject):
    ox, oz = o[0] - ob.x, o[2] - ob.z
    dx, dz = d[:, 0], d[:, 2]
    a = dx * dx + dz * dz
    b = 2 * (ox * dx + oz * dz)
    cc = ox * ox + oz * oz - ob.radius ** 2
    disc = b * b - 4 * a * cc
    t = np.full(len(d), np.inf)
    ok = (disc >= 0) & (a > 0)
    sq = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_side = (-b - sq) / (2 * a)
    y_side = o[1] + t_side * d[:, 1]
    side = ok & (t_side > 0) & (y_side >= 0) & (y_side <= ob.height)
    t[side] = t_side[side]
    with np.errstate(divide="ignore", invalid="ignore"):
        t_cap = (ob.height - o[1]) / d[:, 1]
    px = ox + t_cap * dx
    pz = oz + t_cap * dz
    cap = (t_cap > 0) & (px * px + pz * pz <= ob.radius ** 2)
    t = np.where(cap & (t_cap < t), t_cap, t)
    return t


@dataclass
class Render:
    rgb: np.ndarray
    depth: np.ndarray  # noise-free, meters
    ids: np.ndarray  # -1 nothing, 0 plane, k >= 1 object k
    points: np.ndarray  # (H, W, 3) world hit points


def _cast(spec: SceneSpec, K: CameraIntrinsics, dv: float = 0.0, du: float = 0.0):
    """Trace one ray per pixel through the sub-pixel offset ``(dv, du)``."""
    o = np.array([0.0, spec.camera_height, 0.0])
    d = _rays(spec, K, dv, du)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_plane = np.where(d[:, 1] < 0, -o[1] / d[:, 1], np.inf)
    best = t_plane
    ids = np.where(np.isfinite(t_plane), 0, -1)
    for k, ob in enumerate(spec.objects, 1):
        if ob.kind == "box":
            t = _hit_box(o, d, ob)
        elif ob.kind == "cylinder":
            t = _hit_cylinder(o, d, ob)
        else:
            raise ValueError(f"unknown object kind {ob.kind!r}")
        closer = t < best
        best = np.where(closer, t, best)
        ids = np.where(closer, k, ids)
    # ray parameter equals camera-frame depth since the z component of d is 1
    depth = np.where(np.isfinite(best), best, 0.0)
    points = o + d * depth[:, None]

    rgb = np.zeros((len(d), 3))
    plane = ids == 0
    rgb[plane] = spec.plane_color
    if spec.texture == "checker":
        cell = np.floor(points[:, 0] / spec.texture_size) + np.floor(points[:, 2] / spec.texture_size)
        alt = plane & (cell.astype(np.int64) % 2 == 1)
        rgb[alt] = spec.plane_color2
    elif spec.texture != "flat":
        raise ValueError(f"unknown texture {spec.texture!r}")
    for k, ob in enumerate(spec.objects, 1):
        rgb[ids == k] = ob.color
    return depth, ids, points, rgb


def render(spec: SceneSpec) -> Render:
    """Analytic render.

    Depth, ids and points are sampled at pixel centers. Color is averaged
    over an ``antialias x antialias`` grid inside each pixel, like a sensor
    integrating over its area, so edge pixels blend the two sides.
    """
    K = spec.intrinsics()
    h, w = spec.height, spec.width
    depth, ids, points, rgb = _cast(spec, K)
    n = int(spec.antialias)
    if n > 1:
        offs = (np.arange(n) + 0.5) / n - 0.5
        rgb = np.zeros_like(rgb)
        for dv in offs:
            for du in offs:
                rgb += _cast(spec, K, dv, du)[3]
        rgb /= n * n
    rgb = np.clip(np.rint(rgb), 0, 255).astype(np.uint8)
    return Render(rgb.reshape(h, w, 3), depth.reshape(h, w), ids.reshape(h, w), points.reshape(h, w, 3))


def image_bbox(spec: SceneSpec, ob: SceneObject, K: CameraIntrinsics | None = None):
    """Pixel ``(u0, v0, u1, v1)`` of the object's bounding cylinder corners.

    Raises :class:`OutOfFrustumError` when a corner falls behind the camera.
    """
    K = K or spec.intrinsics()
    axes = camera_axes(spec.camera_pitch_deg)
    o = np.array([0.0, spec.camera_height, 0.0])
    us, vs = [], []
    for y in (0.0, ob.top):
        for dx, dz in ((-1, -1), (-1, 1), (1, -1), (1, 1)):
            p = np.array([ob.x + dx * ob.extent, y, ob.z + dz * ob.extent]) - o
            X, Y, Z = axes @ p
            if Z <= 0:
                raise OutOfFrustumError(f"{ob.kind} at ({ob.x}, {ob.z}) is behind the camera")
            us.append(K.cx + K.fx * X / Z)
            vs.append(K.cy + K.fy * Y / Z)
    return min(us), min(vs), max(us), max(vs)


def _check_frustum(spec: SceneSpec, K: CameraIntrinsics):
    for ob in spec.objects:
        u0, v0, u1, v1 = image_bbox(spec, ob, K)
        if u0 < 0 or v0 < 0 or u1 > spec.width - 1 or v1 > spec.height - 1:
            raise OutOfFrustumError(f"{ob.kind} at ({ob.x}, {ob.z}) leaves the image")


def _shadow_holes(shape, fraction, rng):
    h, w = shape
    holes = np.zeros(shape, dtype=bool)
    target = int(round(fraction * h * w))
    yy, xx = np.indices(shape)
    while holes.sum() < target:
        cy, cx = rng.integers(0, h), rng.integers(0, w)
        r = rng.uniform(0.8, 2.5)
        holes |= (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
    return holes


def synth_scene(spec: SceneSpec, frame_id: str = "synth") -> tuple[FramePair, GroundTruth]:
    """Render a scene and its exact per-object masks.

    Optional degradations: Gaussian depth noise (``noise_std`` meters) and
    small circular shadow holes covering ``shadow_fraction`` of the image.
    """
    K = spec.intrinsics()
    _check_frustum(spec, K)
    r = render(spec)
    depth = r.depth.copy()
    rng = np.random.default_rng(spec.seed)
    valid = depth > 0
    if spec.noise_std > 0:
        depth[valid] += rng.normal(0.0, spec.noise_std, size=int(valid.sum()))
        depth = np.maximum(depth, 0.0)
    if spec.shadow_fraction > 0:
        depth[_shadow_holes(depth.shape, spec.shadow_fraction, rng)] = 0.0
    gt = GroundTruth(frame_id)
    for k in range(1, len(spec.objects) + 1):
        mask = r.ids == k
        if mask.any():
            gt.masks[k] = mask
    return FramePair(r.rgb, depth, K, frame_id), gt


PALETTE = [
    (230, 40, 40), (40, 210, 60), (50, 80, 240), (240, 220, 40),
    (230, 60, 220), (40, 220, 230), (245, 140, 30), (200, 200, 230),
]


def _random_object(rng, x, z, color, max_size):
    if rng.random() < 0.5:
        return SceneObject(
            "box", x, z, color,
            sx=float(rng.uniform(0.05, max_size)), sy=float(rng.uniform(0.05, 0.12)),
            sz=float(rng.uniform(0.05, max_size)), yaw=float(rng.uniform(-30, 30)),
        )
    return SceneObject(
        "cylinder", x, z, color,
        radius=float(rng.uniform(0.025, max_size / 2)), height=float(rng.uniform(0.05, 0.12)),
    )


def random_scene(rng: np.random.Generator, n_objects: int | None = None, margin: int = 6,
                 **overrides) -> SceneSpec:
    """1-4 boxes/cylinders whose image footprints stay ``margin`` pixels apart."""
    n = n_objects if n_objects is not None else int(rng.integers(1, 5))
    spec = SceneSpec(**overrides)
    K = spec.intrinsics()
    colors = rng.permutation(len(PALETTE))
    boxes = []
    for _ in range(200 * n):
        if len(spec.objects) == n:
            break
        ob = _random_object(
            rng, float(rng.uniform(-0.25, 0.25)), float(rng.uniform(0.45, 0.75)),
            PALETTE[int(colors[len(spec.objects)])], 0.10,
        )
        try:
            u0, v0, u1, v1 = image_bbox(spec, ob, K)
        except OutOfFrustumError:
            continue
        if u0 < margin or v0 < margin or u1 > spec.width - 1 - margin or v1 > spec.height - 1 - margin:
            continue
        if any(u0 < b[2] + margin and b[0] < u1 + margin and v0 < b[3] + margin and b[1] < v1 + margin
               for b in boxes):
            continue
        spec.objects.append(ob)
        boxes.append((u0, v0, u1, v1))
    if len(spec.objects) < n:
        raise ValueError(f"could not place {n} separated objects")
    return spec
