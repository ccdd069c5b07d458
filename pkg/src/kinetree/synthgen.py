"""Seeded procedural generator for articulated training assets.

Five families cover the four joint types: cabinet_door (revolute, vertical
hinge), drawer_chest (prismatic slides), hinged_lid (revolute, horizontal
hinge), rotary_knob (continuous) and fixed_handle (fixed). All geometry is
built on the voxel lattice of the requested resolution, so rasterized grids
reproduce the blueprint boxes exactly and every joint's origin/axis/limits
are unambiguous ground truth.

Only ``rng.integers`` and ``rng.random`` are drawn from, in a fixed order
per family, which keeps generation bit-reproducible for a given
(family, seed, resolution).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .blueprint import Blueprint, Joint, Part, parse_blueprint, serialize_blueprint
from .errors import AssetError
from .geometry import Aabb
from .voxelgrid import VoxelGrid, load_grid, rasterize_boxes, save_grid

FAMILIES = ("cabinet_door", "drawer_chest", "hinged_lid", "rotary_knob", "fixed_handle")

USAGE_SCENES = ("kitchen", "bedroom", "office", "workshop")

MIN_RES = 8


@dataclass(frozen=True)
class AssetSample:
    blueprint: Blueprint
    grid: VoxelGrid
    family: str


def _pick(rng, seq):
    return seq[int(rng.integers(0, len(seq)))]


def _unif(rng, lo, hi, digits=3):
    return round(lo + (hi - lo) * float(rng.random()), digits)


def _cu(i: int, r: int) -> float:
    """Lattice index -> canonical coordinate."""
    return i / r - 0.5


def _box(r, x0, x1, y0, y1, z0, z1) -> Aabb:
    return Aabb(min=(_cu(x0, r), _cu(y0, r), _cu(z0, r)),
                max=(_cu(x1, r), _cu(y1, r), _cu(z1, r)))


def _body_span(rng, r, min_frac_num=1, min_frac_den=2):
    """Random lattice span of length in [max(r*num/den, 4), r-2]."""
    lo = max(4, (r * min_frac_num) // min_frac_den)
    hi = r - 2
    w = int(rng.integers(lo, hi + 1))
    start = int(rng.integers(0, r - w + 1))
    return start, start + w


def _root_part(rng, label, material_pool, mass_range, function, part_bbox) -> Part:
    return Part(
        part_id="body", parent_id=None, label=label, bbox=part_bbox,
        material=_pick(rng, material_pool), mass_kg=_unif(rng, *mass_range),
        function=function, states=(), affordances=(), joint=Joint(),
    )


def _gen_cabinet_door(rng, r):
    wx = int(rng.integers(max(3, r // 4), r // 2 + 1))
    x0 = int(rng.integers(0, r - wx - 1 + 1))
    x1 = x0 + wx
    y0, y1 = _body_span(rng, r)
    z0, z1 = _body_span(rng, r)
    body = _root_part(rng, "cabinet body", ("wood", "metal"), (5.0, 30.0),
                      "to contain", _box(r, x0, x1, y0, y1, z0, z1))
    n_doors = int(rng.integers(1, 3))
    axis_sign = 1.0 if rng.integers(0, 2) == 0 else -1.0
    parts = [body]
    if n_doors == 1:
        side = int(rng.integers(0, 2))
        spans = [(y0, y1, y0 if side == 0 else y1)]  # (ylo, yhi, hinge y)
    else:
        ym = y0 + (y1 - y0) // 2
        spans = [(y0, ym, y0), (ym, y1, y1)]
    for i, (dy0, dy1, hy) in enumerate(spans):
        bbox = _box(r, x1, x1 + 1, dy0, dy1, z0, z1)
        joint = Joint(
            joint_type="revolute",
            origin=(_cu(x1, r), _cu(hy, r), (_cu(z0, r) + _cu(z1, r)) / 2.0),
            axis=(0.0, 0.0, axis_sign),
            limits=(0.0, np.pi / 2.0),
        )
        parts.append(Part(
            part_id=f"door_{i}", parent_id="body", label="door", bbox=bbox,
            material=_pick(rng, ("wood", "metal")), mass_kg=_unif(rng, 0.5, 5.0),
            function="to cover", states=("open", "closed"),
            affordances=("pullable", "rotatable", "openable"), joint=joint,
        ))
    return "cabinet", parts, (0.6, 2.2)


def _facing(rng):
    """Seeded outward direction in the horizontal plane: axis index + sign."""
    a = int(rng.integers(0, 2))  # 0: x, 1: y
    sgn = 1 if rng.integers(0, 2) == 0 else -1
    vec = [0.0, 0.0, 0.0]
    vec[a] = float(sgn)
    return a, sgn, tuple(vec)


def _spans_box(r, spans) -> Aabb:
    (x0, x1), (y0, y1), (z0, z1) = spans
    return _box(r, x0, x1, y0, y1, z0, z1)


def _gen_drawer_chest(rng, r):
    a, sgn, axis_vec = _facing(rng)
    wd = int(rng.integers(max(4, r // 3), r // 2 + 2))  # body depth along slide axis
    d0 = int(rng.integers(0, r - wd + 1))
    spans = [None, None, None]
    spans[a] = (d0, d0 + wd)
    spans[1 - a] = _body_span(rng, r)
    spans[2] = _body_span(rng, r)
    body = _root_part(rng, "chest body", ("wood", "metal"), (8.0, 40.0),
                      "to support", _spans_box(r, spans))
    z0, z1 = spans[2]
    c0, c1 = spans[1 - a]
    interior_h = (z1 - z0) - 2
    n_max = min(3, (interior_h + 1) // 3)
    n = max(1, min(int(rng.integers(1, 4)), n_max))
    h = (interior_h - (n - 1)) // n  # >= 2 by n_max construction
    depth = min(wd - 1, int(rng.integers(2, 5)))
    # keep the body the biggest part by voxel count (it must stay the root)
    cross_w = (c1 - c0) - 2
    body_total = wd * (c1 - c0) * (z1 - z0)
    while h > 2 and body_total - n * depth * cross_w * h <= depth * cross_w * h:
        h -= 1
    while depth > 2 and body_total - n * depth * cross_w * h <= depth * cross_w * h:
        depth -= 1
    front = spans[a][1] if sgn > 0 else spans[a][0]
    dspan = (front - depth, front) if sgn > 0 else (front, front + depth)
    parts = [body]
    for i in range(n):
        dz0 = z0 + 1 + i * (h + 1)
        dspans = [None, None, None]
        dspans[a] = dspan
        dspans[1 - a] = (c0 + 1, c1 - 1)
        dspans[2] = (dz0, dz0 + h)
        bbox = _spans_box(r, dspans)
        joint = Joint(
            joint_type="prismatic",
            origin=bbox.center,
            axis=axis_vec,
            limits=(0.0, 0.8 * (depth / r)),
        )
        parts.append(Part(
            part_id=f"drawer_{i}", parent_id="body", label="drawer", bbox=bbox,
            material=_pick(rng, ("wood", "plastic")), mass_kg=_unif(rng, 0.5, 4.0),
            function="to contain", states=("open", "closed"),
            affordances=("pullable", "slidable", "openable"), joint=joint,
        ))
    return "chest", parts, (0.5, 1.8)


def _gen_hinged_lid(rng, r):
    x0, x1 = _body_span(rng, r)
    y0, y1 = _body_span(rng, r)
    wz = int(rng.integers(max(3, r // 4), r // 2 + 1))
    z0 = int(rng.integers(0, r - wz - 1 + 1))
    z1 = z0 + wz
    body = _root_part(rng, "box body", ("wood", "plastic"), (1.0, 12.0),
                      "to contain", _box(r, x0, x1, y0, y1, z0, z1))
    axis_sign = 1.0 if rng.integers(0, 2) == 0 else -1.0
    hinge_x = x0 if rng.integers(0, 2) == 0 else x1
    lid_bbox = _box(r, x0, x1, y0, y1, z1, z1 + 1)
    joint = Joint(
        joint_type="revolute",
        origin=(_cu(hinge_x, r), (_cu(y0, r) + _cu(y1, r)) / 2.0, _cu(z1, r)),
        axis=(0.0, axis_sign, 0.0),
        limits=(0.0, 1.9),
    )
    lid = Part(
        part_id="lid", parent_id="body", label="lid", bbox=lid_bbox,
        material=_pick(rng, ("wood", "plastic")), mass_kg=_unif(rng, 0.2, 2.0),
        function="to cover", states=("open", "closed"),
        affordances=("openable", "pullable"), joint=joint,
    )
    return "chest", [body, lid], (0.3, 1.2)


def _gen_rotary_knob(rng, r):
    a, sgn, axis_vec = _facing(rng)
    d = 2  # knob protrusion; cross-section close to d keeps it near-isotropic
    lo = max(4, r // 3)
    wd = int(rng.integers(lo, max(lo + 1, r - 2 * d - 1)))
    d0 = int(rng.integers(d, r - d - wd + 1))
    spans = [None, None, None]
    spans[a] = (d0, d0 + wd)
    spans[1 - a] = _body_span(rng, r)
    spans[2] = _body_span(rng, r)
    body = _root_part(rng, "appliance body", ("metal", "plastic"), (2.0, 15.0),
                      "to support", _spans_box(r, spans))
    w = int(rng.integers(2, 4))
    face = spans[a][1] if sgn > 0 else spans[a][0]
    kspan = (face, face + d) if sgn > 0 else (face - d, face)
    c0, c1 = spans[1 - a]
    z0, z1 = spans[2]
    kc = int(rng.integers(c0 + 1, max(c0 + 2, c1 - w)))
    kz = int(rng.integers(z0 + 1, max(z0 + 2, z1 - w)))
    kspans = [None, None, None]
    kspans[a] = kspan
    kspans[1 - a] = (kc, kc + w)
    kspans[2] = (kz, kz + w)
    bbox = _spans_box(r, kspans)
    joint = Joint(
        joint_type="continuous",
        origin=bbox.center,
        axis=axis_vec,
        limits=(0.0, 0.0),
    )
    knob = Part(
        part_id="knob", parent_id="body", label="knob", bbox=bbox,
        material=_pick(rng, ("plastic", "metal")), mass_kg=_unif(rng, 0.02, 0.3),
        function="to control", states=("on", "off"),
        affordances=("rotatable", "graspable"), joint=joint,
    )
    return "appliance", [body, knob], (0.2, 0.9)


def _gen_fixed_handle(rng, r):
    wx = int(rng.integers(max(4, r // 3), r - 3))
    x0 = int(rng.integers(0, max(1, r - wx - 2)))
    x1 = x0 + wx
    y0, y1 = _body_span(rng, r)
    z0, z1 = _body_span(rng, r)
    body = _root_part(rng, "cabinet body", ("wood", "metal"), (4.0, 25.0),
                      "to contain", _box(r, x0, x1, y0, y1, z0, z1))
    length = int(rng.integers(3, max(4, (z1 - z0) - 1)))
    hz = int(rng.integers(z0 + 1, max(z0 + 2, z1 - length)))
    hy = int(rng.integers(y0 + 1, max(y0 + 2, y1 - 1)))
    bbox = _box(r, x1, x1 + 1, hy, hy + 1, hz, hz + length)
    handle = Part(
        part_id="handle", parent_id="body", label="handle", bbox=bbox,
        material=_pick(rng, ("metal", "plastic")), mass_kg=_unif(rng, 0.05, 0.5),
        function="to grasp", states=(),
        affordances=("graspable", "pullable"), joint=Joint(),
    )
    return "cabinet", [body, handle], (0.4, 1.6)


_GENERATORS = {
    "cabinet_door": _gen_cabinet_door,
    "drawer_chest": _gen_drawer_chest,
    "hinged_lid": _gen_hinged_lid,
    "rotary_knob": _gen_rotary_knob,
    "fixed_handle": _gen_fixed_handle,
}


def generate_asset(family: str, seed: int, resolution: int = 16) -> AssetSample:
    """Deterministically generate one asset of the given family."""
    if family not in _GENERATORS:
        raise AssetError("VOCAB", f"unknown family {family!r}; choose from {FAMILIES}")
    if resolution < MIN_RES:
        raise AssetError("RESOLUTION", f"resolution {resolution} < {MIN_RES}")
    rng = np.random.default_rng(seed)
    category, parts, scale_range = _GENERATORS[family](rng, resolution)
    bp = Blueprint(
        asset_id=f"{family}_{seed}",
        category=category,
        usage_scene=_pick(rng, USAGE_SCENES),
        real_scale_m=_unif(rng, *scale_range),
        parts=tuple(parts),
    )
    grid = rasterize_boxes([p.bbox for p in bp.parts], resolution)
    return AssetSample(blueprint=bp, grid=grid, family=family)


def generate_dataset(spec: dict[str, int], seed: int = 0, resolution: int = 16) -> list[AssetSample]:
    """Generate counts per family in spec order; asset i uses seed + i."""
    total = sum(spec.values())
    if total < 1:
        raise AssetError("SCHEMA", "dataset spec requests no assets")
    samples = []
    idx = 0
    for family, count in spec.items():
        for _ in range(count):
            samples.append(generate_asset(family, seed + idx, resolution))
            idx += 1
    return samples


# ---------------------------------------------------------------------------
# dataset directory layout: assets/NNNN.blueprint.json + assets/NNNN.kvox
# plus manifest.json carrying (spec, seed, R, count)

def save_dataset(samples: list[AssetSample], out_dir: str | Path,
                 spec: dict[str, int], seed: int, resolution: int):
    out = Path(out_dir)
    assets = out / "assets"
    assets.mkdir(parents=True, exist_ok=True)
    for i, s in enumerate(samples):
        (assets / f"{i:04d}.blueprint.json").write_text(
            serialize_blueprint(s.blueprint), encoding="utf-8")
        save_grid(s.grid, assets / f"{i:04d}.kvox")
    manifest = {"spec": spec, "seed": seed, "R": resolution, "count": len(samples)}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def load_dataset(in_dir: str | Path) -> list[AssetSample]:
    root = Path(in_dir)
    manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    families = []
    for family, count in manifest["spec"].items():
        families.extend([family] * count)
    samples = []
    for i in range(manifest["count"]):
        bp = parse_blueprint((root / "assets" / f"{i:04d}.blueprint.json").read_text(encoding="utf-8"))
        grid = load_grid(root / "assets" / f"{i:04d}.kvox")
        family = families[i] if i < len(families) else "unknown"
        samples.append(AssetSample(blueprint=bp, grid=grid, family=family))
    return samples
