"""URDF export of blueprint + grid pairs, with a self-check reader.

Each part becomes one link whose visual and collision geometry is the
greedy-merged box cover of its voxels, scaled to meters by the blueprint's
real-world scale. Each non-root part contributes one joint. Link frames sit
at their joint pivot (the root at the world origin), so primitive poses are
world poses minus the frame offset and no rotation algebra is needed.

All XML attribute reals render with 9 significant digits; documents are
built from already-rounded values so that parse(serialize(doc)) == doc.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

import numpy as np

from .blueprint import Blueprint, validate_blueprint
from .errors import AssetError
from .geometry import Aabb
from .voxelgrid import VoxelGrid

DEFAULT_EFFORT = 10.0
DEFAULT_VELOCITY = 1.0

# flat per-material display colors (rgba)
MATERIAL_COLORS = {
    "metal": (0.62, 0.64, 0.68, 1.0),
    "wood": (0.64, 0.45, 0.28, 1.0),
    "plastic": (0.85, 0.85, 0.88, 1.0),
    "glass": (0.75, 0.88, 0.92, 0.6),
    "fabric": (0.55, 0.45, 0.60, 1.0),
    "ceramic": (0.93, 0.90, 0.85, 1.0),
    "rubber": (0.20, 0.20, 0.22, 1.0),
    "stone": (0.55, 0.55, 0.52, 1.0),
    "paper": (0.95, 0.94, 0.88, 1.0),
    "leather": (0.45, 0.28, 0.18, 1.0),
    "other": (0.70, 0.70, 0.70, 1.0),
}


def _round9(x: float) -> float:
    return float(f"{x:.9g}")


def _fmt(x: float) -> str:
    return f"{_round9(x):.9g}"


def _fmt3(v) -> str:
    return " ".join(_fmt(x) for x in v)


@dataclass(frozen=True)
class UrdfBox:
    size: tuple[float, float, float]
    origin: tuple[float, float, float]


@dataclass(frozen=True)
class UrdfLink:
    name: str
    boxes: tuple[UrdfBox, ...]
    mass: float
    inertia_origin: tuple[float, float, float]
    inertia_diag: tuple[float, float, float]
    color: tuple[float, float, float, float]


@dataclass(frozen=True)
class UrdfJoint:
    name: str
    joint_type: str
    parent: str
    child: str
    origin: tuple[float, float, float]
    axis: tuple[float, float, float]
    limit: tuple[float, float, float, float] | None  # lower, upper, effort, velocity


@dataclass(frozen=True)
class UrdfDocument:
    name: str
    links: tuple[UrdfLink, ...]
    joints: tuple[UrdfJoint, ...] = field(default_factory=tuple)


# ---------------------------------------------------------------------------
# greedy box merging

def greedy_merge(g: VoxelGrid, part: int) -> list[Aabb]:
    """Partition a part's voxels into maximal boxes by greedy run growth.

    Runs grow along x first, widen in y, then thicken in z; output boxes are
    disjoint and their union is exactly the part's voxel set. Deterministic.
    """
    mask = np.array(g.labels == part)
    if not mask.any():
        raise AssetError("EMPTY_PART", f"label {part} marks no voxel")
    r = g.resolution
    free = mask.copy()
    boxes = []
    # scan in x-fastest order
    for iz in range(r):
        for iy in range(r):
            for ix in range(r):
                if not free[ix, iy, iz]:
                    continue
                x1 = ix + 1
                while x1 < r and free[x1, iy, iz]:
                    x1 += 1
                y1 = iy + 1
                while y1 < r and free[ix:x1, y1, iz].all():
                    y1 += 1
                z1 = iz + 1
                while z1 < r and free[ix:x1, iy:y1, z1].all():
                    z1 += 1
                free[ix:x1, iy:y1, iz:z1] = False
                boxes.append(Aabb(min=(ix / r - 0.5, iy / r - 0.5, iz / r - 0.5),
                                  max=(x1 / r - 0.5, y1 / r - 0.5, z1 / r - 0.5)))
    return boxes


def rasterize_merged(boxes: list[Aabb], resolution: int) -> np.ndarray:
    """Re-rasterize merged boxes into a boolean mask (for union checks)."""
    out = np.zeros((resolution,) * 3, dtype=bool)
    c = (np.arange(resolution) + 0.5) / resolution - 0.5
    for b in boxes:
        mx = (c >= b.min[0]) & (c <= b.max[0])
        my = (c >= b.min[1]) & (c <= b.max[1])
        mz = (c >= b.min[2]) & (c <= b.max[2])
        out |= mx[:, None, None] & my[None, :, None] & mz[None, None, :]
    return out


# ---------------------------------------------------------------------------
# export

def _box_inertia(mass: float, size) -> tuple[float, float, float]:
    sx, sy, sz = size
    return (mass / 12.0 * (sy * sy + sz * sz),
            mass / 12.0 * (sx * sx + sz * sz),
            mass / 12.0 * (sx * sx + sy * sy))


def to_urdf(bp: Blueprint, g: VoxelGrid) -> UrdfDocument:
    """Build the URDF document for a validated blueprint and its grid."""
    violations = validate_blueprint(bp)
    if violations:
        codes = ", ".join(sorted({v.code for v in violations}))
        raise AssetError("INVALID_BLUEPRINT", f"blueprint has violations: {codes}")
    s = bp.real_scale_m
    index = {p.part_id: i for i, p in enumerate(bp.parts)}

    # world position of each part's frame: root at origin, movable joints
    # at their pivot, fixed joints inheriting the parent frame
    frames: dict[str, tuple[float, float, float]] = {}

    def frame_of(pid: str):
        if pid in frames:
            return frames[pid]
        p = bp.parts[index[pid]]
        if p.parent_id is None:
            f = (0.0, 0.0, 0.0)
        elif p.joint.movable:
            f = tuple(v * s for v in p.joint.origin)
        else:
            f = frame_of(p.parent_id)
        frames[pid] = f
        return f

    links = []
    joints = []
    for i, p in enumerate(bp.parts):
        fx = frame_of(p.part_id)
        merged = greedy_merge(g, i + 1)
        boxes = []
        for b in merged:
            size = tuple(_round9(e * s) for e in b.extents)
            center = tuple(_round9(c * s - f) for c, f in zip(b.center, fx))
            boxes.append(UrdfBox(size=size, origin=center))
        part_size = tuple(e * s for e in p.bbox.extents)
        links.append(UrdfLink(
            name=p.part_id,
            boxes=tuple(boxes),
            mass=_round9(p.mass_kg),
            inertia_origin=tuple(_round9(c * s - f) for c, f in zip(p.bbox.center, fx)),
            inertia_diag=tuple(_round9(v) for v in _box_inertia(p.mass_kg, part_size)),
            color=MATERIAL_COLORS[p.material],
        ))
        if p.parent_id is None:
            continue
        parent_frame = frame_of(p.parent_id)
        rel_origin = tuple(_round9(a - b) for a, b in zip(fx, parent_frame))
        if p.joint.joint_type == "revolute":
            limit = (_round9(p.joint.limits[0]), _round9(p.joint.limits[1]),
                     DEFAULT_EFFORT, DEFAULT_VELOCITY)
        elif p.joint.joint_type == "prismatic":
            limit = (_round9(p.joint.limits[0] * s), _round9(p.joint.limits[1] * s),
                     DEFAULT_EFFORT, DEFAULT_VELOCITY)
        else:
            limit = None
        joints.append(UrdfJoint(
            name=f"{p.parent_id}_to_{p.part_id}",
            joint_type=p.joint.joint_type,
            parent=p.parent_id,
            child=p.part_id,
            origin=rel_origin,
            axis=tuple(_round9(a) for a in p.joint.axis),
            limit=limit,
        ))
    return UrdfDocument(name=bp.asset_id, links=tuple(links), joints=tuple(joints))


def serialize_urdf(doc: UrdfDocument) -> str:
    lines = [f'<robot name="{doc.name}">']
    for link in doc.links:
        lines.append(f'  <link name="{link.name}">')
        lines.append('    <inertial>')
        lines.append(f'      <origin xyz="{_fmt3(link.inertia_origin)}" rpy="0 0 0"/>')
        lines.append(f'      <mass value="{_fmt(link.mass)}"/>')
        ixx, iyy, izz = (_fmt(v) for v in link.inertia_diag)
        lines.append(f'      <inertia ixx="{ixx}" ixy="0" ixz="0" iyy="{iyy}" iyz="0" izz="{izz}"/>')
        lines.append('    </inertial>')
        for b in link.boxes:
            lines.append('    <visual>')
            lines.append(f'      <origin xyz="{_fmt3(b.origin)}" rpy="0 0 0"/>')
            lines.append(f'      <geometry><box size="{_fmt3(b.size)}"/></geometry>')
            lines.append(f'      <material name="{link.name}_mat"><color rgba="{_fmt3(link.color[:3])} {_fmt(link.color[3])}"/></material>')
            lines.append('    </visual>')
        for b in link.boxes:
            lines.append('    <collision>')
            lines.append(f'      <origin xyz="{_fmt3(b.origin)}" rpy="0 0 0"/>')
            lines.append(f'      <geometry><box size="{_fmt3(b.size)}"/></geometry>')
            lines.append('    </collision>')
        lines.append('  </link>')
    for j in doc.joints:
        lines.append(f'  <joint name="{j.name}" type="{j.joint_type}">')
        lines.append(f'    <origin xyz="{_fmt3(j.origin)}" rpy="0 0 0"/>')
        lines.append(f'    <parent link="{j.parent}"/>')
        lines.append(f'    <child link="{j.child}"/>')
        lines.append(f'    <axis xyz="{_fmt3(j.axis)}"/>')
        if j.limit is not None:
            lo, hi, eff, vel = (_fmt(v) for v in j.limit)
            lines.append(f'    <limit lower="{lo}" upper="{hi}" effort="{eff}" velocity="{vel}"/>')
        lines.append('  </joint>')
    lines.append('</robot>')
    return "\n".join(lines) + "\n"


def export_urdf(bp: Blueprint, g: VoxelGrid) -> tuple[UrdfDocument, str]:
    doc = to_urdf(bp, g)
    return doc, serialize_urdf(doc)


# ---------------------------------------------------------------------------
# self-check reader for the subset emitted above

_URDF_JOINT_TYPES = ("fixed", "revolute", "continuous", "prismatic")


def _parse_vec(text: str | None, n: int, ctx: str):
    if text is None:
        raise AssetError("UNSUPPORTED_ELEMENT", f"missing vector in {ctx}")
    parts = text.split()
    if len(parts) != n:
        raise AssetError("UNSUPPORTED_ELEMENT", f"expected {n} reals in {ctx}")
    return tuple(float(v) for v in parts)


def _parse_origin(el, ctx: str):
    origin = el.find("origin")
    if origin is None:
        return (0.0, 0.0, 0.0)
    rpy = origin.get("rpy")
    if rpy is not None and _parse_vec(rpy, 3, ctx) != (0.0, 0.0, 0.0):
        raise AssetError("UNSUPPORTED_ELEMENT", f"rotated origin in {ctx}")
    return _parse_vec(origin.get("xyz"), 3, ctx)


def parse_urdf(xml_text: str) -> UrdfDocument:
    """Read the URDF subset written by serialize_urdf (roundtrip checks)."""
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as e:
        raise AssetError("XML_SYNTAX", f"bad XML: {e}") from e
    if root.tag != "robot":
        raise AssetError("UNSUPPORTED_ELEMENT", f"root element {root.tag!r}, expected robot")
    links = []
    joints = []
    for el in root:
        if el.tag == "link":
            links.append(_parse_link(el))
        elif el.tag == "joint":
            joints.append(_parse_joint(el))
        else:
            raise AssetError("UNSUPPORTED_ELEMENT", f"unsupported element {el.tag!r}")
    return UrdfDocument(name=root.get("name", ""), links=tuple(links), joints=tuple(joints))


def _parse_link(el) -> UrdfLink:
    name = el.get("name", "")
    mass = 0.0
    inertia_origin = (0.0, 0.0, 0.0)
    inertia_diag = (0.0, 0.0, 0.0)
    boxes = []
    color = MATERIAL_COLORS["other"]
    for child in el:
        if child.tag == "inertial":
            inertia_origin = _parse_origin(child, f"link {name} inertial")
            mass_el = child.find("mass")
            mass = float(mass_el.get("value")) if mass_el is not None else 0.0
            in_el = child.find("inertia")
            if in_el is not None:
                inertia_diag = tuple(float(in_el.get(k, "0")) for k in ("ixx", "iyy", "izz"))
        elif child.tag in ("visual", "collision"):
            geo = child.find("geometry")
            box = geo.find("box") if geo is not None else None
            if box is None:
                raise AssetError("UNSUPPORTED_ELEMENT", f"non-box geometry in link {name}")
            size = _parse_vec(box.get("size"), 3, f"link {name} box")
            origin = _parse_origin(child, f"link {name} {child.tag}")
            if child.tag == "visual":
                boxes.append(UrdfBox(size=size, origin=origin))
                mat = child.find("material")
                col = mat.find("color") if mat is not None else None
                if col is not None:
                    color = _parse_vec(col.get("rgba"), 4, f"link {name} color")
        else:
            raise AssetError("UNSUPPORTED_ELEMENT", f"unsupported element {child.tag!r} in link")
    return UrdfLink(name=name, boxes=tuple(boxes), mass=mass,
                    inertia_origin=inertia_origin, inertia_diag=inertia_diag, color=color)


def _parse_joint(el) -> UrdfJoint:
    jt = el.get("type", "")
    if jt not in _URDF_JOINT_TYPES:
        raise AssetError("UNSUPPORTED_ELEMENT", f"joint type {jt!r} outside subset")
    name = el.get("name", "")
    parent = el.find("parent")
    child = el.find("child")
    if parent is None or child is None:
        raise AssetError("UNSUPPORTED_ELEMENT", f"joint {name} missing parent/child")
    axis_el = el.find("axis")
    axis = _parse_vec(axis_el.get("xyz"), 3, f"joint {name}") if axis_el is not None else (1.0, 0.0, 0.0)
    limit_el = el.find("limit")
    limit = None
    if limit_el is not None:
        limit = (float(limit_el.get("lower", "0")), float(limit_el.get("upper", "0")),
                 float(limit_el.get("effort", "0")), float(limit_el.get("velocity", "0")))
    return UrdfJoint(
        name=name, joint_type=jt,
        parent=parent.get("link", ""), child=child.get("link", ""),
        origin=_parse_origin(el, f"joint {name}"), axis=axis, limit=limit,
    )
