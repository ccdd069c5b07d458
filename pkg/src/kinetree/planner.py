"""Deterministic structural planning from voxel grids.

Stands in for a learned planner: segments an occupancy grid into parts,
recovers per-part boxes, and guesses a parent tree plus joint types from
shape heuristics. Emits exactly the structural slice a generator conditions
on: boxes, parents, joint types.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .blueprint import Blueprint, JOINT_TYPES
from .errors import AssetError
from .geometry import Aabb
from .voxelgrid import VoxelGrid, part_bbox

# a part is a thin panel when its smallest extent is at most THIN_RATIO of
# its largest while the middle extent stays above it (plates, not bars)
THIN_RATIO = 0.15
# near-isotropic protrusions (knobs) keep max/min extent under this
ISO_RATIO = 1.6
_TOUCH_TOL = 1e-9


@dataclass(frozen=True)
class Plan:
    """Structural plan: one box per part, parent indices (-1 root), joint types."""

    boxes: tuple[Aabb, ...]
    parents: tuple[int, ...]
    joint_types: tuple[str, ...]

    def __post_init__(self):
        if not (len(self.boxes) == len(self.parents) == len(self.joint_types)):
            raise ValueError("boxes, parents and joint_types must align")
        for t in self.joint_types:
            if t not in JOINT_TYPES:
                raise AssetError("VOCAB", f"unknown joint type {t!r}")

    @property
    def movable(self) -> tuple[int, ...]:
        return tuple(i for i, t in enumerate(self.joint_types) if t != "fixed")


def plan_from_blueprint(bp: Blueprint) -> Plan:
    """Extract the structural slice of a blueprint (boxes, parents, types)."""
    ids = {p.part_id: i for i, p in enumerate(bp.parts)}
    return Plan(
        boxes=tuple(p.bbox for p in bp.parts),
        parents=tuple(-1 if p.parent_id is None else ids[p.parent_id] for p in bp.parts),
        joint_types=tuple(p.joint.joint_type for p in bp.parts),
    )


def segment_parts(g: VoxelGrid) -> VoxelGrid:
    """Return a part-labeled grid.

    Grids that already distinguish parts (more than one nonzero label) pass
    through unchanged. Otherwise 6-connected components of the occupancy
    become parts, labeled 1..K in descending size order (ties broken by
    first voxel in scan order).
    """
    occ = g.occupancy
    if not occ.any():
        raise AssetError("EMPTY_GRID", "nothing to segment")
    nonzero = [v for v in np.unique(g.labels) if v > 0]
    if len(nonzero) > 1:
        return g
    comp, n = ndimage.label(occ)  # default structure is 6-connectivity
    sizes = ndimage.sum_labels(np.ones_like(comp), comp, index=range(1, n + 1))
    first = np.full(n, comp.size, dtype=np.int64)
    flat = comp.ravel(order="C")
    for pos in np.flatnonzero(flat):
        c = flat[pos] - 1
        if first[c] == comp.size:
            first[c] = pos
    order = sorted(range(n), key=lambda c: (-sizes[c], first[c]))
    relabel = np.zeros(n + 1, dtype=np.uint8)
    for new, old in enumerate(order, start=1):
        relabel[old + 1] = new
    return VoxelGrid(g.resolution, relabel[comp])


def _touches(child: Aabb, root: Aabb) -> bool:
    """Boxes abut: zero gap on some axis, overlapping ranges on the others."""
    gap_axis = overlap = 0
    for lo1, hi1, lo2, hi2 in zip(child.min, child.max, root.min, root.max):
        inter = min(hi1, hi2) - max(lo1, lo2)
        if inter > _TOUCH_TOL:
            overlap += 1
        elif inter >= -_TOUCH_TOL:
            gap_axis += 1
        else:
            return False
    return gap_axis >= 1 and gap_axis + overlap == 3


def _inside_flush(child: Aabb, root: Aabb) -> bool:
    """Child box contained in the root box and flush with one of its faces."""
    for lo1, hi1, lo2, hi2 in zip(child.min, child.max, root.min, root.max):
        if lo1 < lo2 - _TOUCH_TOL or hi1 > hi2 + _TOUCH_TOL:
            return False
    for lo1, hi1, lo2, hi2 in zip(child.min, child.max, root.min, root.max):
        if abs(lo1 - lo2) <= _TOUCH_TOL or abs(hi1 - hi2) <= _TOUCH_TOL:
            return True
    return False


def classify_joint(child: Aabb, root: Aabb,
                   thin_ratio: float = THIN_RATIO, iso_ratio: float = ISO_RATIO) -> str:
    """Shape-based joint type guess for a child part against the root."""
    a, b, c = sorted(child.extents)
    if c <= 0.0:
        return "fixed"
    if a / c <= thin_ratio and b / c > thin_ratio and _touches(child, root):
        return "revolute"
    if _inside_flush(child, root):
        return "prismatic"
    if a > 0.0 and c / a <= iso_ratio and _touches(child, root):
        return "continuous"
    return "fixed"


def plan_blueprint(g: VoxelGrid) -> Plan:
    """Segment, box, and classify a grid into a structural plan.

    The largest part (by voxel count) becomes the root; everything else
    parents to it. Deterministic in the input grid.
    """
    seg = segment_parts(g)
    labels = seg.part_labels()
    boxes = [part_bbox(seg, lab) for lab in labels]
    counts = [seg.count(lab) for lab in labels]
    root = int(np.argmax(counts))  # first max wins
    parents = [-1 if i == root else root for i in range(len(labels))]
    joint_types = []
    for i, box in enumerate(boxes):
        if i == root:
            joint_types.append("fixed")
        else:
            joint_types.append(classify_joint(box, boxes[root]))
    return Plan(boxes=tuple(boxes), parents=tuple(parents), joint_types=tuple(joint_types))
