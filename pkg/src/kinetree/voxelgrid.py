"""Labeled occupancy grids over the canonical cube [-0.5, 0.5]^3.

A grid at resolution R partitions the cube into R^3 voxels; voxel (i, j, k)
is the cube of side 1/R centered at ((i+0.5)/R - 0.5, ...). Label 0 is
empty, label p >= 1 points at part p (1-based part index). The on-disk form
is magic ``KVOX1``, R as little-endian uint32, then R^3 label bytes in
x-fastest order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AssetError
from .geometry import Aabb

MAGIC = b"KVOX1"
MIN_RES = 2
MAX_RES = 256
MAX_PARTS = 255  # labels live in one byte


@dataclass(frozen=True)
class VoxelGrid:
    resolution: int
    labels: np.ndarray  # (R, R, R) uint8, indexed [ix, iy, iz]

    def __post_init__(self):
        r = self.resolution
        if self.labels.shape != (r, r, r):
            raise AssetError("RESOLUTION", f"labels shape {self.labels.shape} != ({r},{r},{r})")
        labels = np.ascontiguousarray(self.labels, dtype=np.uint8)
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    def __eq__(self, other):
        return (isinstance(other, VoxelGrid) and self.resolution == other.resolution
                and np.array_equal(self.labels, other.labels))

    @property
    def occupancy(self) -> np.ndarray:
        return self.labels > 0

    def part_labels(self) -> list[int]:
        return sorted(int(v) for v in np.unique(self.labels) if v > 0)

    def count(self, label: int) -> int:
        return int(np.count_nonzero(self.labels == label))


def voxel_centers(resolution: int) -> np.ndarray:
    """1D array of the R voxel-center coordinates along one axis."""
    return (np.arange(resolution) + 0.5) / resolution - 0.5


def _check_resolution(resolution: int):
    if not MIN_RES <= resolution <= MAX_RES:
        raise AssetError("RESOLUTION", f"resolution {resolution} outside {MIN_RES}..{MAX_RES}")


def rasterize_boxes(boxes: list[Aabb], resolution: int) -> VoxelGrid:
    """Label voxels whose centers fall inside each box; later boxes win."""
    _check_resolution(resolution)
    if len(boxes) > MAX_PARTS:
        raise AssetError("TOO_MANY_PARTS", f"{len(boxes)} parts exceed the {MAX_PARTS} label limit")
    c = voxel_centers(resolution)
    labels = np.zeros((resolution,) * 3, dtype=np.uint8)
    for p, box in enumerate(boxes, start=1):
        mx = (c >= box.min[0]) & (c <= box.max[0])
        my = (c >= box.min[1]) & (c <= box.max[1])
        mz = (c >= box.min[2]) & (c <= box.max[2])
        inside = mx[:, None, None] & my[None, :, None] & mz[None, None, :]
        labels[inside] = p
    return VoxelGrid(resolution, labels)


def rasterize_parts(bp, shapes: list[Aabb], resolution: int) -> VoxelGrid:
    """Ground-truth grid for a blueprint from per-part solid boxes."""
    if len(shapes) != len(bp.parts):
        raise AssetError("SHAPE_MISMATCH",
                         f"{len(shapes)} shapes for {len(bp.parts)} parts")
    return rasterize_boxes(shapes, resolution)


def part_bbox(g: VoxelGrid, part: int) -> Aabb:
    """Tightest box over the voxel cubes (not centers) carrying this label."""
    idx = np.argwhere(g.labels == part)
    if idx.size == 0:
        raise AssetError("EMPTY_PART", f"label {part} marks no voxel")
    r = g.resolution
    lo = idx.min(axis=0)
    hi = idx.max(axis=0) + 1
    return Aabb(min=tuple(lo / r - 0.5), max=tuple(hi / r - 0.5))


def exposed_faces(g: VoxelGrid) -> np.ndarray:
    """(n, 4) int array of exposed faces: voxel index (i, j, k) + face id 0..5.

    Face ids pair axes with direction: 0:+x 1:-x 2:+y 3:-y 4:+z 5:-z. A face
    is exposed when its neighbor voxel is empty or outside the grid.
    """
    occ = g.occupancy
    r = g.resolution
    padded = np.pad(occ, 1, mode="constant")
    rows = []
    shifts = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    for face, (dx, dy, dz) in enumerate(shifts):
        nb = padded[1 + dx:1 + dx + r, 1 + dy:1 + dy + r, 1 + dz:1 + dz + r]
        ijk = np.argwhere(occ & ~nb)
        if ijk.size:
            rows.append(np.hstack([ijk, np.full((len(ijk), 1), face, dtype=ijk.dtype)]))
    if not rows:
        return np.zeros((0, 4), dtype=np.int64)
    return np.vstack(rows)


_FACE_AXIS = np.array([0, 0, 1, 1, 2, 2])
_FACE_SIGN = np.array([1, 0, 1, 0, 1, 0])  # 1: +side of the voxel, 0: -side


def surface_points(g: VoxelGrid, n: int, seed: int) -> np.ndarray:
    """Sample n points uniformly over the exposed faces of occupied voxels.

    Deterministic in (grid, n, seed); returns an (n, 3) float array inside
    the canonical cube. Points never land strictly inside the solid.
    """
    if n < 1:
        raise AssetError("EMPTY_CLOUD", f"requested {n} points")
    faces = exposed_faces(g)
    if len(faces) == 0:
        raise AssetError("EMPTY_GRID", "no occupied voxel to sample")
    rng = np.random.default_rng(seed)
    pick = rng.integers(0, len(faces), size=n)
    uv = rng.random((n, 2))
    chosen = faces[pick]
    r = g.resolution
    base = chosen[:, :3] / r - 0.5  # lower corner of each voxel cube
    axis = _FACE_AXIS[chosen[:, 3]]
    sign = _FACE_SIGN[chosen[:, 3]]
    pts = np.empty((n, 3))
    other = np.array([[1, 2], [0, 2], [0, 1]])
    for a in range(3):
        m = axis == a
        if not m.any():
            continue
        pts[m, a] = base[m, a] + sign[m] / r
        o1, o2 = other[a]
        pts[m, o1] = base[m, o1] + uv[m, 0] / r
        pts[m, o2] = base[m, o2] + uv[m, 1] / r
    return pts


def occupancy_to_field(g: VoxelGrid) -> np.ndarray:
    """Signed occupancy: +1 where occupied, -1 where empty (float64)."""
    return np.where(g.occupancy, 1.0, -1.0)


def field_to_occupancy(field: np.ndarray) -> np.ndarray:
    """Threshold a real field at 0 into a boolean occupancy grid."""
    return field > 0.0


# ---------------------------------------------------------------------------
# file format

def save_grid(g: VoxelGrid, path: str | Path):
    blob = MAGIC + struct.pack("<I", g.resolution) + g.labels.tobytes(order="F")
    Path(path).write_bytes(blob)


def load_grid(path: str | Path) -> VoxelGrid:
    blob = Path(path).read_bytes()
    if blob[:5] != MAGIC:
        raise AssetError("MALFORMED", f"{path}: bad magic")
    (r,) = struct.unpack("<I", blob[5:9])
    _check_resolution(r)
    body = blob[9:]
    if len(body) != r ** 3:
        raise AssetError("MALFORMED", f"{path}: expected {r ** 3} label bytes, got {len(body)}")
    labels = np.frombuffer(body, dtype=np.uint8).reshape((r, r, r), order="F")
    return VoxelGrid(r, labels)
