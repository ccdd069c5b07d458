"""Axis-aligned boxes in the canonical cube [-0.5, 0.5]^3."""

from __future__ import annotations

import math
from dataclasses import dataclass

Vec3 = tuple[float, float, float]

CANON_LO = -0.5
CANON_HI = 0.5


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned bounding box given by its min and max corners."""

    min: Vec3
    max: Vec3

    def __post_init__(self):
        object.__setattr__(self, "min", tuple(float(v) for v in self.min))
        object.__setattr__(self, "max", tuple(float(v) for v in self.max))
        if len(self.min) != 3 or len(self.max) != 3:
            raise ValueError("Aabb corners must be 3-vectors")

    @property
    def extents(self) -> Vec3:
        return tuple(hi - lo for lo, hi in zip(self.min, self.max))

    @property
    def center(self) -> Vec3:
        return tuple(0.5 * (lo + hi) for lo, hi in zip(self.min, self.max))

    def volume(self) -> float:
        return math.prod(max(0.0, e) for e in self.extents)

    def is_ordered(self) -> bool:
        return all(lo <= hi for lo, hi in zip(self.min, self.max))

    def in_canonical(self, tol: float = 0.0) -> bool:
        lo, hi = CANON_LO - tol, CANON_HI + tol
        return all(lo <= v <= hi for v in self.min + self.max)

    def contains_point(self, p) -> bool:
        return all(lo <= x <= hi for lo, x, hi in zip(self.min, p, self.max))

    def intersection_volume(self, other: "Aabb") -> float:
        v = 1.0
        for lo1, hi1, lo2, hi2 in zip(self.min, self.max, other.min, other.max):
            overlap = min(hi1, hi2) - max(lo1, lo2)
            if overlap <= 0.0:
                return 0.0
            v *= overlap
        return v

    def iou(self, other: "Aabb") -> float:
        inter = self.intersection_volume(other)
        union = self.volume() + other.volume() - inter
        if union <= 0.0:
            # two degenerate (zero-volume) boxes: identical -> 1, else 0
            return 1.0 if self == other else 0.0
        return inter / union


def unit_vector(v) -> Vec3:
    n = math.sqrt(sum(x * x for x in v))
    if n == 0.0:
        raise ValueError("cannot normalize zero vector")
    return tuple(x / n for x in v)


def norm(v) -> float:
    return math.sqrt(sum(x * x for x in v))
