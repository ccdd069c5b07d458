"""Packing joints into the scaled 8-dim articulation state and back.

A joint's origin (3), axis (3) and limits (2) concatenate into one 8-vector,
each block multiplied by its scale so all components land on comparable
magnitudes for diffusion. The joint type travels separately as a small
integer used for the type embedding. Unpacking divides the scales back out,
re-normalizes the axis and canonicalizes per joint type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blueprint import Joint, JOINT_TYPES, REVOLUTE_LIMIT_RANGE
from .errors import AssetError

TYPE_IDS = {"fixed": 0, "revolute": 1, "continuous": 2, "prismatic": 3}
TYPE_NAMES = {v: k for k, v in TYPE_IDS.items()}

DEGENERATE_AXIS_TOL = 1e-6


@dataclass(frozen=True)
class KineScales:
    """Per-block scaling factors; defaults balance component magnitudes
    (origin in [-1, 1], axes already unit, revolute limits near [-2, 2])."""

    origin: float = 2.0
    axis: float = 1.0
    limits: float = 1.0 / math.pi

    def __post_init__(self):
        if not (self.origin > 0 and self.axis > 0 and self.limits > 0):
            raise ValueError("scales must be positive")


DEFAULT_SCALES = KineScales()


@dataclass(frozen=True)
class KineVector:
    v: np.ndarray  # shape (8,)
    type_id: int

    def __post_init__(self):
        v = np.asarray(self.v, dtype=np.float64)
        if v.shape != (8,):
            raise ValueError(f"kinematic state must be an 8-vector, got shape {v.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "v", v)
        if self.type_id not in TYPE_NAMES:
            raise ValueError(f"unknown type id {self.type_id}")

    def __eq__(self, other):
        return (isinstance(other, KineVector) and self.type_id == other.type_id
                and np.array_equal(self.v, other.v))


def type_embedding_id(joint_type: str) -> int:
    if joint_type not in TYPE_IDS:
        raise AssetError("VOCAB", f"unknown joint type {joint_type!r}")
    return TYPE_IDS[joint_type]


def _check_joint(j: Joint) -> None:
    if j.joint_type not in JOINT_TYPES:
        raise AssetError("INVALID_JOINT", f"unknown joint type {j.joint_type!r}")
    if j.movable:
        n = float(np.linalg.norm(j.axis))
        if abs(n - 1.0) > DEGENERATE_AXIS_TOL:
            raise AssetError("INVALID_JOINT", f"axis norm {n:.6g} != 1")
    if j.joint_type in ("revolute", "prismatic") and j.limits[0] > j.limits[1]:
        raise AssetError("INVALID_JOINT", "limits reversed")
    if j.joint_type == "revolute" and (j.limits[0] < -REVOLUTE_LIMIT_RANGE
                                       or j.limits[1] > REVOLUTE_LIMIT_RANGE):
        raise AssetError("INVALID_JOINT", "revolute limits outside [-2pi, 2pi]")
    if j.joint_type == "fixed" and any(x != 0.0 for x in j.origin + j.axis + j.limits):
        raise AssetError("INVALID_JOINT", "fixed joint carries nonzero parameters")
    if j.joint_type == "continuous" and j.limits != (0.0, 0.0):
        raise AssetError("INVALID_JOINT", "continuous joint limits must be (0, 0)")


def pack(j: Joint, scales: KineScales = DEFAULT_SCALES) -> KineVector:
    """Scale and concatenate (origin, axis, limits); fixed joints map to 0^8."""
    _check_joint(j)
    tid = TYPE_IDS[j.joint_type]
    if j.joint_type == "fixed":
        return KineVector(np.zeros(8), tid)
    v = np.empty(8)
    v[0:3] = np.asarray(j.origin) * scales.origin
    v[3:6] = np.asarray(j.axis) * scales.axis
    v[6:8] = np.asarray(j.limits) * scales.limits
    return KineVector(v, tid)


def unpack(k: KineVector, scales: KineScales = DEFAULT_SCALES) -> Joint:
    """Invert pack with repairs so the result is always a valid Joint.

    The axis block renormalizes to unit length (DEGENERATE_AXIS when its raw
    norm falls under 1e-6 for a movable type), limits sort into order,
    revolute limits clamp to [-2pi, 2pi], and fixed/continuous joints
    canonicalize their zeroed fields regardless of the vector contents.
    """
    jt = TYPE_NAMES[k.type_id]
    if jt == "fixed":
        return Joint()
    origin = tuple(k.v[0:3] / scales.origin)
    raw_axis = k.v[3:6] / scales.axis
    n = float(np.linalg.norm(raw_axis))
    if n < DEGENERATE_AXIS_TOL:
        raise AssetError("DEGENERATE_AXIS", f"axis norm {n:.3g} below {DEGENERATE_AXIS_TOL}")
    axis = tuple(raw_axis / n)
    if jt == "continuous":
        limits = (0.0, 0.0)
    else:
        lo, hi = sorted(float(x) / scales.limits for x in k.v[6:8])
        if jt == "revolute":
            lo = min(max(lo, -REVOLUTE_LIMIT_RANGE), REVOLUTE_LIMIT_RANGE)
            hi = min(max(hi, -REVOLUTE_LIMIT_RANGE), REVOLUTE_LIMIT_RANGE)
        limits = (lo, hi)
    return Joint(joint_type=jt, origin=origin, axis=axis, limits=limits)
