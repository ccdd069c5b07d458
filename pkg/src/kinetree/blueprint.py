"""Hierarchical physical blueprints: the contract between planning and generation.

A blueprint is a tree of parts. Each part carries a canonical-space bounding
box, physical annotations (material, mass, function, states, affordances) and
a kinematic definition (joint type, origin, axis, limits) relative to its
parent. The wire format is canonical JSON: fixed key order, 2-space indent,
LF line endings, reals rendered with 9 significant digits (extended to the
shortest exact form when 9 digits would lose the value, so that
parse(serialize(bp)) == bp holds exactly).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import AssetError
from .geometry import Aabb, Vec3, norm

MATERIALS = (
    "metal", "wood", "plastic", "glass", "fabric", "ceramic",
    "rubber", "stone", "paper", "leather", "other",
)
AFFORDANCES = (
    "pushable", "pullable", "graspable", "rotatable",
    "pressable", "slidable", "openable",
)
JOINT_TYPES = ("fixed", "revolute", "continuous", "prismatic")
MOVABLE_TYPES = ("revolute", "continuous", "prismatic")

AXIS_UNIT_TOL = 1e-6
REVOLUTE_LIMIT_RANGE = 2.0 * math.pi

VIOLATION_CODES = (
    "NO_ROOT", "MULTI_ROOT", "CYCLE", "DANGLING_PARENT", "DUP_ID",
    "AXIS_NOT_UNIT", "LIMITS_REVERSED", "BBOX_OUT_OF_CANON",
    "BBOX_INVERTED", "FIXED_NONZERO",
)


def _vec3(v) -> Vec3:
    return (float(v[0]), float(v[1]), float(v[2]))


@dataclass(frozen=True)
class Joint:
    """Kinematic attachment of a part to its parent.

    Fixed joints are fully canonicalized (zero origin, axis and limits);
    continuous joints carry (0, 0) limits. Revolute limits are radians,
    prismatic limits canonical length units.
    """

    joint_type: str = "fixed"
    origin: Vec3 = (0.0, 0.0, 0.0)
    axis: Vec3 = (0.0, 0.0, 0.0)
    limits: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.joint_type not in JOINT_TYPES:
            raise AssetError("VOCAB", f"unknown joint type {self.joint_type!r}")
        object.__setattr__(self, "origin", _vec3(self.origin))
        object.__setattr__(self, "axis", _vec3(self.axis))
        object.__setattr__(self, "limits", (float(self.limits[0]), float(self.limits[1])))
        for v in self.origin + self.axis + self.limits:
            if not math.isfinite(v):
                raise AssetError("SCHEMA", "joint parameters must be finite")

    @property
    def movable(self) -> bool:
        return self.joint_type in MOVABLE_TYPES


@dataclass(frozen=True)
class Part:
    part_id: str
    parent_id: str | None
    label: str
    bbox: Aabb
    material: str
    mass_kg: float
    function: str = ""
    states: tuple[str, ...] = ()
    affordances: tuple[str, ...] = ()
    joint: Joint = field(default_factory=Joint)

    def __post_init__(self):
        if self.material not in MATERIALS:
            raise AssetError("VOCAB", f"unknown material {self.material!r}")
        object.__setattr__(self, "states", tuple(str(s) for s in self.states))
        object.__setattr__(self, "affordances", tuple(str(a) for a in self.affordances))
        for a in self.affordances:
            if a not in AFFORDANCES:
                raise AssetError("VOCAB", f"unknown affordance {a!r}")
        if len(set(self.affordances)) != len(self.affordances):
            raise AssetError("SCHEMA", f"duplicate affordance on part {self.part_id!r}")
        object.__setattr__(self, "mass_kg", float(self.mass_kg))
        if not math.isfinite(self.mass_kg) or self.mass_kg < 0.0:
            raise AssetError("SCHEMA", f"mass_kg must be non-negative, got {self.mass_kg}")


@dataclass(frozen=True)
class Blueprint:
    asset_id: str
    category: str
    usage_scene: str
    real_scale_m: float
    parts: tuple[Part, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "real_scale_m", float(self.real_scale_m))
        if not math.isfinite(self.real_scale_m) or self.real_scale_m <= 0.0:
            raise AssetError("SCHEMA", f"real_scale_m must be positive, got {self.real_scale_m}")
        if not self.parts:
            raise AssetError("SCHEMA", "blueprint needs at least one part")

    def part_index(self, part_id: str) -> int:
        for i, p in enumerate(self.parts):
            if p.part_id == part_id:
                return i
        raise KeyError(part_id)

    @property
    def root(self) -> Part:
        for p in self.parts:
            if p.parent_id is None:
                return p
        raise AssetError("SCHEMA", "blueprint has no root part")


@dataclass(frozen=True)
class Violation:
    code: str
    part_id: str | None
    detail: str


# ---------------------------------------------------------------------------
# parsing

_TOP_KEYS = ("asset_id", "category", "usage_scene", "real_scale_m", "parts")
_PART_KEYS = ("part_id", "parent_id", "label", "bbox", "material", "mass_kg",
              "function", "states", "affordances", "joint")
_JOINT_KEYS = ("type", "origin", "axis", "limits")


def _need(obj: dict, key: str, ctx: str):
    if key not in obj:
        raise AssetError("SCHEMA", f"missing {key!r} in {ctx}")
    return obj[key]


def _as_str(v, ctx: str) -> str:
    if not isinstance(v, str):
        raise AssetError("SCHEMA", f"{ctx} must be a string, got {type(v).__name__}")
    return v


def _as_real(v, ctx: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise AssetError("SCHEMA", f"{ctx} must be a number, got {type(v).__name__}")
    f = float(v)
    if not math.isfinite(f):
        raise AssetError("SCHEMA", f"{ctx} must be finite")
    return f


def _as_vec(v, n: int, ctx: str) -> tuple[float, ...]:
    if not isinstance(v, list) or len(v) != n:
        raise AssetError("SCHEMA", f"{ctx} must be a list of {n} numbers")
    return tuple(_as_real(x, ctx) for x in v)


def _as_str_list(v, ctx: str) -> tuple[str, ...]:
    if not isinstance(v, list):
        raise AssetError("SCHEMA", f"{ctx} must be a list")
    return tuple(_as_str(x, ctx) for x in v)


def _reject_unknown(obj: dict, allowed, ctx: str):
    extra = set(obj) - set(allowed)
    if extra:
        raise AssetError("SCHEMA", f"unknown key {sorted(extra)[0]!r} in {ctx}")


def _parse_joint(obj, ctx: str) -> Joint:
    if obj is None:
        return Joint()
    if not isinstance(obj, dict):
        raise AssetError("SCHEMA", f"{ctx} joint must be an object")
    _reject_unknown(obj, _JOINT_KEYS, f"{ctx} joint")
    jt = _as_str(_need(obj, "type", f"{ctx} joint"), "joint type")
    if jt not in JOINT_TYPES:
        raise AssetError("VOCAB", f"unknown joint type {jt!r} in {ctx}")
    return Joint(
        joint_type=jt,
        origin=_as_vec(_need(obj, "origin", f"{ctx} joint"), 3, "joint origin"),
        axis=_as_vec(_need(obj, "axis", f"{ctx} joint"), 3, "joint axis"),
        limits=_as_vec(_need(obj, "limits", f"{ctx} joint"), 2, "joint limits"),
    )


def _parse_part(obj, idx: int) -> Part:
    ctx = f"parts[{idx}]"
    if not isinstance(obj, dict):
        raise AssetError("SCHEMA", f"{ctx} must be an object")
    _reject_unknown(obj, _PART_KEYS, ctx)
    parent = _need(obj, "parent_id", ctx)
    if parent is not None:
        parent = _as_str(parent, f"{ctx}.parent_id")
    bbox_obj = _need(obj, "bbox", ctx)
    if not isinstance(bbox_obj, dict):
        raise AssetError("SCHEMA", f"{ctx}.bbox must be an object")
    _reject_unknown(bbox_obj, ("min", "max"), f"{ctx}.bbox")
    bbox = Aabb(
        min=_as_vec(_need(bbox_obj, "min", f"{ctx}.bbox"), 3, "bbox min"),
        max=_as_vec(_need(bbox_obj, "max", f"{ctx}.bbox"), 3, "bbox max"),
    )
    material = _as_str(_need(obj, "material", ctx), f"{ctx}.material")
    if material not in MATERIALS:
        raise AssetError("VOCAB", f"unknown material {material!r} in {ctx}")
    for a in obj.get("affordances", []):
        if a not in AFFORDANCES:
            raise AssetError("VOCAB", f"unknown affordance {a!r} in {ctx}")
    return Part(
        part_id=_as_str(_need(obj, "part_id", ctx), f"{ctx}.part_id"),
        parent_id=parent,
        label=_as_str(_need(obj, "label", ctx), f"{ctx}.label"),
        bbox=bbox,
        material=material,
        mass_kg=_as_real(_need(obj, "mass_kg", ctx), f"{ctx}.mass_kg"),
        function=_as_str(obj.get("function", ""), f"{ctx}.function"),
        states=_as_str_list(obj.get("states", []), f"{ctx}.states"),
        affordances=_as_str_list(obj.get("affordances", []), f"{ctx}.affordances"),
        joint=_parse_joint(obj.get("joint"), ctx),
    )


def parse_blueprint(text: str) -> Blueprint:
    """Parse a blueprint document (canonical JSON wire format).

    Fills defaults for omitted optional fields (states, affordances, joint).
    Raises AssetError with code SYNTAX, SCHEMA or VOCAB; structural
    invariants (tree shape, unit axes, ...) are left to validate_blueprint.
    """
    def _bad_const(name):
        raise AssetError("SYNTAX", f"non-finite constant {name!r} in document")

    try:
        doc = json.loads(text, parse_constant=_bad_const)
    except json.JSONDecodeError as e:
        raise AssetError("SYNTAX", f"malformed JSON: {e}") from e
    if not isinstance(doc, dict):
        raise AssetError("SCHEMA", "top level must be an object")
    _reject_unknown(doc, _TOP_KEYS, "top level")
    parts_obj = _need(doc, "parts", "top level")
    if not isinstance(parts_obj, list) or not parts_obj:
        raise AssetError("SCHEMA", "parts must be a non-empty list")
    return Blueprint(
        asset_id=_as_str(_need(doc, "asset_id", "top level"), "asset_id"),
        category=_as_str(_need(doc, "category", "top level"), "category"),
        usage_scene=_as_str(_need(doc, "usage_scene", "top level"), "usage_scene"),
        real_scale_m=_as_real(_need(doc, "real_scale_m", "top level"), "real_scale_m"),
        parts=tuple(_parse_part(p, i) for i, p in enumerate(parts_obj)),
    )


# ---------------------------------------------------------------------------
# validation

def validate_blueprint(bp: Blueprint) -> list[Violation]:
    """Collect every structural invariant violation; [] means valid.

    Codes: NO_ROOT, MULTI_ROOT, CYCLE, DANGLING_PARENT, DUP_ID,
    AXIS_NOT_UNIT, LIMITS_REVERSED (reversed or revolute limits outside
    [-2pi, 2pi]), BBOX_OUT_OF_CANON, BBOX_INVERTED, FIXED_NONZERO (a fixed
    joint with any nonzero parameter, or a continuous joint with nonzero
    limits, both of which must canonicalize to zero).
    """
    out: list[Violation] = []
    ids = [p.part_id for p in bp.parts]
    seen: set[str] = set()
    for pid in ids:
        if pid in seen:
            out.append(Violation("DUP_ID", pid, f"part id {pid!r} appears more than once"))
        seen.add(pid)

    roots = [p for p in bp.parts if p.parent_id is None]
    if not roots:
        out.append(Violation("NO_ROOT", None, "no part has parent_id = null"))
    elif len(roots) > 1:
        for p in roots[1:]:
            out.append(Violation("MULTI_ROOT", p.part_id, "more than one root part"))

    id_set = set(ids)
    for p in bp.parts:
        if p.parent_id is not None and p.parent_id not in id_set:
            out.append(Violation("DANGLING_PARENT", p.part_id,
                                 f"parent {p.parent_id!r} does not exist"))

    # cycle detection over the parent chain (first occurrence of each id wins);
    # flags exactly the parts that can reach themselves
    parent_of = {}
    for p in bp.parts:
        parent_of.setdefault(p.part_id, p.parent_id)
    for pid in parent_of:
        cur, steps = parent_of.get(pid), 0
        while cur is not None and cur in parent_of and steps <= len(parent_of):
            if cur == pid:
                out.append(Violation("CYCLE", pid, "parent chain loops back to this part"))
                break
            cur = parent_of[cur]
            steps += 1

    for p in bp.parts:
        if not p.bbox.is_ordered():
            out.append(Violation("BBOX_INVERTED", p.part_id, "bbox min > max"))
        if not p.bbox.in_canonical():
            out.append(Violation("BBOX_OUT_OF_CANON", p.part_id,
                                 "bbox leaves the canonical cube"))
        out.extend(_check_joint(p))
    return out


def _check_joint(p: Part) -> list[Violation]:
    j = p.joint
    out = []
    if j.movable:
        if abs(norm(j.axis) - 1.0) > AXIS_UNIT_TOL:
            out.append(Violation("AXIS_NOT_UNIT", p.part_id,
                                 f"axis norm {norm(j.axis):.6g} != 1"))
    if j.joint_type in ("revolute", "prismatic"):
        lo, hi = j.limits
        if lo > hi:
            out.append(Violation("LIMITS_REVERSED", p.part_id, f"lower {lo} > upper {hi}"))
        elif j.joint_type == "revolute" and (lo < -REVOLUTE_LIMIT_RANGE or hi > REVOLUTE_LIMIT_RANGE):
            out.append(Violation("LIMITS_REVERSED", p.part_id,
                                 "revolute limits outside [-2pi, 2pi]"))
    if j.joint_type == "fixed":
        if any(v != 0.0 for v in j.origin + j.axis + j.limits):
            out.append(Violation("FIXED_NONZERO", p.part_id,
                                 "fixed joint carries nonzero parameters"))
    elif j.joint_type == "continuous":
        if j.limits != (0.0, 0.0):
            out.append(Violation("FIXED_NONZERO", p.part_id,
                                 "continuous joint limits must be (0, 0)"))
    return out


# ---------------------------------------------------------------------------
# serialization

def format_real(x: float) -> str:
    """Render a float with 9 significant digits, extended to the shortest
    exact form when 9 digits would not reparse to the same value."""
    if x == 0.0:
        return "0"
    s = f"{x:.9g}"
    if float(s) == x:
        return s
    return repr(x)


class _W:
    def __init__(self):
        self.buf: list[str] = []
        self.depth = 0

    def line(self, text: str):
        self.buf.append("  " * self.depth + text)

    def text(self) -> str:
        return "\n".join(self.buf) + "\n"


def _render(w: _W, value, prefix: str = "", suffix: str = ""):
    if isinstance(value, dict):
        w.line(prefix + "{")
        w.depth += 1
        items = list(value.items())
        for i, (k, v) in enumerate(items):
            _render(w, v, prefix=json.dumps(k) + ": ", suffix="," if i < len(items) - 1 else "")
        w.depth -= 1
        w.line("}" + suffix)
    elif isinstance(value, (list, tuple)):
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            inner = ", ".join(format_real(float(v)) for v in value)
            w.line(f"{prefix}[{inner}]{suffix}")
        elif not value:
            w.line(f"{prefix}[]{suffix}")
        else:
            w.line(prefix + "[")
            w.depth += 1
            for i, v in enumerate(value):
                _render(w, v, suffix="," if i < len(value) - 1 else "")
            w.depth -= 1
            w.line("]" + suffix)
    elif isinstance(value, float):
        w.line(prefix + format_real(value) + suffix)
    elif value is None:
        w.line(prefix + "null" + suffix)
    else:
        w.line(prefix + json.dumps(value) + suffix)


def serialize_blueprint(bp: Blueprint) -> str:
    """Render the canonical wire form. Requires a valid blueprint."""
    violations = validate_blueprint(bp)
    if violations:
        codes = ", ".join(sorted({v.code for v in violations}))
        raise AssetError("INVALID", f"blueprint has violations: {codes}")
    doc = {
        "asset_id": bp.asset_id,
        "category": bp.category,
        "usage_scene": bp.usage_scene,
        "real_scale_m": bp.real_scale_m,
        "parts": [
            {
                "part_id": p.part_id,
                "parent_id": p.parent_id,
                "label": p.label,
                "bbox": {"min": list(p.bbox.min), "max": list(p.bbox.max)},
                "material": p.material,
                "mass_kg": p.mass_kg,
                "function": p.function,
                "states": list(p.states),
                "affordances": list(p.affordances),
                "joint": {
                    "type": p.joint.joint_type,
                    "origin": list(p.joint.origin),
                    "axis": list(p.joint.axis),
                    "limits": list(p.joint.limits),
                },
            }
            for p in bp.parts
        ],
    }
    w = _W()
    _render(w, doc)
    return w.text()
