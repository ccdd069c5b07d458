"""Evaluation metrics: geometry, planning, kinematics, scale.

Every accelerated implementation ships with a brute-force oracle in this
module (``*_brute`` / ``*_grid``); the test suite and the CLI selftest hold
the pair together on random instances. Percent-scaled metrics report in
[0, 100]; angles are radians; pivot errors are canonical length units.

Matching protocols here (optimal one-to-one assignment normalized by the
larger set) and the specific Chamfer constant (bidirectional mean L2, x100)
are internal conventions: scores are comparable within this tool, not
against other toolchains.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial import cKDTree

from .blueprint import Joint
from .errors import AssetError
from .geometry import Aabb
from .voxelgrid import VoxelGrid, rasterize_boxes


@dataclass
class MetricReport:
    """Per-asset metric row; None marks an inapplicable metric."""

    cd_pct: float | None = None
    f1_010: float | None = None
    f1_005: float | None = None
    voxel_recall: float | None = None
    voxel_iou: float | None = None
    bbox_iou: float | None = None
    joint_axis_err: float | None = None
    joint_pivot_err: float | None = None
    scale_mae: float | None = None

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def values(self) -> list[float | None]:
        return [getattr(self, f.name) for f in fields(self)]


# ---------------------------------------------------------------------------
# point-cloud geometry

def _check_clouds(p: np.ndarray, q: np.ndarray):
    p, q = np.asarray(p, dtype=np.float64), np.asarray(q, dtype=np.float64)
    if p.ndim != 2 or p.shape[1] != 3 or len(p) == 0:
        raise AssetError("EMPTY_CLOUD", "first cloud empty or not (n, 3)")
    if q.ndim != 2 or q.shape[1] != 3 or len(q) == 0:
        raise AssetError("EMPTY_CLOUD", "second cloud empty or not (n, 3)")
    return p, q


def _nn_dists(p: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact nearest-neighbor distances p->q and q->p (kd-tree accelerated)."""
    dp = cKDTree(q).query(p, k=1)[0]
    dq = cKDTree(p).query(q, k=1)[0]
    return dp, dq


def chamfer(p: np.ndarray, q: np.ndarray) -> float:
    """Bidirectional mean L2 nearest-neighbor distance, halved, x100."""
    p, q = _check_clouds(p, q)
    dp, dq = _nn_dists(p, q)
    return 100.0 * 0.5 * (dp.mean() + dq.mean())


def chamfer_brute(p: np.ndarray, q: np.ndarray) -> float:
    """O(|P||Q|) reference for chamfer."""
    p, q = _check_clouds(p, q)
    d = np.linalg.norm(p[:, None, :] - q[None, :, :], axis=2)
    return 100.0 * 0.5 * (d.min(axis=1).mean() + d.min(axis=0).mean())


def f1_at(p: np.ndarray, q: np.ndarray, tau: float) -> float:
    """F1 (x100) of precision/recall at distance threshold tau."""
    if tau <= 0:
        raise AssetError("EMPTY_CLOUD", f"threshold must be positive, got {tau}")
    p, q = _check_clouds(p, q)
    dp, dq = _nn_dists(p, q)
    precision = float((dp < tau).mean())
    recall = float((dq < tau).mean())
    if precision + recall == 0.0:
        return 0.0
    return 100.0 * 2.0 * precision * recall / (precision + recall)


def f1_at_brute(p: np.ndarray, q: np.ndarray, tau: float) -> float:
    p, q = _check_clouds(p, q)
    d = np.linalg.norm(p[:, None, :] - q[None, :, :], axis=2)
    precision = float((d.min(axis=1) < tau).mean())
    recall = float((d.min(axis=0) < tau).mean())
    if precision + recall == 0.0:
        return 0.0
    return 100.0 * 2.0 * precision * recall / (precision + recall)


# ---------------------------------------------------------------------------
# box-set and voxel planning metrics

def _iou_matrix(pred: list[Aabb], gt: list[Aabb]) -> np.ndarray:
    m = np.zeros((len(pred), len(gt)))
    for i, a in enumerate(pred):
        for j, b in enumerate(gt):
            m[i, j] = a.iou(b)
    return m


def bbox_iou_set(pred: list[Aabb], gt: list[Aabb]) -> float:
    """Optimal one-to-one box matching; summed IoU over max(|pred|, |gt|), x100."""
    if not pred and not gt:
        return 100.0
    if not pred or not gt:
        return 0.0
    m = _iou_matrix(pred, gt)
    rows, cols = linear_sum_assignment(-m)
    return 100.0 * float(m[rows, cols].sum()) / max(len(pred), len(gt))


def bbox_iou_set_brute(pred: list[Aabb], gt: list[Aabb]) -> float:
    """Exhaustive permutation search; only sensible for small sets."""
    if not pred and not gt:
        return 100.0
    if not pred or not gt:
        return 0.0
    m = _iou_matrix(pred, gt)
    n, k = len(pred), len(gt)
    best = 0.0
    if n <= k:
        for perm in permutations(range(k), n):
            best = max(best, sum(m[i, perm[i]] for i in range(n)))
    else:
        for perm in permutations(range(n), k):
            best = max(best, sum(m[perm[j], j] for j in range(k)))
    return 100.0 * best / max(n, k)


def voxel_plan_metrics(pred_boxes: list[Aabb], gt: VoxelGrid) -> tuple[float, float]:
    """(recall, iou), both x100, of planned boxes against a labeled grid.

    Recall: occupied ground-truth voxels covered by the union of the boxes.
    IoU: per-part voxel IoU under optimal box-to-part assignment, summed and
    normalized by max(#boxes, #parts).
    """
    gt_labels = gt.part_labels()
    occ = gt.occupancy
    total = int(occ.sum())
    if total == 0:
        raise AssetError("EMPTY_GRID", "ground-truth grid is empty")
    if not pred_boxes:
        return 0.0, 0.0
    masks = []
    union = np.zeros_like(occ)
    for b in pred_boxes:
        m = _box_voxels(b, gt.resolution)
        masks.append(m)
        union |= m
    recall = 100.0 * int((occ & union).sum()) / total
    iou_m = np.zeros((len(pred_boxes), len(gt_labels)))
    for i, m in enumerate(masks):
        for j, lab in enumerate(gt_labels):
            part = gt.labels == lab
            inter = int((m & part).sum())
            un = int((m | part).sum())
            iou_m[i, j] = inter / un if un else 0.0
    rows, cols = linear_sum_assignment(-iou_m)
    iou = 100.0 * float(iou_m[rows, cols].sum()) / max(len(pred_boxes), len(gt_labels))
    return recall, iou


def _box_voxels(b: Aabb, resolution: int) -> np.ndarray:
    c = (np.arange(resolution) + 0.5) / resolution - 0.5
    mx = (c >= b.min[0]) & (c <= b.max[0])
    my = (c >= b.min[1]) & (c <= b.max[1])
    mz = (c >= b.min[2]) & (c <= b.max[2])
    return mx[:, None, None] & my[None, :, None] & mz[None, None, :]


def per_part_voxel_iou(occupancy: np.ndarray, plan_boxes: list[Aabb], gt: VoxelGrid) -> list[float]:
    """Per-part IoU of a generated occupancy against a labeled grid.

    Occupied voxels take the label of the last planned box containing their
    center (the rasterization rule), then each part's voxel set is compared
    to the ground-truth label mask.
    """
    assigned = rasterize_boxes(plan_boxes, gt.resolution).labels * occupancy
    out = []
    for p in range(1, len(plan_boxes) + 1):
        pred = assigned == p
        truth = gt.labels == p
        un = int((pred | truth).sum())
        out.append(float((pred & truth).sum()) / un if un else 1.0)
    return out


# ---------------------------------------------------------------------------
# kinematic metrics

def _movable_pair(pred: Joint, gt: Joint):
    if pred.joint_type != gt.joint_type:
        raise AssetError("TYPE_MISMATCH", f"{pred.joint_type} vs {gt.joint_type}")
    if not pred.movable:
        raise AssetError("NOT_MOVABLE", "fixed joints carry no axis")


def joint_axis_error(pred: Joint, gt: Joint) -> float:
    """Angle between the axes in [0, pi]; direction-sensitive."""
    _movable_pair(pred, gt)
    dot = float(np.dot(pred.axis, gt.axis))
    return float(np.arccos(np.clip(dot, -1.0, 1.0)))


def joint_pivot_error(pred: Joint, gt: Joint) -> float:
    """Distance from the predicted origin to the ground-truth axis line."""
    _movable_pair(pred, gt)
    if pred.joint_type not in ("revolute", "continuous"):
        raise AssetError("NOT_APPLICABLE", f"pivot undefined for {pred.joint_type}")
    d = np.asarray(pred.origin) - np.asarray(gt.origin)
    a = np.asarray(gt.axis)
    perp = d - np.dot(d, a) * a
    return float(np.linalg.norm(perp))


def joint_pivot_error_grid(pred: Joint, gt: Joint,
                           span: float = 100.0, coarse: float = 0.01,
                           fine: float = 1e-6) -> float:
    """Dense line-search reference: the distance function along the axis is
    unimodal, so a coarse sweep plus a refined sweep brackets the minimum."""
    _movable_pair(pred, gt)
    if pred.joint_type not in ("revolute", "continuous"):
        raise AssetError("NOT_APPLICABLE", f"pivot undefined for {pred.joint_type}")
    p = np.asarray(pred.origin)
    o = np.asarray(gt.origin)
    a = np.asarray(gt.axis)

    def sweep(lo, hi, step):
        s = np.arange(lo, hi + step, step)
        pts = o[None, :] + s[:, None] * a[None, :]
        d = np.linalg.norm(pts - p[None, :], axis=1)
        k = int(np.argmin(d))
        return s[k], float(d[k])

    s0, _ = sweep(-span, span, coarse)
    _, best = sweep(s0 - 2 * coarse, s0 + 2 * coarse, fine)
    return best


def scale_mae(pred: list[float], gt: list[float]) -> float:
    """Mean absolute error between equal-length scale lists."""
    if len(pred) != len(gt) or not pred:
        raise AssetError("LENGTH_MISMATCH", f"{len(pred)} vs {len(gt)}")
    return float(np.mean(np.abs(np.asarray(pred, dtype=np.float64)
                                - np.asarray(gt, dtype=np.float64))))
