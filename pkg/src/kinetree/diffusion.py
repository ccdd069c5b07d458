"""Joint flow-matching over occupancy fields and articulation vectors.

The denoiser treats an asset as one signed-occupancy field plus one 8-dim
articulation vector per movable part. Geometry patch-embeds into tokens;
each noisy articulation vector lifts through a 2-layer MLP, picks up its
joint-type embedding and its per-part plan condition, and joins the token
sequence right after the geometry downsampling. One transformer denoises
both; geometry tokens project back to patches, articulation tokens project
back to 8-vectors through a second 2-layer MLP.

Training regresses the linear-path velocity x1 - x0 (conditional flow
matching, noise at t=0, data at t=1) under a composite loss: geometry MSE
plus ``lambda_kine`` times the articulation MSE. Output projections start
at zero, so a fresh model predicts zero velocity and the Euler sampler is
exactly the identity on its initial noise.

All tensors are float64 for bitwise reproducibility and clean gradient
checks; checkpoints store parameters as float32 (magic ``KVIM1``, config
block, flat blob in parameter declaration order).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .blueprint import Joint
from .boxcodec import quantize_box
from .errors import AssetError
from .kinevoxel import KineVector, pack, unpack
from .planner import Plan, plan_from_blueprint
from .voxelgrid import VoxelGrid, occupancy_to_field

DTYPE = torch.float64

CKPT_MAGIC = b"KVIM1"
_CKPT_HEADER = "<6i d i q"  # R, patch, d_model, n_layers, n_heads, max_parts, lambda, steps, seed

TOKEN_VOCAB = 66  # matches the box codec: 2 delimiters + 64 coordinate bins


@dataclass(frozen=True)
class DenoiserConfig:
    resolution: int = 16
    patch: int = 4
    d_model: int = 128
    n_layers: int = 4
    n_heads: int = 4
    max_parts: int = 8
    lambda_kine: float = 10.0
    sampler_steps: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.resolution % self.patch != 0:
            raise AssetError("SHAPE_MISMATCH",
                             f"patch {self.patch} must divide resolution {self.resolution}")
        if self.d_model % self.n_heads != 0:
            raise AssetError("SHAPE_MISMATCH", "d_model must be divisible by n_heads")
        if self.lambda_kine < 0:
            raise AssetError("SHAPE_MISMATCH", "lambda_kine must be >= 0")

    @property
    def n_geo_tokens(self) -> int:
        return (self.resolution // self.patch) ** 3


@dataclass(frozen=True)
class Condition:
    """Plan-derived conditioning: box corner tokens + joint types per part."""

    box_tokens: np.ndarray  # (n_parts, 6) codec token ids
    type_ids: np.ndarray  # (n_parts,)
    movable: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "box_tokens", np.asarray(self.box_tokens, dtype=np.int64))
        object.__setattr__(self, "type_ids", np.asarray(self.type_ids, dtype=np.int64))

    @property
    def n_parts(self) -> int:
        return len(self.type_ids)


def encode_condition(plan: Plan) -> Condition:
    from .kinevoxel import TYPE_IDS

    tokens = []
    for b in plan.boxes:
        kmin, kmax = quantize_box(b)
        tokens.append([2 + k for k in kmin + kmax])
    return Condition(
        box_tokens=np.asarray(tokens, dtype=np.int64).reshape(len(plan.boxes), 6),
        type_ids=np.asarray([TYPE_IDS[t] for t in plan.joint_types], dtype=np.int64),
        movable=plan.movable,
    )


@dataclass
class DiffusionState:
    """Noisy sample at time t: geometry field (R^3) + movable 8-vectors (m, 8)."""

    z_geo: torch.Tensor
    z_kine: torch.Tensor
    t: float


def cfm_pair(x0, x1, t: float):
    """Linear probability path: x_t = (1-t) x0 + t x1, velocity x1 - x0."""
    if not 0.0 <= t <= 1.0:
        raise AssetError("SHAPE_MISMATCH", f"t={t} outside [0, 1]")
    x0 = torch.as_tensor(x0, dtype=DTYPE)
    x1 = torch.as_tensor(x1, dtype=DTYPE)
    if x0.shape != x1.shape:
        raise AssetError("SHAPE_MISMATCH", f"{tuple(x0.shape)} vs {tuple(x1.shape)}")
    return (1.0 - t) * x0 + t * x1, x1 - x0


# ---------------------------------------------------------------------------
# model

class _Mlp(nn.Module):
    def __init__(self, d_in, d_hidden, d_out):
        super().__init__()
        self.fc1 = nn.Linear(d_in, d_hidden, dtype=DTYPE)
        self.fc2 = nn.Linear(d_hidden, d_out, dtype=DTYPE)

    def forward(self, x):
        return self.fc2(torch.nn.functional.silu(self.fc1(x)))


class _Attention(nn.Module):
    def __init__(self, d_model, n_heads):
        super().__init__()
        self.n_heads = n_heads
        self.head_dim = d_model // n_heads
        self.qkv = nn.Linear(d_model, 3 * d_model, dtype=DTYPE)
        self.proj = nn.Linear(d_model, d_model, dtype=DTYPE)

    def forward(self, x, key_mask=None):
        # x: (B, T, d); key_mask: (B, T) bool, False marks padding keys
        b, n, d = x.shape
        qkv = self.qkv(x).reshape(b, n, 3, self.n_heads, self.head_dim)
        q, k, v = (qkv[:, :, i].permute(0, 2, 1, 3) for i in range(3))  # (B, h, T, hd)
        att = q @ k.transpose(-1, -2) / math.sqrt(self.head_dim)
        if key_mask is not None:
            att = att.masked_fill(~key_mask[:, None, None, :], float("-inf"))
        att = torch.softmax(att, dim=-1)
        out = (att @ v).permute(0, 2, 1, 3).reshape(b, n, d)
        return self.proj(out)


class _Block(nn.Module):
    """Pre-LN transformer block with adaptive LayerNorm conditioning.

    The per-sample conditioning vector (time + pooled plan condition)
    produces shift/scale/gate triples for both sublayers; gates start at
    zero so a fresh block is the identity.
    """

    def __init__(self, d_model, n_heads):
        super().__init__()
        self.ln1 = nn.LayerNorm(d_model, elementwise_affine=False, dtype=DTYPE)
        self.attn = _Attention(d_model, n_heads)
        self.ln2 = nn.LayerNorm(d_model, elementwise_affine=False, dtype=DTYPE)
        self.mlp = _Mlp(d_model, 4 * d_model, d_model)
        self.modulation = nn.Linear(d_model, 6 * d_model, dtype=DTYPE)

    def forward(self, x, c, key_mask=None):
        # x: (B, T, d); c: (B, d)
        mods = self.modulation(torch.nn.functional.silu(c))[:, None, :]
        shift1, scale1, gate1, shift2, scale2, gate2 = mods.chunk(6, dim=-1)
        h = self.ln1(x) * (1.0 + scale1) + shift1
        x = x + gate1 * self.attn(h, key_mask)
        h = self.ln2(x) * (1.0 + scale2) + shift2
        return x + gate2 * self.mlp(h)


def _time_features(t: torch.Tensor, dim: int) -> torch.Tensor:
    """Sinusoidal features of t in [0, 1]; t shaped (B,), output (B, dim)."""
    half = dim // 2
    freqs = torch.exp(-math.log(10000.0) * torch.arange(half, dtype=DTYPE) / half)
    ang = t[:, None] * 1000.0 * freqs[None, :]
    feats = torch.cat([torch.cos(ang), torch.sin(ang)], dim=1)
    if dim % 2:
        feats = torch.cat([feats, torch.zeros(len(t), 1, dtype=DTYPE)], dim=1)
    return feats


class KviDenoiser(nn.Module):
    """Patch-embed transformer with articulation token injection."""

    def __init__(self, config: DenoiserConfig):
        super().__init__()
        self.config = config
        c = config
        p3 = c.patch ** 3
        self.patch_embed = nn.Linear(p3, c.d_model, dtype=DTYPE)
        self.geo_pos = nn.Parameter(torch.zeros(c.n_geo_tokens, c.d_model, dtype=DTYPE))
        self.time_mlp = _Mlp(c.d_model, c.d_model, c.d_model)
        self.token_embed = nn.Embedding(TOKEN_VOCAB, c.d_model, dtype=DTYPE)
        self.type_embed = nn.Embedding(4, c.d_model, dtype=DTYPE)
        self.kine_encoder = _Mlp(8, c.d_model, c.d_model)
        self.blocks = nn.ModuleList(_Block(c.d_model, c.n_heads) for _ in range(c.n_layers))
        self.ln_f = nn.LayerNorm(c.d_model, elementwise_affine=False, dtype=DTYPE)
        self.final_modulation = nn.Linear(c.d_model, 2 * c.d_model, dtype=DTYPE)
        self.geo_out = nn.Linear(c.d_model, p3, dtype=DTYPE)
        self.kine_decoder = _Mlp(c.d_model, c.d_model, 8)
        self.init_parameters(torch.Generator().manual_seed(c.seed))

    def init_parameters(self, gen: torch.Generator):
        """Seeded init: normal(0, 0.02) weights, zero biases; modulation and
        output projections zeroed so a fresh model predicts zero velocity
        and every block starts as the identity."""
        with torch.no_grad():
            for name, par in self.named_parameters():
                if name.endswith("bias") or name == "geo_pos":
                    par.zero_()
                else:
                    par.copy_(0.02 * torch.randn(par.shape, generator=gen, dtype=DTYPE))
            for block in self.blocks:
                block.modulation.weight.zero_()
                block.modulation.bias.zero_()
            self.final_modulation.weight.zero_()
            self.final_modulation.bias.zero_()
            self.geo_out.weight.zero_()
            self.geo_out.bias.zero_()
            self.kine_decoder.fc2.weight.zero_()
            self.kine_decoder.fc2.bias.zero_()

    def n_parameters(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def _patchify(self, z: torch.Tensor) -> torch.Tensor:
        c = self.config
        g = c.resolution // c.patch
        b = z.shape[0]
        z = z.reshape(b, g, c.patch, g, c.patch, g, c.patch)
        return z.permute(0, 1, 3, 5, 2, 4, 6).reshape(b, g ** 3, c.patch ** 3)

    def _unpatchify(self, tok: torch.Tensor) -> torch.Tensor:
        c = self.config
        g = c.resolution // c.patch
        b = tok.shape[0]
        z = tok.reshape(b, g, g, g, c.patch, c.patch, c.patch)
        return z.permute(0, 1, 4, 2, 5, 3, 6).reshape(b, c.resolution, c.resolution, c.resolution)

    def part_conditions(self, cond: Condition) -> torch.Tensor:
        """(n_parts, d): summed box-corner token embeddings + type embedding."""
        toks = torch.as_tensor(cond.box_tokens)
        types = torch.as_tensor(cond.type_ids)
        return self.token_embed(toks).sum(dim=1) + self.type_embed(types)

    def forward_batch(self, z_geo: torch.Tensor, z_kine: torch.Tensor,
                      kine_mask: torch.Tensor, t: torch.Tensor,
                      global_cond: torch.Tensor, movable_cond: torch.Tensor):
        """Batched velocity prediction with padded kinematic slots.

        z_geo (B, R, R, R); z_kine (B, M, 8) zero-padded; kine_mask (B, M)
        marks real slots; t (B,); global_cond (B, d); movable_cond (B, M, d).
        Padded slots are masked out of attention keys and their outputs are
        meaningless; callers ignore them.
        """
        c = self.config
        b, m = z_kine.shape[0], z_kine.shape[1]
        cvec = self.time_mlp(_time_features(t, c.d_model)) + global_cond
        geo = self.patch_embed(self._patchify(z_geo)) + self.geo_pos[None]
        if m:
            kine = self.kine_encoder(z_kine) + movable_cond
            seq = torch.cat([geo, kine], dim=1)
            mask = torch.cat([torch.ones(b, c.n_geo_tokens, dtype=torch.bool), kine_mask], dim=1)
            if bool(mask.all()):
                mask = None
        else:
            seq = geo
            mask = None
        for block in self.blocks:
            seq = block(seq, cvec, mask)
        shift, scale = self.final_modulation(
            torch.nn.functional.silu(cvec))[:, None, :].chunk(2, dim=-1)
        seq = self.ln_f(seq) * (1.0 + scale) + shift
        v_geo = self._unpatchify(self.geo_out(seq[:, : c.n_geo_tokens]))
        v_kine = self.kine_decoder(seq[:, c.n_geo_tokens:]) if m else torch.zeros(
            (b, 0, 8), dtype=DTYPE)
        return v_geo, v_kine

    def forward(self, state: DiffusionState, cond: Condition):
        c = self.config
        if tuple(state.z_geo.shape) != (c.resolution,) * 3:
            raise AssetError("SHAPE_MISMATCH",
                             f"geometry field {tuple(state.z_geo.shape)} != {(c.resolution,) * 3}")
        n_mov = len(cond.movable)
        if n_mov > c.max_parts:
            raise AssetError("TOO_MANY_PARTS", f"{n_mov} movable parts > max {c.max_parts}")
        if tuple(state.z_kine.shape) != (n_mov, 8):
            raise AssetError("SHAPE_MISMATCH",
                             f"kinematic state {tuple(state.z_kine.shape)} != ({n_mov}, 8)")
        part_cond = self.part_conditions(cond)
        global_cond = part_cond.mean(dim=0, keepdim=True)
        movable_cond = part_cond[list(cond.movable)][None]
        v_geo, v_kine = self.forward_batch(
            state.z_geo[None],
            state.z_kine[None],
            torch.ones(1, n_mov, dtype=torch.bool),
            torch.as_tensor([state.t], dtype=DTYPE),
            global_cond,
            movable_cond,
        )
        return v_geo[0], v_kine[0]


def denoise(model: KviDenoiser, state: DiffusionState, cond: Condition):
    """Deterministic velocity prediction for one noisy state."""
    with torch.no_grad():
        return model(state, cond)


# ---------------------------------------------------------------------------
# training data

@dataclass(frozen=True)
class TrainingExample:
    """Data endpoint: signed occupancy field + packed movable 8-vectors."""

    x1_geo: torch.Tensor
    x1_kine: torch.Tensor
    cond: Condition
    gt_joints: tuple[Joint, ...]  # movable joints, plan order
    asset_id: str = ""


def example_from_asset(bp, grid: VoxelGrid) -> TrainingExample:
    plan = plan_from_blueprint(bp)
    cond = encode_condition(plan)
    vecs = [pack(bp.parts[i].joint).v for i in cond.movable]
    x1_kine = torch.as_tensor(np.asarray(vecs, dtype=np.float64).reshape(len(vecs), 8), dtype=DTYPE)
    return TrainingExample(
        x1_geo=torch.as_tensor(occupancy_to_field(grid), dtype=DTYPE),
        x1_kine=x1_kine,
        cond=cond,
        gt_joints=tuple(bp.parts[i].joint for i in cond.movable),
        asset_id=bp.asset_id,
    )


# ---------------------------------------------------------------------------
# loss

def compute_loss(model: KviDenoiser, batch: list[TrainingExample], gen: torch.Generator):
    """Composite CFM loss over a batch; returns (loss, l_geo, l_kine) tensors.

    Per example the draw order is t, geometry noise, kinematic noise, so a
    reseeded generator reproduces the exact same stochastic loss. Examples
    run through one padded batched forward; each sample's kinematic MSE
    averages over its own real slots only.
    """
    if not batch:
        raise AssetError("SHAPE_MISMATCH", "empty batch")
    c = model.config
    lam = c.lambda_kine
    b = len(batch)
    m_max = max(ex.x1_kine.shape[0] for ex in batch)
    for ex in batch:
        if ex.x1_kine.shape[0] > c.max_parts:
            raise AssetError("TOO_MANY_PARTS",
                             f"{ex.x1_kine.shape[0]} movable parts > max {c.max_parts}")
        if tuple(ex.x1_geo.shape) != (c.resolution,) * 3:
            raise AssetError("SHAPE_MISMATCH",
                             f"field {tuple(ex.x1_geo.shape)} != {(c.resolution,) * 3}")
    ts = torch.empty(b, dtype=DTYPE)
    xt_geo = torch.empty((b,) + (c.resolution,) * 3, dtype=DTYPE)
    v_geo = torch.empty_like(xt_geo)
    xt_kine = torch.zeros(b, m_max, 8, dtype=DTYPE)
    v_kine = torch.zeros(b, m_max, 8, dtype=DTYPE)
    mask = torch.zeros(b, m_max, dtype=torch.bool)
    global_rows = []
    movable_rows = []
    for i, ex in enumerate(batch):
        t = torch.rand((), generator=gen, dtype=DTYPE).item()
        x0_geo = torch.randn(ex.x1_geo.shape, generator=gen, dtype=DTYPE)
        x0_kine = torch.randn(ex.x1_kine.shape, generator=gen, dtype=DTYPE)
        ts[i] = t
        xt_geo[i], v_geo[i] = cfm_pair(x0_geo, ex.x1_geo, t)
        m = ex.x1_kine.shape[0]
        if m:
            xt_kine[i, :m], v_kine[i, :m] = cfm_pair(x0_kine, ex.x1_kine, t)
            mask[i, :m] = True
        part_cond = model.part_conditions(ex.cond)
        global_rows.append(part_cond.mean(dim=0))
        mov = part_cond[list(ex.cond.movable)]
        if m < m_max:
            mov = torch.cat([mov, torch.zeros(m_max - m, c.d_model, dtype=DTYPE)])
        movable_rows.append(mov)
    global_cond = torch.stack(global_rows)
    movable_cond = (torch.stack(movable_rows) if m_max
                    else torch.zeros(b, 0, c.d_model, dtype=DTYPE))
    p_geo, p_kine = model.forward_batch(xt_geo, xt_kine, mask, ts, global_cond, movable_cond)
    l_geo = ((p_geo - v_geo) ** 2).reshape(b, -1).mean(dim=1).mean()
    if m_max:
        per_elem = ((p_kine - v_kine) ** 2) * mask[:, :, None]
        counts = mask.sum(dim=1) * 8
        per_sample = torch.where(counts > 0, per_elem.reshape(b, -1).sum(dim=1)
                                 / counts.clamp(min=1), torch.zeros(b, dtype=DTYPE))
        l_kine = per_sample.mean()
    else:
        l_kine = torch.zeros((), dtype=DTYPE)
    return l_geo + lam * l_kine, l_geo, l_kine


def loss_and_gradients(model: KviDenoiser, batch: list[TrainingExample],
                       gen: torch.Generator):
    """One loss evaluation with exact reverse-mode gradients per parameter."""
    model.zero_grad(set_to_none=True)
    loss, l_geo, l_kine = compute_loss(model, batch, gen)
    loss.backward()
    grads = [p.grad.detach().clone() if p.grad is not None else torch.zeros_like(p)
             for p in model.parameters()]
    return float(loss.detach()), float(l_geo.detach()), float(l_kine.detach()), grads


# ---------------------------------------------------------------------------
# training

@dataclass(frozen=True)
class TrainConfig:
    steps: int = 5000
    lr: float = 0.02
    momentum: float = 0.9
    batch_size: int = 8
    seed: int = 0


@dataclass
class TraceRow:
    step: int
    loss: float
    l_geo: float
    l_kine: float


def train(model: KviDenoiser, data: list[TrainingExample],
          train_cfg: TrainConfig = TrainConfig()) -> list[TraceRow]:
    """Plain SGD+momentum training loop; deterministic in the seed."""
    if not data:
        raise AssetError("SHAPE_MISMATCH", "empty dataset")
    gen = torch.Generator().manual_seed(train_cfg.seed)
    opt = torch.optim.SGD(model.parameters(), lr=train_cfg.lr, momentum=train_cfg.momentum)
    trace: list[TraceRow] = []
    for step in range(train_cfg.steps):
        if train_cfg.batch_size >= len(data):
            batch = data
        else:
            order = torch.randperm(len(data), generator=gen)
            batch = [data[int(i)] for i in order[: train_cfg.batch_size]]
        opt.zero_grad(set_to_none=True)
        loss, l_geo, l_kine = compute_loss(model, batch, gen)
        loss_val = float(loss.detach())
        if not math.isfinite(loss_val):
            raise AssetError("NAN_LOSS", f"non-finite loss at step {step}")
        loss.backward()
        opt.step()
        trace.append(TraceRow(step, loss_val, float(l_geo.detach()), float(l_kine.detach())))
    return trace


def trace_to_csv(trace: list[TraceRow]) -> str:
    lines = ["step,loss,l_geo,l_kine"]
    for row in trace:
        lines.append(f"{row.step},{row.loss!r},{row.l_geo!r},{row.l_kine!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# sampling

@dataclass
class SampleResult:
    occupancy: np.ndarray  # (R, R, R) bool
    field: np.ndarray  # final geometry field
    kine: np.ndarray  # (m, 8) final articulation vectors
    joints: list[Joint | None]  # per movable part; None when degenerate
    degenerate: list[int]  # movable slots whose axis failed to decode


def euler_integrate(velocity, x_geo: torch.Tensor, x_kine: torch.Tensor, steps: int):
    """Integrate dx/dt = velocity(x_geo, x_kine, t) from t=0 to 1."""
    if steps < 1:
        raise AssetError("SHAPE_MISMATCH", f"steps must be >= 1, got {steps}")
    dt = 1.0 / steps
    for i in range(steps):
        t = i / steps
        v_geo, v_kine = velocity(x_geo, x_kine, t)
        x_geo = x_geo + v_geo * dt
        if x_kine.numel():
            x_kine = x_kine + v_kine * dt
    return x_geo, x_kine


def sample(model: KviDenoiser, cond: Condition, steps: int | None = None,
           seed: int = 0) -> SampleResult:
    """Generate one asset for a plan condition from seeded noise."""
    c = model.config
    if steps is None:
        steps = c.sampler_steps
    n_mov = len(cond.movable)
    if n_mov > c.max_parts:
        raise AssetError("TOO_MANY_PARTS", f"{n_mov} movable parts > max {c.max_parts}")
    gen = torch.Generator().manual_seed(seed)
    x_geo = torch.randn((c.resolution,) * 3, generator=gen, dtype=DTYPE)
    x_kine = torch.randn((n_mov, 8), generator=gen, dtype=DTYPE)

    def velocity(zg, zk, t):
        with torch.no_grad():
            return model(DiffusionState(zg, zk, t), cond)

    x_geo, x_kine = euler_integrate(velocity, x_geo, x_kine, steps)
    field = x_geo.numpy()
    kine = x_kine.numpy()
    joints: list[Joint | None] = []
    degenerate: list[int] = []
    for j in range(n_mov):
        tid = int(cond.type_ids[cond.movable[j]])
        try:
            joints.append(unpack(KineVector(kine[j], tid)))
        except AssetError as e:
            if e.code != "DEGENERATE_AXIS":
                raise
            joints.append(None)
            degenerate.append(cond.movable[j])
    return SampleResult(
        occupancy=field > 0.0,
        field=field,
        kine=kine,
        joints=joints,
        degenerate=degenerate,
    )


# ---------------------------------------------------------------------------
# checkpoints

def save_checkpoint(model: KviDenoiser, path: str | Path):
    c = model.config
    header = CKPT_MAGIC + struct.pack(
        _CKPT_HEADER, c.resolution, c.patch, c.d_model, c.n_layers, c.n_heads,
        c.max_parts, c.lambda_kine, c.sampler_steps, c.seed)
    blob = b"".join(
        p.detach().to(torch.float32).numpy().tobytes() for p in model.parameters())
    Path(path).write_bytes(header + blob)


def load_checkpoint(path: str | Path) -> KviDenoiser:
    raw = Path(path).read_bytes()
    if raw[: len(CKPT_MAGIC)] != CKPT_MAGIC:
        raise AssetError("MALFORMED", f"{path}: bad checkpoint magic")
    off = len(CKPT_MAGIC)
    size = struct.calcsize(_CKPT_HEADER)
    vals = struct.unpack(_CKPT_HEADER, raw[off:off + size])
    config = DenoiserConfig(
        resolution=vals[0], patch=vals[1], d_model=vals[2], n_layers=vals[3],
        n_heads=vals[4], max_parts=vals[5], lambda_kine=vals[6],
        sampler_steps=vals[7], seed=vals[8])
    model = KviDenoiser(config)
    blob = raw[off + size:]
    expected = model.n_parameters() * 4
    if len(blob) != expected:
        raise AssetError("MALFORMED",
                         f"{path}: expected {expected} parameter bytes, got {len(blob)}")
    flat = np.frombuffer(blob, dtype=np.float32)
    pos = 0
    with torch.no_grad():
        for p in model.parameters():
            n = p.numel()
            p.copy_(torch.as_tensor(flat[pos:pos + n].astype(np.float64)).reshape(p.shape))
            pos += n
    return model
