"""Discrete token codec for axis-aligned boxes in canonical space.

Coordinates quantize into 64 uniform bins over [-0.5, 0.5]; a box becomes
6 coordinate tokens (min xyz, then max xyz) wrapped in start/end delimiters,
so the full vocabulary is 66 tokens. Streams concatenate one group per box.

Token values: BOXS = 0, BOXE = 1, BOX(k) = 2 + k for k in 0..63 — the same
numbering used by the one-byte-per-token binary form. Text form renders as
``<boxs> <box12> ... <boxe>``.
"""

from __future__ import annotations

import re

from .errors import AssetError
from .geometry import Aabb

N_BINS = 64
BOXS = 0
BOXE = 1
CANON_TOL = 1e-9

TokenStream = list[int]


def box_token(k: int) -> int:
    if not 0 <= k < N_BINS:
        raise ValueError(f"bin index {k} outside 0..{N_BINS - 1}")
    return 2 + k


def is_coord_token(tok: int) -> bool:
    return 2 <= tok < 2 + N_BINS


def quantize_coord(x: float) -> int:
    if x < -0.5 - CANON_TOL or x > 0.5 + CANON_TOL:
        raise AssetError("OUT_OF_CANON", f"coordinate {x} outside [-0.5, 0.5]")
    k = int((x + 0.5) * N_BINS)  # floor for non-negative shifted values
    return min(max(k, 0), N_BINS - 1)


def dequantize_coord(k: int) -> float:
    return (k + 0.5) / N_BINS - 0.5


def quantize_box(bbox: Aabb) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
    """Quantize a canonical-space box to per-axis bin indices (kmin, kmax)."""
    if not bbox.is_ordered():
        raise AssetError("OUT_OF_CANON", "box min > max")
    kmin = tuple(quantize_coord(x) for x in bbox.min)
    kmax = tuple(quantize_coord(x) for x in bbox.max)
    # repair degenerate boxes whose corners quantized out of order
    kmax = tuple(max(a, b) for a, b in zip(kmin, kmax))
    return kmin, kmax


def dequantize_box(kmin, kmax) -> Aabb:
    """Map bin indices back to bin-center coordinates."""
    return Aabb(
        min=tuple(dequantize_coord(k) for k in kmin),
        max=tuple(dequantize_coord(k) for k in kmax),
    )


def encode_stream(boxes: list[Aabb]) -> TokenStream:
    """One 8-token group (BOXS, 6 coords, BOXE) per box, input order kept."""
    out: TokenStream = []
    for i, b in enumerate(boxes):
        try:
            kmin, kmax = quantize_box(b)
        except AssetError as e:
            raise AssetError(e.code, f"box {i}: {e.message}") from e
        out.append(BOXS)
        out.extend(box_token(k) for k in kmin)
        out.extend(box_token(k) for k in kmax)
        out.append(BOXE)
    return out


def decode_stream(tokens: TokenStream) -> list[Aabb]:
    """Inverse of encode_stream; dequantizes to bin centers.

    Raises MALFORMED when the stream is not a sequence of well-formed
    groups, INVERTED when a group's min index exceeds its max on any axis.
    """
    boxes: list[Aabb] = []
    i, n = 0, len(tokens)
    while i < n:
        group = tokens[i:i + 8]
        if len(group) < 8 or group[0] != BOXS or group[7] != BOXE:
            raise AssetError("MALFORMED", f"bad box group at token {i}")
        coords = group[1:7]
        if not all(isinstance(t, int) and is_coord_token(t) for t in coords):
            raise AssetError("MALFORMED", f"bad box group at token {i}")
        ks = [t - 2 for t in coords]
        kmin, kmax = tuple(ks[:3]), tuple(ks[3:])
        for ax in range(3):
            if kmin[ax] > kmax[ax]:
                raise AssetError("INVERTED", f"axis {ax} min bin {kmin[ax]} > max bin {kmax[ax]}"
                                             f" in group at token {i}")
        boxes.append(dequantize_box(kmin, kmax))
        i += 8
    return boxes


# ---------------------------------------------------------------------------
# renderings

def tokens_to_text(tokens: TokenStream) -> str:
    words = []
    for t in tokens:
        if t == BOXS:
            words.append("<boxs>")
        elif t == BOXE:
            words.append("<boxe>")
        elif is_coord_token(t):
            words.append(f"<box{t - 2}>")
        else:
            raise AssetError("MALFORMED", f"unknown token value {t}")
    return " ".join(words)


_WORD = re.compile(r"^<(boxs|boxe|box(\d+))>$")


def tokens_from_text(text: str) -> TokenStream:
    out: TokenStream = []
    for word in text.split():
        m = _WORD.match(word)
        if not m:
            raise AssetError("MALFORMED", f"unknown token {word!r}")
        if m.group(1) == "boxs":
            out.append(BOXS)
        elif m.group(1) == "boxe":
            out.append(BOXE)
        else:
            k = int(m.group(2))
            if k >= N_BINS:
                raise AssetError("MALFORMED", f"bin index {k} outside 0..{N_BINS - 1}")
            out.append(box_token(k))
    return out


def tokens_to_bytes(tokens: TokenStream) -> bytes:
    if any(not 0 <= t < 2 + N_BINS for t in tokens):
        raise AssetError("MALFORMED", "token value outside vocabulary")
    return bytes(tokens)


def tokens_from_bytes(data: bytes) -> TokenStream:
    toks = list(data)
    if any(t >= 2 + N_BINS for t in toks):
        raise AssetError("MALFORMED", "byte outside token vocabulary")
    return toks
