"""Local binary pattern encoding of grayscale slices.

Each pixel is quantized to integer levels and compared against its n
neighbors; neighbor p contributes bit 2^p when its (possibly interpolated)
value exceeds the center by the comparison threshold. Neighbor order is
fixed: p=0 is the east neighbor and p increases counter-clockwise (north
next). The radius-1 8-neighborhood uses the 8 surrounding pixels directly;
larger radii sample a circle with bilinear interpolation.

A compiled kernel (livertex._lbpcore) is used when importable; otherwise a
vectorized NumPy fallback with identical semantics. Set LIVERTEX_PURE=1 to
force the fallback.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import _lbp_numpy

try:
    from . import _lbpcore
except ImportError:
    _lbpcore = None

BORDER_POLICIES = ("replicate", "zero")
COMPARISONS = ("strict", "gte")

_FORCE_PURE = os.environ.get("LIVERTEX_PURE", "0") not in ("", "0")


def backend_name() -> str:
    """Kernel backend selected at import time."""
    return "native" if (_lbpcore is not None and not _FORCE_PURE) else "numpy"


@dataclass
class LbpSpec:
    """Encoding parameters.

    comparison "strict" sets a bit only when the neighbor is strictly
    greater than the center (a difference of at least one quantization
    level); "gte" uses the conventional greater-or-equal rule. Border
    policy "replicate" clamps out-of-frame samples to the edge; "zero"
    emits code 0 for the radius-wide border ring.
    """

    radius: int = 1
    neighbors: int = 8
    border_policy: str = "replicate"
    comparison: str = "strict"
    levels: int = 256

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")
        if self.neighbors < 1:
            raise ValueError(f"neighbors must be >= 1, got {self.neighbors}")
        if self.levels < 2:
            raise ValueError(f"levels must be >= 2, got {self.levels}")
        if self.border_policy not in BORDER_POLICIES:
            raise ValueError(f"border_policy must be one of {BORDER_POLICIES}")
        if self.comparison not in COMPARISONS:
            raise ValueError(f"comparison must be one of {COMPARISONS}")

    @property
    def code_max(self) -> int:
        return (1 << self.neighbors) - 1


@dataclass
class LbpImage:
    """Integer code grid plus the parameters needed to interpret it."""

    codes: np.ndarray
    neighbors: int
    radius: int

    @property
    def code_max(self) -> int:
        return (1 << self.neighbors) - 1


def neighbor_offsets(radius: int, neighbors: int):
    """(dy, dx) per neighbor, east first, counter-clockwise.

    Returns float offsets and whether they are all integral (in which case
    the integer kernel path applies).
    """
    if radius == 1 and neighbors == 8:
        dy = np.array([0, -1, -1, -1, 0, 1, 1, 1], dtype=np.float64)
        dx = np.array([1, 1, 0, -1, -1, -1, 0, 1], dtype=np.float64)
        return dy, dx, True
    p = np.arange(neighbors, dtype=np.float64)
    ang = 2.0 * math.pi * p / neighbors
    dy = -radius * np.sin(ang)
    dx = radius * np.cos(ang)
    dyr, dxr = np.rint(dy), np.rint(dx)
    near = (np.abs(dy - dyr) < 1e-9) & (np.abs(dx - dxr) < 1e-9)
    # snap near-integer components so axis-aligned samples skip interpolation noise
    dy = np.where(near, dyr, dy)
    dx = np.where(near, dxr, dx)
    return dy, dx, bool(near.all())


def quantize(slice_px: np.ndarray, levels: int = 256) -> np.ndarray:
    """Round [0,1] pixels onto integer levels 0..levels-1."""
    px = np.asarray(slice_px)
    if px.ndim != 2:
        raise ValueError(f"expected a 2D slice, got shape {px.shape}")
    if px.size and (px.min() < 0.0 or px.max() > 1.0):
        raise ValueError("slice pixels must lie in [0, 1]")
    return np.rint(px.astype(np.float64) * (levels - 1)).astype(np.int32)


def lbp_encode(slice_px: np.ndarray, spec: LbpSpec = LbpSpec(),
               backend: str | None = None) -> LbpImage:
    """Encode one slice into its LBP code grid."""
    q = quantize(slice_px, spec.levels)
    h, w = q.shape
    if h < 2 * spec.radius + 1 or w < 2 * spec.radius + 1:
        raise ValueError(
            f"slice {h}x{w} too small for radius {spec.radius} (needs >= {2 * spec.radius + 1})")
    codes = _encode_quantized(q, spec, backend)
    return LbpImage(codes=codes, neighbors=spec.neighbors, radius=spec.radius)


def _encode_quantized(q: np.ndarray, spec: LbpSpec, backend: str | None) -> np.ndarray:
    if backend is None:
        backend = backend_name()
    if backend == "native" and _lbpcore is None:
        raise RuntimeError("native LBP kernel requested but not built")
    if backend not in ("native", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    mod = _lbpcore if backend == "native" else _lbp_numpy
    dy, dx, integral = neighbor_offsets(spec.radius, spec.neighbors)
    thresh = 1.0 if spec.comparison == "strict" else 0.0
    zero_border = spec.border_policy == "zero"
    if integral:
        return np.asarray(mod.lbp_codes_int(
            np.ascontiguousarray(q, dtype=np.int32),
            dy.astype(np.int32), dx.astype(np.int32),
            thresh, zero_border, spec.radius))
    return np.asarray(mod.lbp_codes_bilinear(
        np.ascontiguousarray(q, dtype=np.int32), dy, dx,
        thresh, zero_border, spec.radius))


def lbp_normalize(lbp: LbpImage) -> np.ndarray:
    """Map codes to [0, 1] by dividing by the maximum code."""
    codes = np.asarray(lbp.codes)
    if codes.size and (codes.min() < 0 or codes.max() > lbp.code_max):
        raise ValueError(f"codes outside [0, {lbp.code_max}]")
    return (codes.astype(np.float32) / np.float32(lbp.code_max)).astype(np.float32)


def encode_slice_to_unit(slice_px: np.ndarray, spec: LbpSpec = LbpSpec()) -> np.ndarray:
    """Encode then normalize: the texture input fed to the classifier."""
    return lbp_normalize(lbp_encode(slice_px, spec))


def encode_stack_to_unit(slices: np.ndarray, spec: LbpSpec = LbpSpec()) -> np.ndarray:
    """Encode an S x H x W stack slice by slice."""
    return np.stack([encode_slice_to_unit(s, spec) for s in np.asarray(slices)])
