"""Pure-NumPy LBP code kernels, semantics identical to livertex._lbpcore.

Used automatically when the compiled extension is unavailable (or when
LIVERTEX_PURE=1). One vectorized pass per neighbor.
"""

from __future__ import annotations

import numpy as np


def lbp_codes_int(q, dy, dx, thresh, zero_border, border):
    """Codes for integer neighbor offsets via edge-replicated shifts."""
    h, w = q.shape
    pad = int(border)
    qp = np.pad(q, pad, mode="edge")
    center = q.astype(np.int64)
    codes = np.zeros((h, w), dtype=np.int64)
    for p in range(len(dy)):
        oy, ox = int(dy[p]), int(dx[p])
        shifted = qp[pad + oy:pad + oy + h, pad + ox:pad + ox + w].astype(np.int64)
        codes |= ((shifted - center) >= thresh).astype(np.int64) << p
    if zero_border:
        codes = _zero_ring(codes, border)
    return codes


def lbp_codes_bilinear(q, dy, dx, thresh, zero_border, border):
    """Codes for fractional circle offsets, bilinearly interpolated."""
    h, w = q.shape
    qf = q.astype(np.float64)
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    center = qf
    codes = np.zeros((h, w), dtype=np.int64)
    for p in range(len(dy)):
        sy = np.clip(yy + dy[p], 0.0, h - 1.0)
        sx = np.clip(xx + dx[p], 0.0, w - 1.0)
        fy = np.floor(sy)
        fx = np.floor(sx)
        iy0 = fy.astype(np.intp)
        ix0 = fx.astype(np.intp)
        iy1 = np.minimum(iy0 + 1, h - 1)
        ix1 = np.minimum(ix0 + 1, w - 1)
        ay = sy - fy
        ax = sx - fx
        v00 = qf[iy0, ix0]
        v01 = qf[iy0, ix1]
        v10 = qf[iy1, ix0]
        v11 = qf[iy1, ix1]
        top = v00 + ax * (v01 - v00)
        bot = v10 + ax * (v11 - v10)
        val = top + ay * (bot - top)
        codes |= ((val - center) >= thresh).astype(np.int64) << p
    if zero_border:
        codes = _zero_ring(codes, border)
    return codes


def _zero_ring(codes, border):
    h, w = codes.shape
    out = np.zeros_like(codes)
    if h > 2 * border and w > 2 * border:
        out[border:h - border, border:w - border] = codes[border:h - border, border:w - border]
    return out
