# cython: boundscheck=False, wraparound=False, cdivision=True
"""Native LBP code kernels.

Semantics are shared with livertex._lbp_numpy: a neighbor bit p is set when
sample_p - center >= thresh on the quantized image (thresh 1.0 for strict
comparison, 0.0 for greater-or-equal). Out-of-frame coordinates are clamped
(replicate padding); zero_border instead leaves a `border`-wide ring at 0.
"""

from libc.math cimport floor
from libc.stdint cimport int32_t, int64_t

import numpy as np


def lbp_codes_int(const int32_t[:, :] q, const int32_t[:] dy, const int32_t[:] dx,
                  double thresh, bint zero_border, Py_ssize_t border):
    """Codes for integer neighbor offsets (the radius-1 8-neighborhood path)."""
    cdef Py_ssize_t h = q.shape[0], w = q.shape[1], n = dy.shape[0]
    out_arr = np.zeros((h, w), dtype=np.int64)
    cdef int64_t[:, :] out = out_arr
    cdef Py_ssize_t y, x, p, cy, cx
    cdef Py_ssize_t y0 = 0, y1 = h, x0 = 0, x1 = w
    cdef int32_t c
    cdef double diff
    cdef int64_t code
    if zero_border:
        y0 = border
        y1 = h - border
        x0 = border
        x1 = w - border
    for y in range(y0, y1):
        for x in range(x0, x1):
            c = q[y, x]
            code = 0
            for p in range(n):
                cy = y + dy[p]
                if cy < 0:
                    cy = 0
                elif cy >= h:
                    cy = h - 1
                cx = x + dx[p]
                if cx < 0:
                    cx = 0
                elif cx >= w:
                    cx = w - 1
                diff = q[cy, cx] - c
                if diff >= thresh:
                    code |= (<int64_t>1) << p
            out[y, x] = code
    return out_arr


def lbp_codes_bilinear(const int32_t[:, :] q, const double[:] dy, const double[:] dx,
                       double thresh, bint zero_border, Py_ssize_t border):
    """Codes for fractional circle offsets, bilinearly interpolated."""
    cdef Py_ssize_t h = q.shape[0], w = q.shape[1], n = dy.shape[0]
    out_arr = np.zeros((h, w), dtype=np.int64)
    cdef int64_t[:, :] out = out_arr
    cdef Py_ssize_t y, x, p, iy0, ix0, iy1, ix1
    cdef Py_ssize_t y0 = 0, y1 = h, x0 = 0, x1 = w
    cdef double c, sy, sx, fy, fx, ay, ax, top, bot, val
    cdef int64_t code
    if zero_border:
        y0 = border
        y1 = h - border
        x0 = border
        x1 = w - border
    for y in range(y0, y1):
        for x in range(x0, x1):
            c = q[y, x]
            code = 0
            for p in range(n):
                sy = y + dy[p]
                if sy < 0:
                    sy = 0
                elif sy > h - 1:
                    sy = h - 1
                sx = x + dx[p]
                if sx < 0:
                    sx = 0
                elif sx > w - 1:
                    sx = w - 1
                fy = floor(sy)
                fx = floor(sx)
                iy0 = <Py_ssize_t>fy
                ix0 = <Py_ssize_t>fx
                iy1 = iy0 + 1 if iy0 + 1 < h else h - 1
                ix1 = ix0 + 1 if ix0 + 1 < w else w - 1
                ay = sy - fy
                ax = sx - fx
                top = q[iy0, ix0] + ax * (q[iy0, ix1] - q[iy0, ix0])
                bot = q[iy1, ix0] + ax * (q[iy1, ix1] - q[iy1, ix0])
                val = top + ay * (bot - top)
                if val - c >= thresh:
                    code |= (<int64_t>1) << p
            out[y, x] = code
    return out_arr
