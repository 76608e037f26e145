#!/usr/bin/env python3
"""Benchmark the LBP kernels: compiled extension vs NumPy fallback.

Also times a naive per-pixel Python loop for reference. Run:

    python3 benchmarks/bench_lbp.py [--slices 50] [--size 224]
"""

import argparse
import time

import numpy as np

from livertex import lbp as lbp_mod
from livertex.lbp import LbpSpec, lbp_encode


def naive_loop(pixels, levels=256):
    q = np.rint(np.asarray(pixels, dtype=np.float64) * (levels - 1)).astype(int)
    h, w = q.shape
    offsets = ((0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1))
    codes = np.zeros((h, w), dtype=np.int64)
    for y in range(h):
        for x in range(w):
            c = q[y, x]
            code = 0
            for p, (dy, dx) in enumerate(offsets):
                ny = min(max(y + dy, 0), h - 1)
                nx = min(max(x + dx, 0), w - 1)
                if q[ny, nx] - c >= 1:
                    code |= 1 << p
            codes[y, x] = code
    return codes


def bench(fn, slices, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for s in slices:
            fn(s)
        best = min(best, time.perf_counter() - t0)
    return best / len(slices)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--slices", type=int, default=50)
    ap.add_argument("--size", type=int, default=224)
    ap.add_argument("--naive", action="store_true", help="include the pure-Python loop")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    slices = [rng.random((args.size, args.size)).astype(np.float32)
              for _ in range(args.slices)]
    spec = LbpSpec()

    rows = []
    if lbp_mod._lbpcore is not None:
        rows.append(("native (Cython)",
                     bench(lambda s: lbp_encode(s, spec, backend="native"), slices)))
    else:
        print("note: compiled extension not built, skipping the native row")
    rows.append(("numpy fallback",
                 bench(lambda s: lbp_encode(s, spec, backend="numpy"), slices)))
    if args.naive:
        rows.append(("naive Python loop", bench(naive_loop, slices[:2], repeat=1)))

    # both backends must agree before times mean anything
    if lbp_mod._lbpcore is not None:
        a = lbp_encode(slices[0], spec, backend="native").codes
        b = lbp_encode(slices[0], spec, backend="numpy").codes
        assert np.array_equal(a, b), "backend outputs diverge"

    print(f"\nLBP encode, {args.size}x{args.size}, radius 1, 8 neighbors "
          f"({args.slices} slices, best of 3):")
    base = rows[-1][1] if not args.naive else rows[1][1]
    for name, per_slice in rows:
        print(f"  {name:20s} {per_slice * 1e3:9.3f} ms/slice   "
              f"({base / per_slice:5.1f}x vs numpy)")


if __name__ == "__main__":
    main()
