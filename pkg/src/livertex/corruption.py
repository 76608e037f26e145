"""Patch-swap corruption for restoration pretraining.

Corrupting a slice exchanges the contents of a pair of non-overlapping
random square patches, repeated for a number of rounds on the evolving
image. Swapping only permutes pixels, so the pixel multiset is conserved
and replaying the logged swaps in reverse recovers the original.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REJECTION_CAP = 1000

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 scrambling step; used to derive per-item seeds."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(seed: int, index: int) -> int:
    """Independent stream seed for item `index` under master `seed`."""
    return splitmix64((seed ^ index) & _MASK64)


@dataclass
class CorruptionSpec:
    patch_size: int = 20
    iterations: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if self.patch_size < 1:
            raise ValueError(f"patch_size must be >= 1, got {self.patch_size}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")

    def validate_for(self, height: int, width: int) -> None:
        if 2 * self.patch_size * self.patch_size > height * width:
            raise ValueError(
                f"two {self.patch_size}px patches exceed a {height}x{width} image")
        _check_pair_possible(height, width, self.patch_size)


@dataclass
class PatchPair:
    """Top-left origins (row, col) of two disjoint patch_size squares."""

    a_origin: tuple[int, int]
    b_origin: tuple[int, int]
    patch_size: int

    def disjoint(self) -> bool:
        (ay, ax), (by, bx), s = self.a_origin, self.b_origin, self.patch_size
        return abs(ay - by) >= s or abs(ax - bx) >= s

    def inside(self, height: int, width: int) -> bool:
        s = self.patch_size
        return all(0 <= y <= height - s and 0 <= x <= width - s
                   for y, x in (self.a_origin, self.b_origin))


def _check_pair_possible(height: int, width: int, patch_size: int) -> None:
    if patch_size > min(height, width):
        raise ValueError(
            f"patch {patch_size}px does not fit a {height}x{width} image")
    if height < 2 * patch_size and width < 2 * patch_size:
        raise ValueError(
            f"no two disjoint {patch_size}px patches fit a {height}x{width} image")


def sample_patch_pair(height: int, width: int, patch_size: int,
                      rng: np.random.Generator) -> PatchPair:
    """Draw two uniform patch origins, resampling the second until disjoint.

    In cramped frames some first positions admit no disjoint partner; those
    are redrawn so the geometry-guaranteed pair is always found.
    """
    _check_pair_possible(height, width, patch_size)
    ymax = height - patch_size
    xmax = width - patch_size

    def admits_partner(y, x):
        return (y >= patch_size or ymax - y >= patch_size
                or x >= patch_size or xmax - x >= patch_size)

    for _ in range(REJECTION_CAP):
        ay = int(rng.integers(0, ymax + 1))
        ax = int(rng.integers(0, xmax + 1))
        if admits_partner(ay, ax):
            break
    else:
        raise ValueError(
            f"no first patch with a disjoint partner found in {REJECTION_CAP} draws "
            f"({height}x{width}, patch {patch_size})")
    for _ in range(REJECTION_CAP):
        by = int(rng.integers(0, ymax + 1))
        bx = int(rng.integers(0, xmax + 1))
        pair = PatchPair((ay, ax), (by, bx), patch_size)
        if pair.disjoint():
            return pair
    raise ValueError(
        f"no disjoint patch pair found in {REJECTION_CAP} draws "
        f"({height}x{width}, patch {patch_size})")


def _swap(px: np.ndarray, pair: PatchPair) -> None:
    s = pair.patch_size
    (ay, ax), (by, bx) = pair.a_origin, pair.b_origin
    a = px[ay:ay + s, ax:ax + s].copy()
    px[ay:ay + s, ax:ax + s] = px[by:by + s, bx:bx + s]
    px[by:by + s, bx:bx + s] = a


def corrupt(slice_px: np.ndarray, spec: CorruptionSpec) -> tuple[np.ndarray, list[PatchPair]]:
    """Apply spec.iterations sequential pair swaps; returns (corrupted, log)."""
    px = np.array(slice_px, dtype=np.float32, copy=True)
    if px.ndim != 2:
        raise ValueError(f"expected a 2D slice, got shape {px.shape}")
    h, w = px.shape
    if spec.iterations > 0:
        spec.validate_for(h, w)
    rng = np.random.default_rng(spec.rng_seed)
    log = []
    for _ in range(spec.iterations):
        pair = sample_patch_pair(h, w, spec.patch_size, rng)
        _swap(px, pair)
        log.append(pair)
    return px, log


def replay_inverse(corrupted: np.ndarray, log: list[PatchPair]) -> np.ndarray:
    """Undo a corruption by reapplying the logged swaps in reverse order."""
    px = np.array(corrupted, dtype=np.float32, copy=True)
    for pair in reversed(log):
        _swap(px, pair)
    return px
