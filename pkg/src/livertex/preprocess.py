"""CT slice preparation: HU windowing, liver masking, filtering, resizing.

All functions here are pure and deterministic; volumes are numpy arrays in
Hounsfield units, slices are 2D float32 arrays in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_WINDOW = (-200.0, 250.0)
DEFAULT_MEAN_THRESHOLD = 5.0
DEFAULT_VALUE_SCALE = 255.0
DEFAULT_TARGET = 224


@dataclass
class WindowSpec:
    """HU clamp range mapped affinely onto [0, 1]."""

    lo: float = DEFAULT_WINDOW[0]
    hi: float = DEFAULT_WINDOW[1]

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"degenerate window: lo={self.lo} must be < hi={self.hi}")


@dataclass
class HuVolume:
    """3D HU voxel grid with a same-shaped binary liver mask."""

    voxels: np.ndarray
    mask: np.ndarray
    patient_id: str
    slice_axis: int = 0

    def __post_init__(self):
        self.voxels = np.asarray(self.voxels)
        self.mask = np.asarray(self.mask)
        if self.voxels.ndim != 3:
            raise ValueError(f"voxels must be 3D, got shape {self.voxels.shape}")
        if self.mask.shape != self.voxels.shape:
            raise ValueError(
                f"mask shape {self.mask.shape} != voxel shape {self.voxels.shape}"
            )
        vals = np.unique(self.mask)
        if not np.isin(vals, (0, 1)).all():
            raise ValueError("mask values must be 0 or 1")
        if not 0 <= self.slice_axis < 3:
            raise ValueError(f"slice_axis must be 0..2, got {self.slice_axis}")

    @property
    def n_slices(self) -> int:
        return self.voxels.shape[self.slice_axis]


def window_hu(voxels: np.ndarray, spec: WindowSpec = WindowSpec()) -> np.ndarray:
    """Clamp HU values to [spec.lo, spec.hi] and rescale onto [0, 1]."""
    if not spec.lo < spec.hi:
        raise ValueError(f"degenerate window: lo={spec.lo} must be < hi={spec.hi}")
    v = np.clip(np.asarray(voxels, dtype=np.float32), spec.lo, spec.hi)
    return ((v - spec.lo) / (spec.hi - spec.lo)).astype(np.float32)


def apply_mask(slice_px: np.ndarray, mask_slice: np.ndarray) -> np.ndarray:
    """Zero out pixels outside the mask."""
    slice_px = np.asarray(slice_px, dtype=np.float32)
    mask_slice = np.asarray(mask_slice)
    if slice_px.shape != mask_slice.shape:
        raise ValueError(
            f"slice shape {slice_px.shape} != mask shape {mask_slice.shape}"
        )
    return np.where(mask_slice != 0, slice_px, np.float32(0.0)).astype(np.float32)


def slice_passes(
    slice_px: np.ndarray,
    threshold: float = DEFAULT_MEAN_THRESHOLD,
    value_scale: float = DEFAULT_VALUE_SCALE,
) -> bool:
    """Keep a slice iff its mean pixel value on the value_scale meets threshold."""
    return float(np.mean(slice_px)) * value_scale >= threshold


def filter_slices(
    slices: list[np.ndarray],
    threshold: float = DEFAULT_MEAN_THRESHOLD,
    value_scale: float = DEFAULT_VALUE_SCALE,
) -> list[np.ndarray]:
    """Retain slices whose mean*value_scale >= threshold, preserving order."""
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    return [s for s in slices if slice_passes(s, threshold, value_scale)]


def resize_slice(slice_px: np.ndarray, target: int) -> np.ndarray:
    """Bilinear resize to target x target, corner-aligned, clamped to [0, 1].

    Output pixel (i, j) samples the input at
    (i * (H-1)/(target-1), j * (W-1)/(target-1)).
    """
    if target < 2:
        raise ValueError(f"resize target must be >= 2, got {target}")
    src = np.asarray(slice_px, dtype=np.float64)
    if src.ndim != 2:
        raise ValueError(f"expected a 2D slice, got shape {src.shape}")
    h, w = src.shape
    if h < 1 or w < 1:
        raise ValueError("empty slice")
    if (h, w) == (target, target):
        return np.clip(src, 0.0, 1.0).astype(np.float32)

    def axis_coords(n_src, n_dst):
        if n_src == 1:
            return np.zeros(n_dst), np.zeros(n_dst, dtype=np.intp), np.zeros(n_dst, dtype=np.intp)
        pos = np.arange(n_dst) * (n_src - 1) / (n_dst - 1)
        lo = np.floor(pos).astype(np.intp)
        hi = np.minimum(lo + 1, n_src - 1)
        return pos - lo, lo, hi

    fy, y0, y1 = axis_coords(h, target)
    fx, x0, x1 = axis_coords(w, target)
    top = src[np.ix_(y0, x0)] * (1 - fx) + src[np.ix_(y0, x1)] * fx
    bot = src[np.ix_(y1, x0)] * (1 - fx) + src[np.ix_(y1, x1)] * fx
    out = top * (1 - fy)[:, None] + bot * fy[:, None]
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def preprocess_volume(
    volume: HuVolume,
    spec: WindowSpec = WindowSpec(),
    threshold: float = DEFAULT_MEAN_THRESHOLD,
    target: int = DEFAULT_TARGET,
    value_scale: float = DEFAULT_VALUE_SCALE,
    mean_over_masked_only: bool = False,
) -> list[np.ndarray]:
    """Window, mask, filter, and resize every axial slice of one volume.

    Returns the retained slices (possibly empty; the caller decides how to
    treat an empty patient). The mean threshold is checked on the masked
    slice before resizing and again on the resized output, so no emitted
    slice ever falls below it. With mean_over_masked_only the pre-resize
    mean is taken over liver pixels instead of the whole frame.
    """
    windowed = window_hu(volume.voxels, spec)
    out = []
    for k in range(volume.n_slices):
        px = np.take(windowed, k, axis=volume.slice_axis)
        msk = np.take(volume.mask, k, axis=volume.slice_axis)
        masked = apply_mask(px, msk)
        if mean_over_masked_only:
            n_in = int(np.count_nonzero(msk))
            mean = float(masked.sum() / n_in) if n_in else 0.0
            if mean * value_scale < threshold:
                continue
            out.append(resize_slice(masked, target))
            continue
        if not slice_passes(masked, threshold, value_scale):
            continue
        resized = resize_slice(masked, target)
        if not slice_passes(resized, threshold, value_scale):
            continue
        out.append(resized)
    return out
