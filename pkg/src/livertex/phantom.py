"""Labeled synthetic liver phantoms for end-to-end runs without clinical data.

Each patient gets an elliptical "liver" with a nodular boundary, filled with
base HU modulated by multiplicative speckle whose correlation length depends
on the patient's texture category; all four score labels are driven by that
one category. Everything is derived from per-patient seeds, so a spec
generates byte-identical data every time.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from . import data_io
from .corruption import derive_seed
from .preprocess import HuVolume

# Raw scores assigned per texture category (combined-category index per task).
_RAW_BY_CATEGORY = {
    "fibrosis": (0.0, 1.0, 3.0),
    "steatosis": (0, 2, 2),
    "lobular": (0, 1, 2),
    "ballooning": (0, 1, 2),
}

_SPECKLE_GAIN = 2.0   # speckle amplitude in units of noise_sigma
_ADDITIVE_GAIN = 0.5  # pixel noise amplitude in units of noise_sigma


@dataclass
class PhantomSpec:
    n_patients: int = 30
    slices_per_patient: int = 20
    dims: int = 64
    texture_scales: tuple = (1.5, 6.0)
    nodularity_amplitudes: tuple = (0.5, 3.0)
    base_hu: float = 60.0
    noise_sigma: float = 8.0
    seed: int = 0

    def __post_init__(self):
        if self.n_patients < 0 or self.slices_per_patient < 1:
            raise ValueError("n_patients must be >= 0 and slices_per_patient >= 1")
        scales = tuple(self.texture_scales)
        amps = tuple(self.nodularity_amplitudes)
        if len(scales) != len(amps) or not scales:
            raise ValueError("texture_scales and nodularity_amplitudes must share one length")
        if len(scales) > 3:
            raise ValueError("at most 3 texture categories are supported")
        if any(b <= a for a, b in zip(scales, scales[1:])):
            raise ValueError("texture_scales must be strictly increasing")
        # ellipse plus nodularity plus jitter must stay inside the frame
        if max(amps) > 0.14 * self.dims - 3:
            raise ValueError(
                f"dims {self.dims} too small for nodularity up to {max(amps)} px")

    @property
    def n_categories(self) -> int:
        return len(tuple(self.texture_scales))


def _boundary_wobble(theta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Smooth periodic perturbation of the boundary radius, max |value| = 1."""
    g = np.zeros_like(theta)
    for m in range(2, 6):
        g += rng.normal() * np.cos(m * theta + rng.uniform(0, 2 * np.pi))
    peak = np.max(np.abs(g))
    return g / peak if peak > 0 else g


def _phantom_slice(dims, k, n_slices, scale, amp, base_hu, noise_sigma, rng):
    d = dims
    cy = d / 2 + rng.uniform(-2, 2)
    cx = d / 2 + rng.uniform(-2, 2)
    extent = 0.28 + 0.08 * np.sin(np.pi * (k + 1) / (n_slices + 1))
    ay = extent * d
    ax = (extent + rng.uniform(-0.02, 0.02)) * d

    yy, xx = np.indices((d, d), dtype=np.float64)
    theta = np.arctan2(yy - cy, xx - cx)
    dist = np.hypot(yy - cy, xx - cx)
    r_ell = ay * ax / np.sqrt((ax * np.sin(theta)) ** 2 + (ay * np.cos(theta)) ** 2)
    rho = amp * _boundary_wobble(theta, rng)
    mask = (dist <= r_ell + rho).astype(np.uint8)

    speckle = gaussian_filter(rng.normal(size=(d, d)), sigma=scale, mode="reflect")
    sd = speckle.std()
    if sd > 0:
        speckle /= sd
    deviation = (_SPECKLE_GAIN * noise_sigma * speckle
                 + _ADDITIVE_GAIN * noise_sigma * rng.normal(size=(d, d)))
    bound = 5.0 * noise_sigma - 0.5  # keep rounded voxels within +-5 sigma
    deviation = np.clip(deviation, -bound, bound)
    voxels = np.where(mask == 1, np.rint(base_hu + deviation), -1000.0).astype(np.int32)
    return voxels, mask


def gen_phantom_dataset(spec: PhantomSpec):
    """Generate (volumes, label rows); categories cycle over patients."""
    volumes = []
    rows = []
    scales = tuple(spec.texture_scales)
    amps = tuple(spec.nodularity_amplitudes)
    for p in range(spec.n_patients):
        cat = p % spec.n_categories
        rng = np.random.default_rng(derive_seed(spec.seed, p))
        pid = f"phantom_{p:03d}"
        vox = np.empty((spec.slices_per_patient, spec.dims, spec.dims), dtype=np.int32)
        msk = np.empty_like(vox, dtype=np.uint8)
        for k in range(spec.slices_per_patient):
            vox[k], msk[k] = _phantom_slice(
                spec.dims, k, spec.slices_per_patient, scales[cat], amps[cat],
                spec.base_hu, spec.noise_sigma, rng)
        volumes.append(HuVolume(vox, msk, pid))
        rows.append({"patient_id": pid,
                     "fibrosis": _RAW_BY_CATEGORY["fibrosis"][cat],
                     "steatosis": _RAW_BY_CATEGORY["steatosis"][cat],
                     "lobular": _RAW_BY_CATEGORY["lobular"][cat],
                     "ballooning": _RAW_BY_CATEGORY["ballooning"][cat]})
    return volumes, rows


def write_phantom_dataset(spec: PhantomSpec, out_dir: str):
    """Generate and persist the dataset in the raw volume layout + labels.csv."""
    volumes, rows = gen_phantom_dataset(spec)
    os.makedirs(out_dir, exist_ok=True)
    for vol in volumes:
        data_io.write_volume(os.path.join(out_dir, vol.patient_id), vol)
    data_io.write_labels(os.path.join(out_dir, "labels.csv"), rows)
    return volumes, rows
