"""On-disk formats for volumes, preprocessed slices, and score labels.

Volume layout A (raw): one directory per patient holding
    volume.raw  little-endian int16 HU voxels, C order, shape dims
    mask.raw    uint8 liver mask (0/1), same shape
    meta.json   {"dims": [z, y, x], "spacing_mm": [z, y, x], "patient_id": ...}

Volume layout B (png): per-slice 16-bit grayscale PNGs slice_0000.png ...
with meta.json carrying "hu_offset"; HU = stored value + hu_offset. Optional
mask_0000.png ... (nonzero = liver); a missing mask means all-liver.

Preprocessed slices: prep/<patient_id>/slice_0000.f32 ... as raw little-endian
float32, square side recorded in prep/index.json.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .preprocess import HuVolume


class DataError(Exception):
    """Missing or malformed on-disk data."""


def _require(path: str) -> str:
    if not os.path.exists(path):
        raise DataError(f"missing required file: {path}")
    return path


def write_volume(dirpath: str, volume: HuVolume, spacing_mm=(1.0, 1.0, 1.0)) -> None:
    """Write one patient volume in the raw layout."""
    os.makedirs(dirpath, exist_ok=True)
    vox = np.ascontiguousarray(volume.voxels, dtype="<i2")
    msk = np.ascontiguousarray(volume.mask, dtype=np.uint8)
    vox.tofile(os.path.join(dirpath, "volume.raw"))
    msk.tofile(os.path.join(dirpath, "mask.raw"))
    meta = {
        "dims": list(vox.shape),
        "spacing_mm": list(spacing_mm),
        "patient_id": volume.patient_id,
    }
    with open(os.path.join(dirpath, "meta.json"), "w") as f:
        json.dump(meta, f, indent=1, sort_keys=True)
        f.write("\n")


def read_volume(dirpath: str) -> HuVolume:
    """Read one patient volume from either accepted layout."""
    meta_path = _require(os.path.join(dirpath, "meta.json"))
    with open(meta_path) as f:
        meta = json.load(f)
    if "dims" not in meta or "patient_id" not in meta:
        raise DataError(f"meta.json in {dirpath} must carry dims and patient_id")
    dims = tuple(int(d) for d in meta["dims"])
    patient_id = str(meta["patient_id"])

    raw_path = os.path.join(dirpath, "volume.raw")
    if os.path.exists(raw_path):
        vox = np.fromfile(raw_path, dtype="<i2")
        if vox.size != int(np.prod(dims)):
            raise DataError(f"{raw_path}: expected {np.prod(dims)} voxels, got {vox.size}")
        vox = vox.reshape(dims).astype(np.int32)
        msk = np.fromfile(_require(os.path.join(dirpath, "mask.raw")), dtype=np.uint8)
        if msk.size != vox.size:
            raise DataError(f"mask.raw size mismatch in {dirpath}")
        msk = (msk.reshape(dims) != 0).astype(np.uint8)
        return HuVolume(vox, msk, patient_id)
    return _read_png_volume(dirpath, meta, dims, patient_id)


def _read_png_volume(dirpath, meta, dims, patient_id) -> HuVolume:
    from PIL import Image

    if "hu_offset" not in meta:
        raise DataError(f"png layout in {dirpath} requires hu_offset in meta.json")
    hu_offset = int(meta["hu_offset"])
    n_slices = dims[0]
    vox = np.empty(dims, dtype=np.int32)
    msk = np.ones(dims, dtype=np.uint8)
    for k in range(n_slices):
        png = _require(os.path.join(dirpath, f"slice_{k:04d}.png"))
        arr = np.asarray(Image.open(png), dtype=np.int64)
        if arr.shape != dims[1:]:
            raise DataError(f"{png}: shape {arr.shape} != dims {dims[1:]}")
        vox[k] = (arr + hu_offset).astype(np.int32)
        mask_png = os.path.join(dirpath, f"mask_{k:04d}.png")
        if os.path.exists(mask_png):
            msk[k] = (np.asarray(Image.open(mask_png)) != 0).astype(np.uint8)
    return HuVolume(vox, msk, patient_id)


def write_png_volume(dirpath: str, volume: HuVolume, hu_offset: int = -32768,
                     spacing_mm=(1.0, 1.0, 1.0)) -> None:
    """Write one patient volume in the per-slice 16-bit PNG layout."""
    from PIL import Image

    os.makedirs(dirpath, exist_ok=True)
    vox = np.asarray(volume.voxels, dtype=np.int64)
    stored = vox - hu_offset
    if stored.min() < 0 or stored.max() > 65535:
        raise DataError("HU values do not fit 16-bit storage with this hu_offset")
    for k in range(vox.shape[0]):
        Image.fromarray(stored[k].astype(np.uint16)).save(
            os.path.join(dirpath, f"slice_{k:04d}.png"))
        Image.fromarray((volume.mask[k] * 255).astype(np.uint8)).save(
            os.path.join(dirpath, f"mask_{k:04d}.png"))
    meta = {
        "dims": list(vox.shape),
        "spacing_mm": list(spacing_mm),
        "patient_id": volume.patient_id,
        "hu_offset": hu_offset,
    }
    with open(os.path.join(dirpath, "meta.json"), "w") as f:
        json.dump(meta, f, indent=1, sort_keys=True)
        f.write("\n")


def list_patient_dirs(data_dir: str) -> list[str]:
    """Patient subdirectories (those carrying meta.json), sorted by name."""
    if not os.path.isdir(data_dir):
        raise DataError(f"missing data directory: {data_dir}")
    out = []
    for name in sorted(os.listdir(data_dir)):
        sub = os.path.join(data_dir, name)
        if os.path.isdir(sub) and os.path.exists(os.path.join(sub, "meta.json")):
            out.append(sub)
    return out


# --- preprocessed slice store -------------------------------------------------

def write_slices(prep_dir: str, patient_id: str, slices: list[np.ndarray]) -> None:
    """Persist slices for one patient as raw float32 files and update the index."""
    if not slices:
        raise DataError(f"refusing to store an empty slice list for {patient_id}")
    pdir = os.path.join(prep_dir, patient_id)
    os.makedirs(pdir, exist_ok=True)
    files = []
    size = None
    for k, s in enumerate(slices):
        s = np.ascontiguousarray(s, dtype="<f4")
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise DataError(f"slice {k} for {patient_id} is not square 2D")
        if size is None:
            size = int(s.shape[0])
        elif s.shape[0] != size:
            raise DataError(f"inconsistent slice sizes for {patient_id}")
        fname = f"slice_{k:04d}.f32"
        s.tofile(os.path.join(pdir, fname))
        files.append(fname)
    index = read_index(prep_dir) if os.path.exists(_index_path(prep_dir)) else {}
    index[patient_id] = {"n_slices": len(files), "size": size, "files": files}
    with open(_index_path(prep_dir), "w") as f:
        json.dump(index, f, indent=1, sort_keys=True)
        f.write("\n")


def _index_path(prep_dir: str) -> str:
    return os.path.join(prep_dir, "index.json")


def read_index(prep_dir: str) -> dict:
    with open(_require(_index_path(prep_dir))) as f:
        return json.load(f)


def read_slices(prep_dir: str, patient_id: str) -> np.ndarray:
    """Load one patient's slices as an S x size x size float32 stack."""
    index = read_index(prep_dir)
    if patient_id not in index:
        raise DataError(f"patient {patient_id} not in {_index_path(prep_dir)}")
    entry = index[patient_id]
    size = int(entry["size"])
    stack = np.empty((entry["n_slices"], size, size), dtype=np.float32)
    for k, fname in enumerate(entry["files"]):
        path = _require(os.path.join(prep_dir, patient_id, fname))
        arr = np.fromfile(path, dtype="<f4")
        if arr.size != size * size:
            raise DataError(f"{path}: expected {size * size} floats, got {arr.size}")
        stack[k] = arr.reshape(size, size)
    return stack


def read_all_slices(prep_dir: str) -> dict[str, np.ndarray]:
    """Load every patient stack keyed by patient id, sorted by id."""
    index = read_index(prep_dir)
    return {pid: read_slices(prep_dir, pid) for pid in sorted(index)}


# --- score labels ---------------------------------------------------------------

LABEL_COLUMNS = ("patient_id", "fibrosis", "steatosis", "lobular", "ballooning")


def write_labels(path: str, rows: list[dict]) -> None:
    """Write labels.csv with the canonical column order."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as f:
        f.write(",".join(LABEL_COLUMNS) + "\n")
        for row in rows:
            f.write(",".join(str(row[c]) for c in LABEL_COLUMNS) + "\n")


def read_labels(path: str) -> dict[str, dict]:
    """Read labels.csv into {patient_id: {task: raw score}}."""
    out = {}
    with open(_require(path)) as f:
        header = f.readline().strip().split(",")
        if tuple(header) != LABEL_COLUMNS:
            raise DataError(
                f"{path}: expected columns {','.join(LABEL_COLUMNS)}, got {','.join(header)}")
        for line in f:
            line = line.strip()
            if not line:
                continue
            vals = line.split(",")
            if len(vals) != len(LABEL_COLUMNS):
                raise DataError(f"{path}: malformed row: {line}")
            pid = vals[0]
            out[pid] = {
                "fibrosis": float(vals[1]),
                "steatosis": float(vals[2]),
                "lobular": float(vals[3]),
                "ballooning": float(vals[4]),
            }
    return out
