"""Checkpoint format: versioned JSON descriptor + raw float32 tensor blocks.

A checkpoint is a single file:

    8-byte magic "LXMSTA01", uint32 LE descriptor length, descriptor JSON,
    then one little-endian float32 block per entry, in descriptor order.

The descriptor records the architecture (enough to rebuild the module), the
name/shape/dtype/trainable flag of every tensor, and free-form provenance
(seed, epochs, loss history). Non-float tensors (batchnorm step counters)
are stored as float32 and cast back on load.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np
import torch

from . import nets

MAGIC = b"LXMSTA01"
FORMAT_VERSION = 1


@dataclass
class ModelState:
    descriptor: dict
    tensors: dict[str, np.ndarray]

    @property
    def kind(self) -> str:
        return self.descriptor["kind"]

    @property
    def arch(self) -> dict:
        return self.descriptor["arch"]

    @property
    def provenance(self) -> dict:
        return self.descriptor.get("provenance", {})

    def param_count(self) -> int:
        return sum(int(np.prod(e["shape"])) for e in self.descriptor["entries"]
                   if e["kind"] == "param")

    def trainable_names(self) -> list[str]:
        return [e["name"] for e in self.descriptor["entries"]
                if e["kind"] == "param" and e["trainable"]]


def state_from_module(module: torch.nn.Module, kind: str, arch: dict,
                      provenance: dict | None = None) -> ModelState:
    """Snapshot a module; trainable flags follow requires_grad."""
    entries = []
    tensors = {}
    params = dict(module.named_parameters())
    for name, t in module.state_dict().items():
        arr = t.detach().cpu().numpy()
        entries.append({
            "name": name,
            "shape": list(arr.shape),
            "dtype": str(arr.dtype),
            "kind": "param" if name in params else "buffer",
            "trainable": bool(params[name].requires_grad) if name in params else False,
        })
        tensors[name] = np.asarray(arr, dtype=np.float32)  # asarray keeps 0-d shapes
    descriptor = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "arch": arch,
        "entries": entries,
        "provenance": provenance or {},
    }
    return ModelState(descriptor, tensors)


def save_state(state: ModelState, path: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    header = json.dumps(state.descriptor, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(np.uint32(len(header)).tobytes())
        f.write(header)
        for entry in state.descriptor["entries"]:
            block = np.asarray(state.tensors[entry["name"]], dtype="<f4")
            if list(block.shape) != entry["shape"]:
                raise ValueError(f"tensor {entry['name']} shape drifted from descriptor")
            f.write(block.tobytes())


def load_state(path: str) -> ModelState:
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"{path}: not a model checkpoint (bad magic)")
        (hlen,) = np.frombuffer(f.read(4), dtype="<u4")
        descriptor = json.loads(f.read(int(hlen)).decode())
        if descriptor.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version")
        tensors = {}
        for entry in descriptor["entries"]:
            count = int(np.prod(entry["shape"])) if entry["shape"] else 1
            buf = f.read(4 * count)
            if len(buf) != 4 * count:
                raise ValueError(f"{path}: truncated block for {entry['name']}")
            tensors[entry["name"]] = np.frombuffer(buf, dtype="<f4").reshape(entry["shape"]).copy()
    return ModelState(descriptor, tensors)


def load_into_module(state: ModelState, module: torch.nn.Module) -> None:
    """Copy checkpoint tensors into a compatible module, casting dtypes back."""
    sd = module.state_dict()
    expected = set(sd)
    got = {e["name"] for e in state.descriptor["entries"]}
    if expected != got:
        raise ValueError(
            f"architecture mismatch: module tensors {sorted(expected ^ got)} unmatched")
    new_sd = {}
    for entry in state.descriptor["entries"]:
        name = entry["name"]
        target = sd[name]
        if list(target.shape) != entry["shape"]:
            raise ValueError(
                f"architecture mismatch on {name}: {list(target.shape)} != {entry['shape']}")
        arr = state.tensors[name].astype(entry["dtype"])
        new_sd[name] = torch.from_numpy(arr).to(target.dtype)
    module.load_state_dict(new_sd)


def build_module(state: ModelState) -> torch.nn.Module:
    """Rebuild the module described by a checkpoint and load its tensors."""
    module = _module_for(state.kind, state.arch)
    load_into_module(state, module)
    return module


def _module_for(kind: str, arch: dict) -> torch.nn.Module:
    if kind == "encoder":
        return nets.Encoder(arch["in_channels"], arch["channels"])
    if kind == "encoder_decoder":
        return torch.nn.ModuleDict({
            "encoder": nets.Encoder(arch["in_channels"], arch["encoder_channels"]),
            "decoder": nets.Decoder(arch["encoder_channels"][-1],
                                    arch["decoder_channels"], arch["in_channels"]),
        })
    if kind == "discriminator":
        return nets.Discriminator(arch["image_size"], arch["in_channels"], arch["channels"])
    if kind == "classifier":
        enc = nets.Encoder(arch["in_channels"], arch["encoder_channels"])
        head = nets.ClassifierHead(arch["num_categories"], arch["encoder_channels"][-1],
                                   arch["head_hidden"])
        return nets.SliceClassifier(enc, head)
    raise ValueError(f"unknown model kind {kind!r}")


def expected_param_count(kind: str, arch: dict) -> int:
    """Parameter count implied by the architecture descriptor alone."""

    def conv(c_in, c_out, k=3):
        return c_out * c_in * k * k + c_out

    def fc(n_in, n_out):
        return n_out * n_in + n_out

    if kind == "encoder":
        total, c_in = 0, arch["in_channels"]
        for c_out in arch["channels"]:
            total += conv(c_in, c_out)
            c_in = c_out
        return total
    if kind == "encoder_decoder":
        enc = expected_param_count("encoder", {"in_channels": arch["in_channels"],
                                               "channels": arch["encoder_channels"]})
        total, c_in = 0, arch["encoder_channels"][-1]
        for c_out in arch["decoder_channels"]:
            total += conv(c_in, c_out)
            c_in = c_out
        total += conv(c_in, arch["in_channels"])
        return enc + total
    if kind == "discriminator":
        total, c_in = 0, arch["in_channels"]
        for i, c_out in enumerate(arch["channels"]):
            total += conv(c_in, c_out)
            if i > 0:
                total += 2 * c_out  # batchnorm scale + shift
            c_in = c_out
        side = arch["image_size"] // 2 ** len(arch["channels"])
        return total + fc(c_in * side * side, 1)
    if kind == "classifier":
        enc = expected_param_count("encoder", {"in_channels": arch["in_channels"],
                                               "channels": arch["encoder_channels"]})
        h1, h2 = arch["head_hidden"]
        feat = arch["encoder_channels"][-1]
        return enc + fc(feat, h1) + fc(h1, h2) + fc(h2, arch["num_categories"])
    raise ValueError(f"unknown model kind {kind!r}")


def encoder_state_from(state: ModelState) -> ModelState:
    """Encoder-only view of an encoder or encoder_decoder checkpoint."""
    if state.kind == "encoder":
        return state
    if state.kind != "encoder_decoder":
        raise ValueError(f"cannot take an encoder from a {state.kind!r} checkpoint")
    prefix = "encoder."
    entries = []
    tensors = {}
    for e in state.descriptor["entries"]:
        if not e["name"].startswith(prefix):
            continue
        short = e["name"][len(prefix):]
        entries.append({**e, "name": short})
        tensors[short] = state.tensors[e["name"]]
    descriptor = {
        "format_version": FORMAT_VERSION,
        "kind": "encoder",
        "arch": {"in_channels": state.arch["in_channels"],
                 "channels": state.arch["encoder_channels"]},
        "entries": entries,
        "provenance": state.provenance,
    }
    return ModelState(descriptor, tensors)


def params_digest(module: torch.nn.Module, names: list[str] | None = None) -> str:
    """SHA-256 over selected parameter bytes, in sorted name order."""
    params = dict(module.named_parameters())
    names = sorted(params) if names is None else sorted(names)
    h = hashlib.sha256()
    for name in names:
        h.update(name.encode())
        h.update(np.ascontiguousarray(params[name].detach().cpu().numpy(), dtype="<f4").tobytes())
    return h.hexdigest()
