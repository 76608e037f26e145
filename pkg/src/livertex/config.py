"""Layered run configuration: defaults <- config file <- command-line flags.

Config files are plain text `key = value` lines ('#' comments allowed) with
one nesting level via dotted keys. Every run writes its fully resolved
settings next to its outputs, and the fingerprint hashes the canonical
sorted form, so key order never matters.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass


class ConfigError(Exception):
    """Bad key, value, or config file (CLI exit code 2)."""


class TrainingError(Exception):
    """Training-stage failure (CLI exit code 4)."""


DEFAULTS = {
    "seed": 0,
    "deterministic": False,
    "preprocess.window_lo": -200.0,
    "preprocess.window_hi": 250.0,
    "preprocess.threshold": 5.0,
    "preprocess.value_scale": 255.0,
    "preprocess.target": 224,
    "preprocess.masked_mean": False,
    "lbp.radius": 1,
    "lbp.neighbors": 8,
    "lbp.comparison": "strict",
    "lbp.border": "replicate",
    "lbp.levels": 256,
    "pretrain.epochs": 700,
    "pretrain.batch": 30,
    "pretrain.lr": 2e-4,
    "pretrain.adv_weight": 0.01,
    "pretrain.adversarial": True,
    "pretrain.patch": 20,
    "pretrain.swaps": 10,
    "finetune.epochs": 30,
    "finetune.lr": 1e-4,
    "finetune.batch_patients": 4,
    "finetune.weight_decay": 0.01,
    "finetune.input": "lbp",
    "finetune.init": "ssl_checkpoint",
    "finetune.task": "fibrosis",
    "eval.k": 3,
    "eval.repeats": 5,
    "phantom.patients": 30,
    "phantom.slices": 20,
    "phantom.dims": 64,
    "phantom.categories": 2,
}


@dataclass
class RunConfig:
    settings: dict
    fingerprint: str

    def __getitem__(self, key):
        return self.settings[key]

    @property
    def seed(self) -> int:
        return int(self.settings["seed"])


def config_fingerprint(settings: dict) -> str:
    canon = json.dumps(settings, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _coerce(key: str, value, expected):
    if isinstance(expected, bool):
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "1", "yes", "on"):
            return True
        if isinstance(value, str) and value.lower() in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"key {key!r} expects a boolean, got {value!r}")
    if isinstance(expected, int):
        try:
            if isinstance(value, float) and value != int(value):
                raise ValueError
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"key {key!r} expects an integer, got {value!r}") from None
    if isinstance(expected, float):
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"key {key!r} expects a number, got {value!r}") from None
    return str(value)


def parse_config_file(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    out = {}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def resolve_config(defaults: dict | None = None, file_path: str | None = None,
                   flags: dict | None = None) -> RunConfig:
    """Merge the three layers; flags win over the file, the file over defaults."""
    defaults = DEFAULTS if defaults is None else defaults
    settings = dict(defaults)
    for layer in (parse_config_file(file_path) if file_path else {}, flags or {}):
        for key, value in layer.items():
            if key not in defaults:
                raise ConfigError(f"unknown config key {key!r}")
            settings[key] = _coerce(key, value, defaults[key])
    return RunConfig(settings=settings, fingerprint=config_fingerprint(settings))


def write_resolved(config: RunConfig, out_dir: str) -> str:
    """Persist the resolved settings next to the run's outputs."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "resolved_config.txt")
    with open(path, "w") as f:
        f.write(f"# fingerprint: {config.fingerprint}\n")
        for key in sorted(config.settings):
            f.write(f"{key} = {config.settings[key]}\n")
    return path
