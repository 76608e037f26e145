"""Patient-level score classification by fine-tuning the pretrained encoder.

Raw fibrosis/NAS scores are first merged into the coarser category scheme
used for training (category_map below). One model is trained per task with
cross-entropy over patient logits; the first encoder stage stays frozen so
only its last two conv layers adapt. The best of the trained epochs is
picked by validation AUC and scored on the held-out test patients.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np
import torch

from . import nets
from .lbp import LbpSpec, encode_stack_to_unit
from .metrics import auc_multiclass
from .pretrain import determinism_scope
from .corruption import derive_seed
from .state import ModelState, encoder_state_from, load_into_module, state_from_module

INPUT_MODES = ("image", "lbp")
INIT_MODES = ("ssl_checkpoint", "random")

FIBROSIS_RAW = (0.0, 1.0, 2.0, 3.0, 3.5, 4.0)


@dataclass(frozen=True)
class ScoreRecord:
    patient_id: str
    fibrosis_raw: float
    steatosis_raw: int
    lobular_raw: int
    ballooning_raw: int

    def __post_init__(self):
        if float(self.fibrosis_raw) not in FIBROSIS_RAW:
            raise ValueError(f"fibrosis score must be one of {FIBROSIS_RAW}, "
                             f"got {self.fibrosis_raw}")
        for name, val, hi in (("steatosis", self.steatosis_raw, 3),
                              ("lobular", self.lobular_raw, 3),
                              ("ballooning", self.ballooning_raw, 2)):
            if int(val) != val or not 0 <= int(val) <= hi:
                raise ValueError(f"{name} score must be an integer in 0..{hi}, got {val}")

    def raw(self, task: str) -> float:
        return {"fibrosis": self.fibrosis_raw, "steatosis": self.steatosis_raw,
                "lobular": self.lobular_raw, "ballooning": self.ballooning_raw}[task]


@dataclass(frozen=True)
class TaskSpec:
    task: str
    category_map: dict
    num_categories: int


TASKS = {
    "fibrosis": TaskSpec("fibrosis",
                         {0.0: 0, 1.0: 1, 2.0: 1, 3.0: 2, 3.5: 2, 4.0: 2}, 3),
    "steatosis": TaskSpec("steatosis", {0: 0, 1: 0, 2: 1, 3: 1}, 2),
    "lobular": TaskSpec("lobular", {0: 0, 1: 1, 2: 2, 3: 2}, 3),
    "ballooning": TaskSpec("ballooning", {0: 0, 1: 1, 2: 2}, 3),
}


def combine_score(record: ScoreRecord, task: TaskSpec) -> int:
    """Merge a raw score into its training category."""
    raw = record.raw(task.task)
    key = float(raw) if task.task == "fibrosis" else int(raw)
    if key not in task.category_map:
        raise ValueError(f"{task.task} score {raw} out of range")
    return task.category_map[key]


@dataclass
class PatientBag:
    """All preprocessed slices for one patient (S x H x W in [0, 1])."""

    patient_id: str
    slices: np.ndarray

    def __post_init__(self):
        self.slices = np.asarray(self.slices, dtype=np.float32)
        if self.slices.ndim != 3 or self.slices.shape[0] < 1:
            raise ValueError(f"patient {self.patient_id} needs at least one 2D slice")


@dataclass
class Split:
    train: list[str]
    val: list[str]
    test: list[str]

    def __post_init__(self):
        groups = [set(self.train), set(self.val), set(self.test)]
        for i in range(3):
            for j in range(i + 1, 3):
                overlap = groups[i] & groups[j]
                if overlap:
                    raise ValueError(f"split groups overlap on patients {sorted(overlap)}")


@dataclass
class FinetuneConfig:
    epochs: int = 30
    lr: float = 1e-4
    batch_patients: int = 4
    weight_decay: float = 0.01
    input_mode: str = "image"
    init_mode: str = "ssl_checkpoint"
    lbp: LbpSpec = field(default_factory=LbpSpec)
    seed: int = 0

    def __post_init__(self):
        if self.batch_patients < 1:
            raise ValueError("batch_patients must be >= 1")
        if self.input_mode not in INPUT_MODES:
            raise ValueError(f"input_mode must be one of {INPUT_MODES}")
        if self.init_mode not in INIT_MODES:
            raise ValueError(f"init_mode must be one of {INIT_MODES}")


def build_classifier(encoder_ckpt: ModelState | None, num_categories: int,
                     config: FinetuneConfig) -> nets.SliceClassifier:
    """Assemble encoder + head with the freeze policy applied.

    With init_mode=ssl_checkpoint the encoder weights come from the
    checkpoint; random init covers the no-pretraining ablations. The first
    conv stage is frozen either way; stages 2-3 and the head train.
    """
    encoder = nets.Encoder()
    if config.init_mode == "ssl_checkpoint":
        if encoder_ckpt is None:
            raise ValueError("init_mode=ssl_checkpoint requires an encoder checkpoint")
        load_into_module(encoder_state_from(encoder_ckpt), encoder)
    head = nets.ClassifierHead(num_categories)
    model = nets.SliceClassifier(encoder, head)
    for p in model.encoder.stages[0].parameters():
        p.requires_grad_(False)
    return model


def frozen_param_names(model: nets.SliceClassifier) -> list[str]:
    return [n for n, p in model.named_parameters() if not p.requires_grad]


def prepare_inputs(bag: PatientBag, config: FinetuneConfig) -> torch.Tensor:
    """Normalized S x 1 x H x W tensor for one patient, per input_mode."""
    if config.input_mode == "lbp":
        stack = encode_stack_to_unit(bag.slices, config.lbp)
    else:
        stack = bag.slices
    t = torch.from_numpy(np.ascontiguousarray(stack, dtype=np.float32)).unsqueeze(1)
    return nets.normalize_input(t)


def _probabilities(model, inputs, ids):
    model.eval()
    out = {}
    with torch.no_grad():
        for pid in ids:
            logits = model.patient_logits(inputs[pid])
            out[pid] = torch.softmax(logits, dim=0).numpy().astype(np.float64)
    model.train()
    return out


def _split_auc(probs_by_id, categories, ids):
    p = np.stack([probs_by_id[pid] for pid in ids])
    y = np.array([categories[pid] for pid in ids])
    return auc_multiclass(p, y)


def finetune(bags: list[PatientBag], records: dict[str, ScoreRecord], task: TaskSpec,
             config: FinetuneConfig, split: Split,
             encoder_ckpt: ModelState | None = None, deterministic: bool = False):
    """Train one task classifier on the train split, select by val AUC.

    Returns (ModelState of the best epoch, per-epoch metrics, test
    probabilities keyed by patient id).
    """
    by_id = {b.patient_id: b for b in bags}
    for ids in (split.train, split.val, split.test):
        for pid in ids:
            if pid not in by_id:
                raise ValueError(f"split names unknown patient {pid}")
            if pid not in records:
                raise ValueError(f"no score record for patient {pid}")
    if not split.train or not split.val or not split.test:
        raise ValueError("train, val, and test splits must all be non-empty")

    categories = {pid: combine_score(records[pid], task)
                  for pid in split.train + split.val + split.test}

    with determinism_scope(deterministic):
        torch.manual_seed(config.seed)
        model = build_classifier(encoder_ckpt, task.num_categories, config)
        inputs = {pid: prepare_inputs(by_id[pid], config)
                  for pid in split.train + split.val + split.test}
        trainable = [p for p in model.parameters() if p.requires_grad]
        opt = torch.optim.Adam(trainable, lr=config.lr, weight_decay=config.weight_decay)

        history = []
        best = None  # (val_auc, epoch, state_dict copy)
        for epoch in range(config.epochs):
            order = np.random.default_rng(derive_seed(config.seed, (1 << 47) | epoch)) \
                .permutation(len(split.train))
            total, seen = 0.0, 0
            for start in range(0, len(order), config.batch_patients):
                idx = order[start:start + config.batch_patients]
                pids = [split.train[i] for i in idx]
                opt.zero_grad()
                logits = torch.stack([model.patient_logits(inputs[pid]) for pid in pids])
                target = torch.tensor([categories[pid] for pid in pids])
                loss = torch.nn.functional.cross_entropy(logits, target)
                loss.backward()
                opt.step()
                total += loss.item() * len(pids)
                seen += len(pids)
            val_probs = _probabilities(model, inputs, split.val)
            val_auc = _split_auc(val_probs, categories, split.val)
            history.append({"epoch": epoch, "train_loss": total / seen, "val_auc": val_auc})
            if best is None or val_auc > best[0]:
                best = (val_auc, epoch, copy.deepcopy(model.state_dict()))

        model.load_state_dict(best[2])
        test_probs = _probabilities(model, inputs, split.test)

    model_state = state_from_module(
        model, "classifier",
        {"in_channels": 1, "encoder_channels": list(model.encoder.channels),
         "head_hidden": list(model.head.hidden), "num_categories": task.num_categories},
        {"seed": config.seed, "task": task.task, "best_epoch": best[1],
         "best_val_auc": best[0], "input_mode": config.input_mode,
         "init_mode": config.init_mode})
    return model_state, history, test_probs
