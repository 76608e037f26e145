"""Repeated stratified cross-validation and the ablation grid.

Patients are dealt into k stratified test folds per repeat; two training
patients of differing category are held out per fold for epoch selection.
Reported AUC is the mean over repeats of per-repeat fold means, with the
population std over the repeat means, both in percent.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .corruption import derive_seed
from .finetune import (FinetuneConfig, PatientBag, ScoreRecord, Split, TaskSpec,
                       combine_score, finetune)
from .metrics import auc_binary, auc_multiclass  # noqa: F401  (re-exported metric surface)
from .state import ModelState, load_state


@dataclass
class FoldPlan:
    k: int
    repeats: int
    seed: int
    task: str
    splits: list  # [repeat][fold] -> Split


@dataclass
class MetricsReport:
    task: str
    mean_auc: float  # percent
    std_auc: float   # percent, population std over repeat means
    fold_aucs: list  # [repeat][fold] raw AUC fractions
    config_fingerprint: str
    metadata: dict = field(default_factory=dict)


def make_folds(patient_ids: list[str], records: dict[str, ScoreRecord], task: TaskSpec,
               k: int = 3, repeats: int = 5, seed: int = 0,
               val_per_fold: int = 2) -> FoldPlan:
    """Stratified k-fold plan with per-fold validation carve-outs.

    Every patient lands in exactly one test fold per repeat. Validation
    patients (val_per_fold, drawn from the fold's training pool) always
    cover at least two categories so epoch selection AUC is defined.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2 (k={k} leaves no held-out fold)")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if val_per_fold < 2:
        raise ValueError("val_per_fold must be >= 2")
    ids = sorted(patient_ids)
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate patient ids")
    categories = {pid: combine_score(records[pid], task) for pid in ids}
    by_cat = {}
    for pid in ids:
        by_cat.setdefault(categories[pid], []).append(pid)
    for cat, members in sorted(by_cat.items()):
        if len(members) < k:
            raise ValueError(
                f"{task.task} category {cat} has {len(members)} patients, fewer than k={k}")

    splits = []
    for r in range(repeats):
        rng = np.random.default_rng(derive_seed(seed, r))
        folds = [[] for _ in range(k)]
        for ci, cat in enumerate(sorted(by_cat)):
            members = list(by_cat[cat])
            rng.shuffle(members)
            for m, pid in enumerate(members):
                folds[(ci + m) % k].append(pid)
        repeat_splits = []
        for f in range(k):
            test = sorted(folds[f])
            pool = [pid for g in range(k) if g != f for pid in folds[g]]
            pool.sort()
            rng.shuffle(pool)
            val = _carve_val(pool, categories, val_per_fold)
            train = [pid for pid in pool if pid not in set(val)]
            repeat_splits.append(Split(train=train, val=val, test=test))
        splits.append(repeat_splits)
    return FoldPlan(k=k, repeats=repeats, seed=seed, task=task.task, splits=splits)


def _carve_val(pool: list[str], categories: dict, val_per_fold: int) -> list[str]:
    first = pool[0]
    second = next((pid for pid in pool[1:] if categories[pid] != categories[first]), None)
    if second is None:
        raise ValueError("training pool has a single category; validation AUC undefined")
    val = [first, second]
    for pid in pool:
        if len(val) >= val_per_fold:
            break
        if pid not in val:
            val.append(pid)
    return val


def default_trainer(bags, records, task, config, split, encoder_ckpt, deterministic):
    """Fine-tune on one split and return test probabilities keyed by patient."""
    _, _, probs = finetune(bags, records, task, config, split,
                           encoder_ckpt=encoder_ckpt, deterministic=deterministic)
    return probs


def run_cv(bags: list[PatientBag], records: dict[str, ScoreRecord], task: TaskSpec,
           plan: FoldPlan, config: FinetuneConfig,
           encoder_ckpt: ModelState | None = None, trainer=None,
           deterministic: bool = False, config_fingerprint: str = "") -> MetricsReport:
    """Run every (repeat, fold) cell and aggregate AUC mean/std in percent."""
    if trainer is None:
        trainer = default_trainer
    fold_aucs = []
    for r, repeat_splits in enumerate(plan.splits):
        row = []
        for f, split in enumerate(repeat_splits):
            cell_config = replace(config, seed=derive_seed(config.seed, r * plan.k + f))
            try:
                probs = trainer(bags, records, task, cell_config, split,
                                encoder_ckpt, deterministic)
            except Exception as exc:
                raise RuntimeError(
                    f"fold failure at repeat {r} fold {f} of task {task.task}: {exc}") from exc
            categories = {pid: combine_score(records[pid], task) for pid in split.test}
            p = np.stack([probs[pid] for pid in split.test])
            y = np.array([categories[pid] for pid in split.test])
            row.append(auc_multiclass(p, y))
        fold_aucs.append(row)
    repeat_means = [float(np.mean(row)) for row in fold_aucs]
    return MetricsReport(
        task=task.task,
        mean_auc=100.0 * float(np.mean(repeat_means)),
        std_auc=100.0 * float(np.std(repeat_means)),
        fold_aucs=fold_aucs,
        config_fingerprint=config_fingerprint,
        metadata={"k": plan.k, "repeats": plan.repeats, "plan_seed": plan.seed,
                  "reduction": "macro one-vs-rest over present categories",
                  "std": "population std over repeat-level mean AUCs"},
    )


# Table-style ablation rows: (ssl, adversarial pretraining, input mode).
GRID_ROWS = (
    (False, None, "image"),
    (False, None, "lbp"),
    (True, False, "image"),
    (True, False, "lbp"),
    (True, True, "image"),
    (True, True, "lbp"),
)


def run_ablation_grid(bags, records, tasks: list[TaskSpec], plans: dict,
                      config: FinetuneConfig, ckpt_adv=None, ckpt_noadv=None,
                      rows=GRID_ROWS, trainer=None, deterministic: bool = False,
                      fingerprint_fn=None):
    """One MetricsReport per grid row and task.

    ckpt_adv / ckpt_noadv may be ModelState objects or checkpoint paths;
    paths are only opened for rows that use pretraining, so no-pretraining
    rows never touch a checkpoint. A missing checkpoint marks its rows
    unavailable instead of aborting the grid.
    """
    results = []
    for ssl_on, adv, input_mode in rows:
        ckpt = None
        reason = None
        if ssl_on:
            source = ckpt_adv if adv else ckpt_noadv
            try:
                ckpt = _resolve_ckpt(source)
            except (FileNotFoundError, ValueError) as exc:
                reason = str(exc) or "checkpoint unavailable"
        for task in tasks:
            cell = {"ssl": ssl_on, "adv_loss": bool(adv) if ssl_on else False,
                    "input_mode": input_mode, "task": task.task}
            if ssl_on and ckpt is None:
                results.append({**cell, "available": False, "reason": reason})
                continue
            cell_config = replace(config, input_mode=input_mode,
                                  init_mode="ssl_checkpoint" if ssl_on else "random")
            fp = fingerprint_fn({**cell, "finetune": _config_dict(cell_config)}) \
                if fingerprint_fn else ""
            report = run_cv(bags, records, task, plans[task.task], cell_config,
                            encoder_ckpt=ckpt, trainer=trainer,
                            deterministic=deterministic, config_fingerprint=fp)
            results.append({**cell, "available": True, "report": report})
    return results


def _resolve_ckpt(source):
    if source is None:
        raise ValueError("no checkpoint configured for a pretraining-enabled row")
    if isinstance(source, ModelState):
        return source
    if not os.path.exists(source):
        raise FileNotFoundError(f"missing checkpoint: {source}")
    return load_state(source)


def _config_dict(config: FinetuneConfig) -> dict:
    return {"epochs": config.epochs, "lr": config.lr,
            "batch_patients": config.batch_patients,
            "weight_decay": config.weight_decay, "input_mode": config.input_mode,
            "init_mode": config.init_mode, "seed": config.seed}


def report_to_dict(report: MetricsReport) -> dict:
    return {"task": report.task, "mean_auc": report.mean_auc, "std_auc": report.std_auc,
            "fold_aucs": report.fold_aucs, "config_fingerprint": report.config_fingerprint,
            "metadata": report.metadata}


def write_report_json(reports: list[MetricsReport], path: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as f:
        json.dump({"reports": [report_to_dict(r) for r in reports]}, f, indent=1, sort_keys=True)
        f.write("\n")


def write_report_csv(reports: list[MetricsReport], path: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["task", "mean_auc", "std_auc"])
        for r in reports:
            w.writerow([r.task, f"{r.mean_auc:.2f}", f"{r.std_auc:.2f}"])


def write_ablation_csv(results: list[dict], path: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["ssl", "adv_loss", "input_mode", "task", "mean_auc", "std_auc"])
        for cell in results:
            if cell.get("available"):
                rep = cell["report"]
                w.writerow([int(cell["ssl"]), int(cell["adv_loss"]), cell["input_mode"],
                            cell["task"], f"{rep.mean_auc:.2f}", f"{rep.std_auc:.2f}"])
            else:
                w.writerow([int(cell["ssl"]), int(bool(cell["adv_loss"])), cell["input_mode"],
                            cell["task"], "NA", "NA"])
