"""Command-line entry point.

Subcommands: gen-phantoms, preprocess, lbp-encode, pretrain, finetune,
evaluate, ablate, pipeline. Every command resolves its configuration from
defaults <- optional --config file <- flags, writes the resolved settings
into its output directory, and exits 0 on success, 2 on config errors,
3 on data errors, 4 on training failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import data_io, evaluation, phantom
from .config import (ConfigError, DEFAULTS, RunConfig, TrainingError,
                     config_fingerprint, resolve_config, write_resolved)
from .corruption import CorruptionSpec
from .data_io import DataError
from .finetune import FinetuneConfig, PatientBag, ScoreRecord, Split, TASKS, finetune
from .lbp import LbpSpec, encode_stack_to_unit
from .preprocess import WindowSpec, preprocess_volume
from .pretrain import PretrainConfig, pretrain
from .state import load_state, save_state

STAGES = ("gen", "prep", "pretrain", "finetune", "eval")

PIPELINE_DEFAULTS = dict(DEFAULTS)
PIPELINE_DEFAULTS["eval.tasks"] = "all"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="livertex", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override any config key")
        p.add_argument("--seed", type=int)
        p.add_argument("--deterministic", action="store_true", default=None)

    p = sub.add_parser("gen-phantoms", help="generate a labeled synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--patients", type=int, dest="phantom_patients")
    p.add_argument("--slices", type=int, dest="phantom_slices")
    p.add_argument("--dims", type=int, dest="phantom_dims")
    p.add_argument("--categories", type=int, dest="phantom_categories")
    common(p)

    p = sub.add_parser("preprocess", help="window, mask, filter and resize volumes")
    p.add_argument("--in", required=True, dest="in_dir")
    p.add_argument("--out", required=True)
    p.add_argument("--window-lo", type=float, dest="window_lo")
    p.add_argument("--window-hi", type=float, dest="window_hi")
    p.add_argument("--threshold", type=float)
    p.add_argument("--target", type=int)
    p.add_argument("--masked-mean", action="store_true", default=None, dest="masked_mean")
    common(p)

    p = sub.add_parser("lbp-encode", help="encode preprocessed slices as LBP textures")
    p.add_argument("--in", required=True, dest="in_dir")
    p.add_argument("--out", required=True)
    p.add_argument("--radius", type=int)
    p.add_argument("--neighbors", type=int)
    p.add_argument("--comparison", choices=("strict", "gte"))
    p.add_argument("--border", choices=("replicate", "zero"))
    common(p)

    p = sub.add_parser("pretrain", help="self-supervised restoration pretraining")
    p.add_argument("--data", required=True, help="preprocessed slice directory")
    p.add_argument("--out", required=True, help="generator checkpoint path")
    p.add_argument("--disc-out", dest="disc_out", help="optional discriminator checkpoint path")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--adv-weight", type=float, dest="adv_weight")
    p.add_argument("--no-adv", action="store_true", default=None, dest="no_adv")
    p.add_argument("--patch", type=int)
    p.add_argument("--swaps", type=int)
    common(p)

    p = sub.add_parser("finetune", help="train one task classifier on a fixed split")
    p.add_argument("--data", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--task", choices=sorted(TASKS))
    p.add_argument("--init", help="pretraining checkpoint path, or 'random'")
    p.add_argument("--input", choices=("image", "lbp"), dest="input_mode")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch", type=int)
    p.add_argument("--wd", type=float)
    p.add_argument("--split", help="JSON file with train/val/test patient id lists")
    p.add_argument("--out", required=True)
    common(p)

    p = sub.add_parser("evaluate", help="repeated stratified cross-validation")
    p.add_argument("--data", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--tasks", help="comma list or 'all'")
    p.add_argument("--init", help="pretraining checkpoint path, or 'random'")
    p.add_argument("--input", choices=("image", "lbp"), dest="input_mode")
    p.add_argument("--k", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--out", required=True)
    common(p)

    p = sub.add_parser("ablate", help="run the pretraining/adversarial/input grid")
    p.add_argument("--data", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--ckpt-adv", dest="ckpt_adv", help="checkpoint pretrained with adversarial loss")
    p.add_argument("--ckpt-noadv", dest="ckpt_noadv", help="checkpoint pretrained without it")
    p.add_argument("--tasks", help="comma list or 'all'")
    p.add_argument("--k", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--out", required=True)
    common(p)

    p = sub.add_parser("pipeline", help="run stages in dependency order")
    p.add_argument("--stages", required=True, help=f"comma list from {','.join(STAGES)}")
    p.add_argument("--out", required=True)
    common(p)

    return parser


_FLAG_KEYS = {
    "gen-phantoms": {"phantom_patients": "phantom.patients", "phantom_slices": "phantom.slices",
                     "phantom_dims": "phantom.dims", "phantom_categories": "phantom.categories"},
    "preprocess": {"window_lo": "preprocess.window_lo", "window_hi": "preprocess.window_hi",
                   "threshold": "preprocess.threshold", "target": "preprocess.target",
                   "masked_mean": "preprocess.masked_mean"},
    "lbp-encode": {"radius": "lbp.radius", "neighbors": "lbp.neighbors",
                   "comparison": "lbp.comparison", "border": "lbp.border"},
    "pretrain": {"epochs": "pretrain.epochs", "batch": "pretrain.batch", "lr": "pretrain.lr",
                 "adv_weight": "pretrain.adv_weight", "patch": "pretrain.patch",
                 "swaps": "pretrain.swaps"},
    "finetune": {"task": "finetune.task", "input_mode": "finetune.input",
                 "epochs": "finetune.epochs", "lr": "finetune.lr",
                 "batch": "finetune.batch_patients", "wd": "finetune.weight_decay"},
    "evaluate": {"input_mode": "finetune.input", "k": "eval.k", "repeats": "eval.repeats"},
    "ablate": {"k": "eval.k", "repeats": "eval.repeats"},
    "pipeline": {},
}


def _resolve(args, defaults=None) -> RunConfig:
    flags = {}
    for dest, key in _FLAG_KEYS[args.command].items():
        value = getattr(args, dest, None)
        if value is not None:
            flags[key] = value
    if getattr(args, "no_adv", None):
        flags["pretrain.adversarial"] = False
    if args.seed is not None:
        flags["seed"] = args.seed
    if args.deterministic:
        flags["deterministic"] = True
    for item in args.set:
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        flags[key.strip()] = value.strip()
    return resolve_config(defaults, args.config, flags)


# --- shared data loading -----------------------------------------------------

def _load_bags(prep_dir: str) -> list[PatientBag]:
    stacks = data_io.read_all_slices(prep_dir)
    bags = [PatientBag(pid, stack) for pid, stack in stacks.items() if stack.shape[0] > 0]
    if not bags:
        raise DataError(f"no patients with slices under {prep_dir}")
    return bags


def _load_records(labels_path: str) -> dict[str, ScoreRecord]:
    raw = data_io.read_labels(labels_path)
    return {pid: ScoreRecord(pid, row["fibrosis"], int(row["steatosis"]),
                             int(row["lobular"]), int(row["ballooning"]))
            for pid, row in raw.items()}


def _task_list(arg: str | None) -> list:
    if arg in (None, "", "all"):
        return [TASKS[name] for name in ("fibrosis", "steatosis", "lobular", "ballooning")]
    names = [t.strip() for t in arg.split(",") if t.strip()]
    for name in names:
        if name not in TASKS:
            raise ConfigError(f"unknown task {name!r}; choose from {sorted(TASKS)}")
    return [TASKS[name] for name in names]


def _phantom_spec(cfg: RunConfig) -> phantom.PhantomSpec:
    n_cat = int(cfg["phantom.categories"])
    scale_table = {1: (3.0,), 2: (1.5, 6.0), 3: (1.5, 3.0, 6.0)}
    amp_table = {1: (1.5,), 2: (0.5, 3.0), 3: (0.5, 1.5, 3.0)}
    if n_cat not in scale_table:
        raise ConfigError(f"phantom.categories must be 1..3, got {n_cat}")
    return phantom.PhantomSpec(
        n_patients=int(cfg["phantom.patients"]),
        slices_per_patient=int(cfg["phantom.slices"]),
        dims=int(cfg["phantom.dims"]),
        texture_scales=scale_table[n_cat],
        nodularity_amplitudes=amp_table[n_cat],
        seed=cfg.seed)


def _pretrain_config(cfg: RunConfig) -> PretrainConfig:
    return PretrainConfig(
        epochs=int(cfg["pretrain.epochs"]),
        batch_size=int(cfg["pretrain.batch"]),
        lr=float(cfg["pretrain.lr"]),
        adv_weight=float(cfg["pretrain.adv_weight"]),
        adversarial_enabled=bool(cfg["pretrain.adversarial"]),
        corruption=CorruptionSpec(patch_size=int(cfg["pretrain.patch"]),
                                  iterations=int(cfg["pretrain.swaps"]),
                                  rng_seed=cfg.seed),
        seed=cfg.seed)


def _finetune_config(cfg: RunConfig) -> FinetuneConfig:
    return FinetuneConfig(
        epochs=int(cfg["finetune.epochs"]),
        lr=float(cfg["finetune.lr"]),
        batch_patients=int(cfg["finetune.batch_patients"]),
        weight_decay=float(cfg["finetune.weight_decay"]),
        input_mode=str(cfg["finetune.input"]),
        init_mode=str(cfg["finetune.init"]),
        lbp=_lbp_spec(cfg),
        seed=cfg.seed)


def _lbp_spec(cfg: RunConfig) -> LbpSpec:
    return LbpSpec(radius=int(cfg["lbp.radius"]), neighbors=int(cfg["lbp.neighbors"]),
                   border_policy=str(cfg["lbp.border"]), comparison=str(cfg["lbp.comparison"]),
                   levels=int(cfg["lbp.levels"]))


# --- commands ------------------------------------------------------------------

def cmd_gen_phantoms(args) -> int:
    cfg = _resolve(args)
    write_resolved(cfg, args.out)
    volumes, rows = phantom.write_phantom_dataset(_phantom_spec(cfg), args.out)
    print(f"wrote {len(volumes)} phantom patients to {args.out}")
    return 0


def cmd_preprocess(args) -> int:
    cfg = _resolve(args)
    write_resolved(cfg, args.out)
    spec = WindowSpec(float(cfg["preprocess.window_lo"]), float(cfg["preprocess.window_hi"]))
    n_kept = 0
    for pdir in data_io.list_patient_dirs(args.in_dir):
        vol = data_io.read_volume(pdir)
        slices = preprocess_volume(
            vol, spec,
            threshold=float(cfg["preprocess.threshold"]),
            target=int(cfg["preprocess.target"]),
            value_scale=float(cfg["preprocess.value_scale"]),
            mean_over_masked_only=bool(cfg["preprocess.masked_mean"]))
        if not slices:
            print(f"warning: patient {vol.patient_id} has no retained slices, skipped")
            continue
        data_io.write_slices(args.out, vol.patient_id, slices)
        n_kept += len(slices)
    print(f"wrote {n_kept} slices to {args.out}")
    return 0


def cmd_lbp_encode(args) -> int:
    cfg = _resolve(args)
    write_resolved(cfg, args.out)
    spec = _lbp_spec(cfg)
    for pid, stack in data_io.read_all_slices(args.in_dir).items():
        encoded = encode_stack_to_unit(stack, spec)
        data_io.write_slices(args.out, pid, list(encoded))
    print(f"encoded LBP textures into {args.out}")
    return 0


def cmd_pretrain(args) -> int:
    cfg = _resolve(args)
    out_dir = os.path.dirname(args.out) or "."
    write_resolved(cfg, out_dir)
    stacks = data_io.read_all_slices(args.data)
    corpus = np.concatenate([s for s in stacks.values() if s.shape[0] > 0])
    try:
        gen_state, disc_state, history = pretrain(
            corpus, _pretrain_config(cfg), deterministic=bool(cfg["deterministic"]),
            log_every=max(1, int(cfg["pretrain.epochs"]) // 10))
    except (RuntimeError, FloatingPointError) as exc:
        raise TrainingError(f"pretraining failed: {exc}") from exc
    save_state(gen_state, args.out)
    history.write_csv(os.path.join(out_dir, "history.csv"))
    if disc_state is not None and args.disc_out:
        save_state(disc_state, args.disc_out)
    print(f"saved checkpoint {args.out} (final rmse {history.rmse[-1]:.5f})")
    return 0


def _load_split(path: str) -> Split:
    if not os.path.exists(path):
        raise DataError(f"missing split file: {path}")
    with open(path) as f:
        data = json.load(f)
    return Split(train=list(data["train"]), val=list(data["val"]), test=list(data["test"]))


def cmd_finetune(args) -> int:
    cfg = _resolve(args)
    write_resolved(cfg, args.out)
    bags = _load_bags(args.data)
    records = _load_records(args.labels)
    task = TASKS[str(cfg["finetune.task"])]
    ft_config, encoder_ckpt = _init_mode(args, cfg)
    if args.split:
        split = _load_split(args.split)
    else:
        plan = evaluation.make_folds([b.patient_id for b in bags], records, task,
                                     k=3, repeats=1, seed=cfg.seed)
        split = plan.splits[0][0]
    try:
        model_state, history, test_probs = finetune(
            bags, records, task, ft_config, split, encoder_ckpt=encoder_ckpt,
            deterministic=bool(cfg["deterministic"]))
    except RuntimeError as exc:
        raise TrainingError(f"fine-tuning failed: {exc}") from exc
    save_state(model_state, os.path.join(args.out, "model.ckpt"))
    with open(os.path.join(args.out, "metrics.json"), "w") as f:
        json.dump({"epochs": history, "split": vars(split)}, f, indent=1)
    with open(os.path.join(args.out, "test_probs.json"), "w") as f:
        json.dump({pid: probs.tolist() for pid, probs in test_probs.items()}, f, indent=1)
    best = max(h["val_auc"] for h in history)
    print(f"finetuned {task.task}: best val AUC {100 * best:.2f}")
    return 0


def _init_mode(args, cfg) -> tuple[FinetuneConfig, object]:
    ft_config = _finetune_config(cfg)
    init = getattr(args, "init", None)
    if init == "random":
        return replace(ft_config, init_mode="random"), None
    if init:
        if not os.path.exists(init):
            raise DataError(f"missing checkpoint: {init}")
        return replace(ft_config, init_mode="ssl_checkpoint"), load_state(init)
    if ft_config.init_mode == "random":
        return ft_config, None
    raise DataError("init_mode=ssl_checkpoint requires --init <checkpoint path>")


def cmd_evaluate(args) -> int:
    cfg = _resolve(args)
    write_resolved(cfg, args.out)
    bags = _load_bags(args.data)
    records = _load_records(args.labels)
    ft_config, encoder_ckpt = _init_mode(args, cfg)
    reports = []
    for task in _task_list(args.tasks):
        plan = evaluation.make_folds([b.patient_id for b in bags], records, task,
                                     k=int(cfg["eval.k"]), repeats=int(cfg["eval.repeats"]),
                                     seed=cfg.seed)
        fp = config_fingerprint({**cfg.settings, "task": task.task})
        try:
            reports.append(evaluation.run_cv(
                bags, records, task, plan, ft_config, encoder_ckpt=encoder_ckpt,
                deterministic=bool(cfg["deterministic"]), config_fingerprint=fp))
        except RuntimeError as exc:
            raise TrainingError(str(exc)) from exc
    evaluation.write_report_json(reports, os.path.join(args.out, "report.json"))
    evaluation.write_report_csv(reports, os.path.join(args.out, "report.csv"))
    for r in reports:
        print(f"{r.task}: AUC {r.mean_auc:.2f} +- {r.std_auc:.2f}")
    return 0


def cmd_ablate(args) -> int:
    cfg = _resolve(args)
    write_resolved(cfg, args.out)
    bags = _load_bags(args.data)
    records = _load_records(args.labels)
    tasks = _task_list(args.tasks)
    plans = {task.task: evaluation.make_folds([b.patient_id for b in bags], records, task,
                                              k=int(cfg["eval.k"]),
                                              repeats=int(cfg["eval.repeats"]),
                                              seed=cfg.seed)
             for task in tasks}
    ft_config = _finetune_config(cfg)
    try:
        results = evaluation.run_ablation_grid(
            bags, records, tasks, plans, ft_config,
            ckpt_adv=args.ckpt_adv, ckpt_noadv=args.ckpt_noadv,
            deterministic=bool(cfg["deterministic"]),
            fingerprint_fn=config_fingerprint)
    except RuntimeError as exc:
        raise TrainingError(str(exc)) from exc
    evaluation.write_ablation_csv(results, os.path.join(args.out, "ablation.csv"))
    with open(os.path.join(args.out, "ablation.json"), "w") as f:
        json.dump([{k: (evaluation.report_to_dict(v) if k == "report" else v)
                    for k, v in cell.items()} for cell in results], f, indent=1)
    print(f"wrote ablation grid ({len(results)} cells) to {args.out}")
    return 0


# --- pipeline -----------------------------------------------------------------

def run_pipeline(stages: list[str], cfg: RunConfig, out_dir: str) -> int:
    """Execute the requested stages in dependency order."""
    for stage in stages:
        if stage not in STAGES:
            raise ConfigError(f"unknown stage {stage!r}; choose from {','.join(STAGES)}")
    ordered = [s for s in STAGES if s in stages]
    if not ordered:
        return 0
    os.makedirs(out_dir, exist_ok=True)
    write_resolved(cfg, out_dir)
    for stage in ordered:
        _STAGE_FUNCS[stage](cfg, out_dir)
    return 0


def _paths(out_dir):
    return {
        "data": os.path.join(out_dir, "data"),
        "labels": os.path.join(out_dir, "data", "labels.csv"),
        "prep": os.path.join(out_dir, "prep"),
        "ckpt": os.path.join(out_dir, "ckpt", "pretrain.ckpt"),
        "history": os.path.join(out_dir, "ckpt", "history.csv"),
        "finetune": os.path.join(out_dir, "finetune"),
        "eval": os.path.join(out_dir, "eval"),
    }


def _stage_gen(cfg, out_dir):
    phantom.write_phantom_dataset(_phantom_spec(cfg), _paths(out_dir)["data"])


def _stage_prep(cfg, out_dir):
    paths = _paths(out_dir)
    if not os.path.isdir(paths["data"]):
        raise DataError(f"missing upstream artifact: {paths['data']} (run the gen stage)")
    spec = WindowSpec(float(cfg["preprocess.window_lo"]), float(cfg["preprocess.window_hi"]))
    for pdir in data_io.list_patient_dirs(paths["data"]):
        vol = data_io.read_volume(pdir)
        slices = preprocess_volume(
            vol, spec, threshold=float(cfg["preprocess.threshold"]),
            target=int(cfg["preprocess.target"]),
            value_scale=float(cfg["preprocess.value_scale"]),
            mean_over_masked_only=bool(cfg["preprocess.masked_mean"]))
        if slices:
            data_io.write_slices(paths["prep"], vol.patient_id, slices)


def _stage_pretrain(cfg, out_dir):
    paths = _paths(out_dir)
    if not os.path.isdir(paths["prep"]):
        raise DataError(f"missing upstream artifact: {paths['prep']} (run the prep stage)")
    corpus = np.concatenate(list(data_io.read_all_slices(paths["prep"]).values()))
    try:
        gen_state, _, history = pretrain(corpus, _pretrain_config(cfg),
                                         deterministic=bool(cfg["deterministic"]))
    except RuntimeError as exc:
        raise TrainingError(f"pretraining failed: {exc}") from exc
    save_state(gen_state, paths["ckpt"])
    history.write_csv(paths["history"])


def _finetune_inputs(cfg, out_dir):
    paths = _paths(out_dir)
    if not os.path.isdir(paths["prep"]):
        raise DataError(f"missing upstream artifact: {paths['prep']} (run the prep stage)")
    if not os.path.exists(paths["labels"]):
        raise DataError(f"missing upstream artifact: {paths['labels']} (run the gen stage)")
    bags = _load_bags(paths["prep"])
    records = _load_records(paths["labels"])
    ft_config = _finetune_config(cfg)
    encoder_ckpt = None
    if ft_config.init_mode == "ssl_checkpoint":
        if not os.path.exists(paths["ckpt"]):
            raise DataError(
                f"missing upstream artifact: {paths['ckpt']} (run the pretrain stage)")
        encoder_ckpt = load_state(paths["ckpt"])
    return paths, bags, records, ft_config, encoder_ckpt


def _stage_finetune(cfg, out_dir):
    paths, bags, records, ft_config, encoder_ckpt = _finetune_inputs(cfg, out_dir)
    task = TASKS[str(cfg["finetune.task"])]
    plan = evaluation.make_folds([b.patient_id for b in bags], records, task,
                                 k=3, repeats=1, seed=cfg.seed)
    split = plan.splits[0][0]
    try:
        model_state, history, _ = finetune(bags, records, task, ft_config, split,
                                           encoder_ckpt=encoder_ckpt,
                                           deterministic=bool(cfg["deterministic"]))
    except RuntimeError as exc:
        raise TrainingError(f"fine-tuning failed: {exc}") from exc
    tdir = os.path.join(paths["finetune"], task.task)
    save_state(model_state, os.path.join(tdir, "model.ckpt"))
    with open(os.path.join(tdir, "metrics.json"), "w") as f:
        json.dump({"epochs": history, "split": vars(split)}, f, indent=1)


def _stage_eval(cfg, out_dir):
    paths, bags, records, ft_config, encoder_ckpt = _finetune_inputs(cfg, out_dir)
    tasks = _task_list(str(cfg.settings.get("eval.tasks", "all")))
    reports = []
    for task in tasks:
        plan = evaluation.make_folds([b.patient_id for b in bags], records, task,
                                     k=int(cfg["eval.k"]), repeats=int(cfg["eval.repeats"]),
                                     seed=cfg.seed)
        fp = config_fingerprint({**cfg.settings, "task": task.task})
        try:
            reports.append(evaluation.run_cv(
                bags, records, task, plan, ft_config, encoder_ckpt=encoder_ckpt,
                deterministic=bool(cfg["deterministic"]), config_fingerprint=fp))
        except RuntimeError as exc:
            raise TrainingError(str(exc)) from exc
    os.makedirs(paths["eval"], exist_ok=True)
    evaluation.write_report_json(reports, os.path.join(paths["eval"], "report.json"))
    evaluation.write_report_csv(reports, os.path.join(paths["eval"], "report.csv"))


_STAGE_FUNCS = {"gen": _stage_gen, "prep": _stage_prep, "pretrain": _stage_pretrain,
                "finetune": _stage_finetune, "eval": _stage_eval}


def cmd_pipeline(args) -> int:
    cfg = _resolve(args, PIPELINE_DEFAULTS)
    stages = [s.strip() for s in args.stages.split(",") if s.strip()]
    return run_pipeline(stages, cfg, args.out)


_COMMANDS = {
    "gen-phantoms": cmd_gen_phantoms,
    "preprocess": cmd_preprocess,
    "lbp-encode": cmd_lbp_encode,
    "pretrain": cmd_pretrain,
    "finetune": cmd_finetune,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
    "pipeline": cmd_pipeline,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DataError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except TrainingError as exc:
        print(f"training error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
