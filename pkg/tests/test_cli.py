import json
import os

import numpy as np
import pytest

from livertex import data_io
from livertex.cli import main, run_pipeline
from livertex.config import resolve_config

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def phantom_dir(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("cli") / "data")
    code = main(["gen-phantoms", "--out", out, "--patients", "8", "--slices", "3",
                 "--dims", "64", "--categories", "2", "--seed", "3"])
    assert code == 0
    return out


@pytest.fixture(scope="module")
def prep_dir(phantom_dir, tmp_path_factory):
    out = str(tmp_path_factory.mktemp("cli") / "prep")
    code = main(["preprocess", "--in", phantom_dir, "--out", out, "--target", "64"])
    assert code == 0
    return out


class TestGenAndPreprocess:
    def test_layout(self, phantom_dir, prep_dir):
        assert os.path.exists(os.path.join(phantom_dir, "labels.csv"))
        assert len(data_io.list_patient_dirs(phantom_dir)) == 8
        index = data_io.read_index(prep_dir)
        assert len(index) == 8
        assert all(v["size"] == 64 for v in index.values())
        assert os.path.exists(os.path.join(prep_dir, "resolved_config.txt"))

    def test_missing_input_dir_is_data_error(self, tmp_path):
        code = main(["preprocess", "--in", str(tmp_path / "nope"),
                     "--out", str(tmp_path / "prep")])
        assert code == 3

    def test_unknown_config_key_is_config_error(self, tmp_path, phantom_dir):
        code = main(["preprocess", "--in", phantom_dir, "--out", str(tmp_path / "p"),
                     "--set", "lrr=3"])
        assert code == 2

    def test_bad_window_is_data_error(self, tmp_path, phantom_dir):
        code = main(["preprocess", "--in", phantom_dir, "--out", str(tmp_path / "p"),
                     "--window-lo", "250", "--window-hi", "-200"])
        assert code == 3


class TestLbpEncodeCommand:
    def test_encodes_same_layout(self, prep_dir, tmp_path):
        out = str(tmp_path / "lbp")
        code = main(["lbp-encode", "--in", prep_dir, "--out", out,
                     "--radius", "1", "--neighbors", "8", "--comparison", "strict"])
        assert code == 0
        index = data_io.read_index(out)
        assert len(index) == 8
        stack = data_io.read_slices(out, sorted(index)[0])
        assert stack.min() >= 0.0 and stack.max() <= 1.0

    def test_matches_library_encoding(self, prep_dir, tmp_path):
        from livertex.lbp import encode_stack_to_unit
        out = str(tmp_path / "lbp")
        main(["lbp-encode", "--in", prep_dir, "--out", out])
        pid = sorted(data_io.read_index(prep_dir))[0]
        got = data_io.read_slices(out, pid)
        want = encode_stack_to_unit(data_io.read_slices(prep_dir, pid))
        assert np.array_equal(got, want)


class TestPretrainFinetuneCommands:
    def test_pretrain_then_finetune(self, prep_dir, phantom_dir, tmp_path):
        ckpt = str(tmp_path / "ckpt" / "pre.ckpt")
        code = main(["pretrain", "--data", prep_dir, "--out", ckpt,
                     "--epochs", "2", "--batch", "8", "--patch", "8", "--swaps", "2",
                     "--seed", "1"])
        assert code == 0
        assert os.path.exists(ckpt)
        hist = open(os.path.join(os.path.dirname(ckpt), "history.csv")).read().splitlines()
        assert hist[0] == "epoch,rmse,gen_adv,disc"
        assert len(hist) == 3

        out = str(tmp_path / "ft")
        code = main(["finetune", "--data", prep_dir, "--labels",
                     os.path.join(phantom_dir, "labels.csv"), "--task", "fibrosis",
                     "--init", ckpt, "--input", "lbp", "--epochs", "2", "--seed", "1",
                     "--out", out])
        assert code == 0
        assert os.path.exists(os.path.join(out, "model.ckpt"))
        metrics = json.load(open(os.path.join(out, "metrics.json")))
        assert len(metrics["epochs"]) == 2

    def test_finetune_missing_checkpoint_is_data_error(self, prep_dir, phantom_dir, tmp_path):
        code = main(["finetune", "--data", prep_dir, "--labels",
                     os.path.join(phantom_dir, "labels.csv"), "--task", "fibrosis",
                     "--init", str(tmp_path / "missing.ckpt"), "--out", str(tmp_path / "o")])
        assert code == 3


class TestEvaluateCommand:
    def test_random_init_report(self, prep_dir, phantom_dir, tmp_path):
        out = str(tmp_path / "eval")
        code = main(["evaluate", "--data", prep_dir, "--labels",
                     os.path.join(phantom_dir, "labels.csv"), "--tasks", "fibrosis",
                     "--init", "random", "--input", "image",
                     "--k", "2", "--repeats", "1",
                     "--set", "finetune.epochs=1", "--seed", "0", "--out", out])
        assert code == 0
        report = json.load(open(os.path.join(out, "report.json")))
        assert len(report["reports"]) == 1
        rep = report["reports"][0]
        assert rep["task"] == "fibrosis"
        assert len(rep["fold_aucs"]) == 1 and len(rep["fold_aucs"][0]) == 2
        assert rep["config_fingerprint"]
        csv_lines = open(os.path.join(out, "report.csv")).read().splitlines()
        assert csv_lines[0] == "task,mean_auc,std_auc"


class TestPipeline:
    def test_empty_stage_list_noop(self, tmp_path):
        cfg = resolve_config()
        assert run_pipeline([], cfg, str(tmp_path / "run")) == 0
        assert not os.path.exists(str(tmp_path / "run"))

    def test_unknown_stage_rejected(self, tmp_path):
        code = main(["pipeline", "--stages", "gen,zap", "--out", str(tmp_path / "r")])
        assert code == 2

    def test_eval_without_upstream_names_missing_path(self, tmp_path, capsys):
        out = str(tmp_path / "r")
        code = main(["pipeline", "--stages", "eval", "--out", out])
        assert code == 3
        err = capsys.readouterr().err
        assert os.path.join(out, "prep") in err

    def test_finetune_without_checkpoint_names_it(self, phantom_dir, prep_dir,
                                                  tmp_path, capsys):
        out = str(tmp_path / "r")
        os.makedirs(out)
        os.symlink(phantom_dir, os.path.join(out, "data"))
        os.symlink(prep_dir, os.path.join(out, "prep"))
        code = main(["pipeline", "--stages", "finetune", "--out", out])
        assert code == 3
        assert "pretrain.ckpt" in capsys.readouterr().err

    def test_full_pipeline_smoke(self, tmp_path):
        out = str(tmp_path / "run")
        code = main(["pipeline", "--stages", "gen,prep,pretrain,finetune,eval",
                     "--out", out, "--seed", "2",
                     "--set", "phantom.patients=8", "--set", "phantom.slices=3",
                     "--set", "phantom.dims=64",
                     "--set", "pretrain.epochs=1", "--set", "pretrain.batch=8",
                     "--set", "pretrain.patch=8", "--set", "pretrain.swaps=2",
                     "--set", "finetune.epochs=1", "--set", "eval.k=2",
                     "--set", "eval.repeats=1", "--set", "eval.tasks=fibrosis"])
        assert code == 0
        assert os.path.exists(os.path.join(out, "eval", "report.json"))
        assert os.path.exists(os.path.join(out, "resolved_config.txt"))
        assert os.path.exists(os.path.join(out, "ckpt", "history.csv"))
        assert os.path.exists(os.path.join(out, "finetune", "fibrosis", "model.ckpt"))


class TestAblateCommand:
    def test_grid_runs_with_one_checkpoint(self, prep_dir, phantom_dir, tmp_path):
        ckpt = str(tmp_path / "pre.ckpt")
        main(["pretrain", "--data", prep_dir, "--out", ckpt, "--epochs", "1",
              "--batch", "8", "--patch", "8", "--swaps", "2"])
        out = str(tmp_path / "ab")
        code = main(["ablate", "--data", prep_dir, "--labels",
                     os.path.join(phantom_dir, "labels.csv"),
                     "--ckpt-adv", ckpt, "--tasks", "fibrosis",
                     "--k", "2", "--repeats", "1",
                     "--set", "finetune.epochs=1", "--out", out])
        assert code == 0
        lines = open(os.path.join(out, "ablation.csv")).read().splitlines()
        assert lines[0] == "ssl,adv_loss,input_mode,task,mean_auc,std_auc"
        assert len(lines) == 7  # six grid rows
        # rows without the no-adv checkpoint are NA but present
        assert sum("NA" in l for l in lines[1:]) == 2
