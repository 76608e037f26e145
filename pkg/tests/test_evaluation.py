import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from livertex.evaluation import (GRID_ROWS, MetricsReport, make_folds,
                                 run_ablation_grid, run_cv, write_ablation_csv,
                                 write_report_csv, write_report_json)
from livertex.finetune import FinetuneConfig, PatientBag, ScoreRecord, TASKS, combine_score
from livertex.metrics import auc_binary, auc_multiclass

from oracles import auc_macro_pair_counting, auc_pair_counting


class TestAucBinary:
    def test_worked_example(self):
        assert auc_binary([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75

    def test_perfect_separation(self):
        assert auc_binary([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0

    def test_all_ties_half(self):
        assert auc_binary([0.5, 0.5, 0.5, 0.5], [0, 1, 0, 1]) == 0.5

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            auc_binary([0.1, 0.2], [1, 1])

    def test_matches_pair_counting_oracle(self, rng):
        for _ in range(50):
            n = int(rng.integers(4, 40))
            scores = rng.random(n)
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            got = auc_binary(scores, labels)
            assert got == pytest.approx(auc_pair_counting(scores, labels), abs=1e-12)

    def test_ties_match_oracle(self, rng):
        for _ in range(30):
            n = int(rng.integers(6, 30))
            scores = rng.integers(0, 4, n) / 4.0  # heavy ties
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            assert auc_binary(scores, labels) == pytest.approx(
                auc_pair_counting(scores, labels), abs=1e-12)

    def test_complement_symmetry_tie_free(self, rng):
        scores = rng.permutation(20) / 20.0
        labels = np.array([0, 1] * 10)
        assert auc_binary(scores, labels) + auc_binary(scores, 1 - labels) == pytest.approx(1.0)

    @given(st.lists(st.tuples(st.floats(0, 1), st.integers(0, 1)), min_size=4, max_size=30))
    @settings(max_examples=50)
    def test_monotone_transform_invariance(self, pairs):
        scores = np.array([p[0] for p in pairs])
        labels = np.array([p[1] for p in pairs])
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        a = auc_binary(scores, labels)
        # rank remap: exactly strictly increasing on the realized floats
        uniq = np.unique(scores)
        remap = {v: 5.0 + 2.0 * i for i, v in enumerate(uniq)}
        b = auc_binary(np.array([remap[v] for v in scores]), labels)
        assert a == pytest.approx(b, abs=1e-12)


def _random_probs(rng, n, c):
    p = rng.random((n, c)) + 1e-3
    return p / p.sum(axis=1, keepdims=True)


class TestAucMulticlass:
    def test_two_class_reduces_to_binary(self, rng):
        p = _random_probs(rng, 20, 2)
        y = rng.integers(0, 2, 20)
        y[0], y[1] = 0, 1
        assert auc_multiclass(p, y) == pytest.approx(auc_binary(p[:, 1], y), abs=1e-12)

    def test_one_hot_perfect(self):
        y = np.array([0, 1, 2, 1, 0])
        p = np.eye(3)[y]
        assert auc_multiclass(p, y) == 1.0

    def test_matches_macro_oracle(self, rng):
        for _ in range(50):
            c = int(rng.integers(2, 4))
            n = int(rng.integers(c + 2, 50))
            p = _random_probs(rng, n, c)
            y = rng.integers(0, c, n)
            while len(np.unique(y)) < 2:
                y = rng.integers(0, c, n)
            got = auc_multiclass(p, y)
            assert got == pytest.approx(auc_macro_pair_counting(p, y), abs=1e-12)

    def test_absent_category_skipped(self, rng):
        p = _random_probs(rng, 10, 3)
        y = np.array([0, 1] * 5)  # category 2 absent
        got = auc_multiclass(p, y)
        assert got == pytest.approx(auc_macro_pair_counting(p, y), abs=1e-12)

    def test_rows_must_sum_to_one(self):
        with pytest.raises(ValueError):
            auc_multiclass(np.array([[0.5, 0.4], [0.5, 0.5]]), [0, 1])

    def test_single_category_rejected(self):
        with pytest.raises(ValueError):
            auc_multiclass(np.array([[0.5, 0.5], [0.4, 0.6]]), [1, 1])


def _cohort(n=30, task="fibrosis"):
    """Patients with the cohort's combined fibrosis distribution (7, 10, 13)."""
    raws = [0.0] * 7 + [1.0] * 5 + [2.0] * 5 + [3.0] * 5 + [3.5] * 4 + [4.0] * 4
    records = {}
    bags = []
    for i, raw in enumerate(raws[:n]):
        pid = f"c{i:02d}"
        records[pid] = ScoreRecord(pid, raw, 0 if i % 2 else 2, i % 3, i % 3)
        bags.append(PatientBag(pid, np.full((2, 16, 16), 0.5, dtype=np.float32)))
    return bags, records


class TestMakeFolds:
    def test_plan_shape_and_partition(self):
        bags, records = _cohort()
        ids = [b.patient_id for b in bags]
        plan = make_folds(ids, records, TASKS["fibrosis"], k=3, repeats=5, seed=0)
        assert plan.k == 3 and plan.repeats == 5
        for repeat in plan.splits:
            tests = [pid for split in repeat for pid in split.test]
            assert sorted(tests) == sorted(ids)  # exact partition
            for split in repeat:
                assert set(split.train) | set(split.val) | set(split.test) == set(ids)

    def test_fold_sizes_and_stratification(self):
        bags, records = _cohort()
        ids = [b.patient_id for b in bags]
        cats = {pid: combine_score(records[pid], TASKS["fibrosis"]) for pid in ids}
        global_counts = np.bincount([cats[p] for p in ids], minlength=3)
        plan = make_folds(ids, records, TASKS["fibrosis"], k=3, repeats=3, seed=1)
        for repeat in plan.splits:
            for split in repeat:
                assert len(split.test) == 10
                fold_counts = np.bincount([cats[p] for p in split.test], minlength=3)
                for c in range(3):
                    assert abs(fold_counts[c] - global_counts[c] / 3) <= 1

    def test_val_has_two_categories(self):
        bags, records = _cohort()
        ids = [b.patient_id for b in bags]
        cats = {pid: combine_score(records[pid], TASKS["fibrosis"]) for pid in ids}
        plan = make_folds(ids, records, TASKS["fibrosis"], k=3, repeats=2, seed=2)
        for repeat in plan.splits:
            for split in repeat:
                assert len(split.val) == 2
                assert len({cats[p] for p in split.val}) == 2

    def test_k1_rejected(self):
        bags, records = _cohort()
        with pytest.raises(ValueError):
            make_folds([b.patient_id for b in bags], records, TASKS["fibrosis"], k=1)

    def test_small_category_rejected(self):
        bags, records = _cohort(n=6)  # only category 0 has >= 3 members
        with pytest.raises(ValueError) as err:
            make_folds([b.patient_id for b in bags], records, TASKS["fibrosis"], k=5)
        assert "category" in str(err.value)

    def test_same_seed_identical_plan(self):
        bags, records = _cohort()
        ids = [b.patient_id for b in bags]
        p1 = make_folds(ids, records, TASKS["fibrosis"], k=3, repeats=2, seed=9)
        p2 = make_folds(ids, records, TASKS["fibrosis"], k=3, repeats=2, seed=9)
        assert p1 == p2
        p3 = make_folds(ids, records, TASKS["fibrosis"], k=3, repeats=2, seed=10)
        assert p1 != p3


def oracle_trainer(bags, records, task, config, split, encoder_ckpt, deterministic):
    """Emits one-hot probabilities at the true category."""
    out = {}
    for pid in split.test:
        cat = combine_score(records[pid], task)
        p = np.zeros(task.num_categories)
        p[cat] = 1.0
        out[pid] = p
    return out


def constant_trainer(bags, records, task, config, split, encoder_ckpt, deterministic):
    """Emits the same probability vector for every patient."""
    p = np.full(task.num_categories, 1.0 / task.num_categories)
    return {pid: p.copy() for pid in split.test}


class TestRunCv:
    def test_label_oracle_scores_100(self):
        bags, records = _cohort()
        plan = make_folds([b.patient_id for b in bags], records, TASKS["fibrosis"],
                          k=3, repeats=3, seed=0)
        report = run_cv(bags, records, TASKS["fibrosis"], plan, FinetuneConfig(),
                        trainer=oracle_trainer)
        assert report.mean_auc == 100.0
        assert report.std_auc == 0.0

    def test_constant_classifier_scores_50(self):
        bags, records = _cohort()
        plan = make_folds([b.patient_id for b in bags], records, TASKS["fibrosis"],
                          k=3, repeats=3, seed=0)
        report = run_cv(bags, records, TASKS["fibrosis"], plan, FinetuneConfig(),
                        trainer=constant_trainer)
        assert report.mean_auc == 50.0
        assert report.std_auc == 0.0

    def test_mean_std_recomputable_from_raw(self):
        bags, records = _cohort()
        plan = make_folds([b.patient_id for b in bags], records, TASKS["fibrosis"],
                          k=3, repeats=4, seed=3)

        def noisy_trainer(bags, records, task, config, split, ckpt, det):
            rng = np.random.default_rng(config.seed)
            out = {}
            for pid in split.test:
                p = rng.random(task.num_categories) + 1e-6
                out[pid] = p / p.sum()
            return out

        report = run_cv(bags, records, TASKS["fibrosis"], plan, FinetuneConfig(),
                        trainer=noisy_trainer)
        repeat_means = [np.mean(row) for row in report.fold_aucs]
        assert report.mean_auc == pytest.approx(100 * np.mean(repeat_means), abs=1e-12)
        assert report.std_auc == pytest.approx(100 * np.std(repeat_means), abs=1e-12)
        assert len(report.fold_aucs) == 4
        assert all(len(row) == 3 for row in report.fold_aucs)

    def test_fold_failure_aborts_with_context(self):
        bags, records = _cohort()
        plan = make_folds([b.patient_id for b in bags], records, TASKS["fibrosis"],
                          k=3, repeats=1, seed=0)

        def broken_trainer(*a, **kw):
            raise ValueError("synthetic failure")

        with pytest.raises(RuntimeError, match="fold failure"):
            run_cv(bags, records, TASKS["fibrosis"], plan, FinetuneConfig(),
                   trainer=broken_trainer)


class TestAblationGrid:
    def _plans(self, bags, records):
        ids = [b.patient_id for b in bags]
        return {t: make_folds(ids, records, TASKS[t], k=3, repeats=2, seed=0)
                for t in ("fibrosis",)}

    def test_six_rows_with_fingerprints(self, tmp_path):
        bags, records = _cohort()
        plans = self._plans(bags, records)
        fingerprints = []

        def fp(settings):
            from livertex.config import config_fingerprint
            fingerprints.append(config_fingerprint(settings))
            return fingerprints[-1]

        results = run_ablation_grid(
            bags, records, [TASKS["fibrosis"]], plans, FinetuneConfig(),
            ckpt_adv="unused.ckpt", ckpt_noadv="unused.ckpt",
            trainer=oracle_trainer, fingerprint_fn=fp)
        # ssl rows fail to load the fake checkpoints -> unavailable cells
        assert len(results) == 6
        ssl_off = [r for r in results if not r["ssl"]]
        assert all(r["available"] for r in ssl_off)
        assert {r["input_mode"] for r in ssl_off} == {"image", "lbp"}

    def test_ssl_off_never_reads_checkpoint(self, monkeypatch):
        import livertex.evaluation as ev

        bags, records = _cohort()
        plans = self._plans(bags, records)
        loads = []
        monkeypatch.setattr(ev, "load_state", lambda path: loads.append(path))
        rows = [(False, None, "image"), (False, None, "lbp")]
        results = run_ablation_grid(bags, records, [TASKS["fibrosis"]], plans,
                                    FinetuneConfig(), ckpt_adv="a.ckpt",
                                    ckpt_noadv="b.ckpt", rows=rows,
                                    trainer=oracle_trainer)
        assert loads == []
        assert all(r["available"] for r in results)

    def test_missing_checkpoint_marks_unavailable(self):
        bags, records = _cohort()
        plans = self._plans(bags, records)
        rows = [(True, True, "lbp")]
        results = run_ablation_grid(bags, records, [TASKS["fibrosis"]], plans,
                                    FinetuneConfig(), ckpt_adv="/nonexistent.ckpt",
                                    ckpt_noadv=None, rows=rows, trainer=oracle_trainer)
        assert len(results) == 1
        assert not results[0]["available"]
        assert "nonexistent" in results[0]["reason"]

    def test_empty_grid(self):
        bags, records = _cohort()
        results = run_ablation_grid(bags, records, [TASKS["fibrosis"]], {},
                                    FinetuneConfig(), rows=[], trainer=oracle_trainer)
        assert results == []

    def test_grid_rows_cover_six_configurations(self):
        assert len(GRID_ROWS) == 6
        assert len({(s, a, m) for s, a, m in GRID_ROWS}) == 6


class TestReportWriters:
    def test_report_files(self, tmp_path):
        rep = MetricsReport("fibrosis", 87.5, 1.25, [[0.9, 0.85]], "abc123", {"k": 2})
        jpath = str(tmp_path / "report.json")
        cpath = str(tmp_path / "report.csv")
        write_report_json([rep], jpath)
        write_report_csv([rep], cpath)
        import json
        data = json.load(open(jpath))
        assert data["reports"][0]["mean_auc"] == 87.5
        lines = open(cpath).read().splitlines()
        assert lines[0] == "task,mean_auc,std_auc"
        assert lines[1] == "fibrosis,87.50,1.25"

    def test_ablation_csv(self, tmp_path):
        rep = MetricsReport("fibrosis", 60.0, 2.0, [[0.6]], "fp", {})
        cells = [
            {"ssl": False, "adv_loss": False, "input_mode": "image", "task": "fibrosis",
             "available": True, "report": rep},
            {"ssl": True, "adv_loss": True, "input_mode": "lbp", "task": "fibrosis",
             "available": False, "reason": "missing"},
        ]
        path = str(tmp_path / "ablation.csv")
        write_ablation_csv(cells, path)
        lines = open(path).read().splitlines()
        assert lines[0] == "ssl,adv_loss,input_mode,task,mean_auc,std_auc"
        assert lines[1] == "0,0,image,fibrosis,60.00,2.00"
        assert lines[2] == "1,1,lbp,fibrosis,NA,NA"
