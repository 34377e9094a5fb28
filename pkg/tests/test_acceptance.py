"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line. Run with `pytest tests/test_acceptance.py -s` to see the
per-criterion lines inline.
"""

import dataclasses
import json
import re
import time

import numpy as np

from coverml import models
from coverml.cli import main as cli_main
from coverml.datasets import train_test_split
from coverml.metrics import ConfusionCounts, roc_curve, scalar_metrics
from coverml.models import (
    FMModel,
    GbtParams,
    LogisticModel,
    LogisticParams,
    RandomForestParams,
    feature_importances,
    validate_importances,
)
from coverml.models.fm import fm_loss_and_grad
from coverml.models.linear import hinge_loss_and_grad, logistic_loss_and_grad
from coverml.models.tree import DecisionTreeParams, build_tree
from coverml.persist import ChecksumError, load_model, save_model
from coverml.selection import CVConfig, cross_validate, evaluate_fitted, make_folds
from coverml.stages import default_pipeline_spec, fit_pipeline

from helpers import concordance_auc, grad_check, oracle_build_tree, tree_structure

# Published reference vector for the importance validator (criterion 2).
REFERENCE_IMPORTANCES = [0.555733, 0.162801, 0.131934, 0.12204, 0.015729, 0.011764, 0]


def check(criterion: str, condition: bool, detail: str = ""):
    status = "PASS" if condition else "FAIL"
    print(f"[{status}] {criterion}" + (f" ({detail})" if detail else ""))
    assert condition, f"{criterion}: {detail}"


def fit_all_families(train, test, spec):
    out = {}
    for family in models.FAMILY_ORDER:
        fitted = fit_pipeline(spec, train, classifier=(family, models.default_params(family)))
        out[family] = evaluate_fitted(fitted, test)
    return out


class TestAcceptance:
    def test_criterion_1_metric_oracle(self):
        precision, recall, _, _ = scalar_metrics(ConfusionCounts(11699, 2713, 0, 3))
        ok = (
            abs(precision - 0.8117540938107133) <= 1e-12
            and abs(recall - 0.9997436335669116) <= 1e-12
        )
        check(
            "criterion 1: reference confusion counts reproduce precision/recall to 1e-12",
            ok,
            f"precision={precision!r} recall={recall!r}",
        )

    def test_criterion_2_importance_normalization(self, benefits_10k):
        validate_importances(REFERENCE_IMPORTANCES, tol=1e-5)  # published vector accepted

        train, _ = train_test_split(benefits_10k, 0.3, seed=1)
        spec = default_pipeline_spec(train, exclude=("IsCovered",))
        sums_ok, constant_ok = True, True
        for family, params in (
            ("dt", DecisionTreeParams()),
            ("rf", RandomForestParams(num_trees=15)),
            ("gbt", GbtParams(num_iterations=8)),
        ):
            fitted = fit_pipeline(spec, train, classifier=(family, params))
            imp = feature_importances(fitted.classifier, names=fitted.feature_names)
            sums_ok &= abs(sum(imp.values) - 1.0) <= 1e-9
            constant_ok &= dict(zip(imp.names, imp.values))["IsEHB"] == 0.0
        check(
            "criterion 2: importance vectors validate, sum to 1 within 1e-9, constant feature is exactly 0",
            sums_ok and constant_ok,
        )

    def test_criterion_3_skew_property(self, benefits_10k):
        start = time.perf_counter()
        train, test = train_test_split(benefits_10k, 0.3, seed=1)
        spec = default_pipeline_spec(train, exclude=("IsCovered",))
        reports = fit_all_families(train, test, spec)
        elapsed = time.perf_counter() - start
        recalls = {f: r.recall for f, r in reports.items()}
        recall_ok = all(r >= 0.95 for r in recalls.values())
        precision_ok = all(abs(reports[f].precision - 0.81) <= 0.03 for f in ("lr", "svm"))
        check(
            "criterion 3: every family recall >= 0.95 and LR/SVM precision within 0.81 +/- 0.03 on the 81%-positive fixture",
            recall_ok and precision_ok and elapsed < 60.0,
            f"recalls={ {f: round(v, 4) for f, v in recalls.items()} } "
            f"lr_p={reports['lr'].precision:.4f} svm_p={reports['svm'].precision:.4f} "
            f"elapsed={elapsed:.1f}s",
        )

    def test_criterion_4_ensemble_superiority(self, xor_table):
        start = time.perf_counter()
        train, test = train_test_split(xor_table, 0.3, seed=2)
        spec = default_pipeline_spec(train, exclude=("IsCovered",))
        aucs = {}
        for family in ("lr", "rf", "gbt"):
            fitted = fit_pipeline(spec, train, classifier=(family, models.default_params(family)))
            aucs[family] = evaluate_fitted(fitted, test).auc_roc
        elapsed = time.perf_counter() - start
        ok = aucs["rf"] >= aucs["lr"] + 0.10 and aucs["gbt"] >= aucs["lr"] + 0.10
        check(
            "criterion 4: GBT and RF each beat LR's AUC-ROC by >= 0.10 on the interaction fixture",
            ok and elapsed < 60.0,
            f"aucs={ {f: round(v, 4) for f, v in aucs.items()} } elapsed={elapsed:.1f}s",
        )

    def test_criterion_5_auc_oracle_equivalence(self):
        rng = np.random.default_rng(55)
        worst = 0.0
        for _ in range(200):
            n = int(rng.integers(2, 201))
            labels = rng.integers(0, 2, size=n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            # coarse grid of score values injects ties
            scores = rng.integers(0, 10, size=n) / 10.0
            _, auc = roc_curve(scores, labels)
            worst = max(worst, abs(auc - concordance_auc(scores, labels)))
        check(
            "criterion 5: trapezoid AUC-ROC equals pairwise concordance within 1e-9 on 200 random tied instances",
            worst <= 1e-9,
            f"max|diff|={worst:.2e}",
        )

    def test_criterion_6_gradient_checks(self):
        rng = np.random.default_rng(66)
        worst = {"lr": 0.0, "fm": 0.0, "svm": 0.0}

        for _ in range(50):
            n, d = int(rng.integers(2, 12)), int(rng.integers(1, 6))
            X = rng.normal(size=(n, d))
            y01 = rng.integers(0, 2, size=n).astype(float)
            reg = float(rng.random() * 0.5)

            def lr_vg(theta):
                loss, gw, gb = logistic_loss_and_grad(theta[:-1], theta[-1], X, y01, reg, True)
                return loss, np.append(gw, gb)

            worst["lr"] = max(worst["lr"], grad_check(lr_vg, rng.normal(size=d + 1)))

        for _ in range(50):
            n, d, k = int(rng.integers(2, 10)), int(rng.integers(1, 5)), int(rng.integers(1, 4))
            X = rng.normal(size=(n, d))
            ys = rng.choice([-1.0, 1.0], size=n)

            def fm_vg(theta):
                w0, w, V = theta[0], theta[1 : 1 + d], theta[1 + d :].reshape(d, k)
                loss, g0, gw, gV = fm_loss_and_grad(X, ys, w0, w, V)
                return loss, np.concatenate(([g0], gw, gV.ravel()))

            worst["fm"] = max(worst["fm"], grad_check(fm_vg, rng.normal(size=1 + d + d * k) * 0.5))

        done = 0
        while done < 50:
            n, d = int(rng.integers(2, 12)), int(rng.integers(1, 6))
            X = rng.normal(size=(n, d))
            ys = rng.choice([-1.0, 1.0], size=n)
            reg = float(rng.random() * 0.5)
            theta = rng.normal(size=d + 1)
            if np.min(np.abs(1.0 - ys * (X @ theta[:-1] + theta[-1]))) < 1e-3:
                continue  # kink: the subgradient is not a derivative there

            def svm_vg(t):
                loss, gw, gb = hinge_loss_and_grad(t[:-1], t[-1], X, ys, reg, True)
                return loss, np.append(gw, gb)

            worst["svm"] = max(worst["svm"], grad_check(svm_vg, theta))
            done += 1

        ok = all(v < 1e-5 for v in worst.values())
        check(
            "criterion 6: LR/FM/SVM analytic gradients match central differences within 1e-5 on 50 instances each",
            ok,
            f"max rel err: { {k: f'{v:.2e}' for k, v in worst.items()} }",
        )

    def test_criterion_7_tree_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(77)
        mismatches = 0
        trials = 0
        while trials < 100:
            X = np.round(rng.random((8, 3)), 1)
            y = rng.integers(0, 2, size=8)
            if y.min() == y.max():
                continue
            trials += 1
            engine = build_tree(X, y, max_depth=2)
            oracle = oracle_build_tree(X, y, max_depth=2)
            if tree_structure(engine) != tree_structure(oracle):
                mismatches += 1
        check(
            "criterion 7: depth<=2 CART equals the exhaustive split-enumeration oracle on 100 random 8-row datasets",
            mismatches == 0,
            f"mismatches={mismatches}/100",
        )

    def test_criterion_8_cv_selection_oracle(self, benefits_small):
        table = benefits_small.select_rows(range(600))
        spec = default_pipeline_spec(table, exclude=("IsCovered",))
        grid = [
            dataclasses.replace(LogisticParams(), reg_param=rp, max_iter=mi)
            for rp in (0.01, 0.1, 0.5, 1.0)
            for mi in (2, 6)
        ]
        assert len(grid) == 8
        config = CVConfig(folds=3, seed=13)

        # independent exhaustive evaluation on the same seeded folds
        folds = make_folds(table.row_count, config.folds, config.seed)
        all_idx = np.arange(table.row_count)
        oracle_means = []
        for params in grid:
            fold_scores = []
            for val_idx in folds:
                train_idx = np.setdiff1d(all_idx, val_idx)
                fitted = fit_pipeline(
                    spec, table.select_rows(train_idx.tolist()), classifier=("lr", params)
                )
                out = fitted.transform(table.select_rows(val_idx.tolist()))
                s = np.asarray(out.column("rawScore"), dtype=float)
                yv = np.asarray(out.column("trueLabel"), dtype=float).astype(int)
                fold_scores.append(roc_curve(s, yv)[1])
            oracle_means.append(float(np.mean(fold_scores)))
        oracle_best = int(np.argmax(oracle_means))

        results = [
            cross_validate(spec, "lr", grid, table, dataclasses.replace(config, parallelism=p))
            for p in (1, 2, 8)
        ]
        selection_ok = all(r.best_index == oracle_best for r in results)
        means_ok = all(
            r.cells[i].mean_metric == oracle_means[i] for r in results for i in range(len(grid))
        )
        thread_ok = all(
            r.model.to_dict() == results[0].model.to_dict() for r in results[1:]
        )
        check(
            "criterion 8: CV selection equals the exhaustive per-cell oracle and is identical across 1/2/8 threads",
            selection_ok and means_ok and thread_ok,
            f"oracle_best={oracle_best}",
        )

    def test_criterion_9_persistence_roundtrip(self, tmp_path, benefits_small):
        spec = default_pipeline_spec(benefits_small, exclude=("IsCovered",))
        prepared = fit_pipeline(spec, benefits_small).transform(benefits_small)
        X = prepared.feature_matrix("features")[:1000]
        y = prepared.label_array()[:1000]
        bit_identical = True
        for family in models.FAMILY_ORDER:
            params = models.default_params(family)
            if family == "rf":
                params = dataclasses.replace(params, num_trees=10)
            model = models.train(family, X, y, params)
            path = tmp_path / f"{family}.bin"
            save_model(model, path, seed=1)
            back, _ = load_model(path)
            bit_identical &= np.array_equal(back.raw_scores(X), model.raw_scores(X))
            bit_identical &= np.array_equal(back.predictions(X), model.predictions(X))
            probs = model.probabilities(X)
            if probs is not None:
                bit_identical &= np.array_equal(back.probabilities(X), probs)

        corrupted = bytearray((tmp_path / "gbt.bin").read_bytes())
        corrupted[-5] ^= 0x01
        (tmp_path / "corrupt.bin").write_bytes(bytes(corrupted))
        try:
            load_model(tmp_path / "corrupt.bin")
            rejected = False
        except ChecksumError:
            rejected = True
        check(
            "criterion 9: every family round-trips bit-identically on 1,000 rows and corrupted files are rejected",
            bit_identical and rejected,
        )

    def test_criterion_10_reduction_laws(self):
        rng = np.random.default_rng(10)
        X = rng.random((150, 4))
        y = ((X[:, 1] > 0.4) & (X[:, 2] < 0.8)).astype(int)

        rf = models.train(
            "rf",
            X,
            y,
            RandomForestParams(num_trees=1, feature_subset_rule="all", bootstrap=False),
        )
        dt = models.train("dt", X, y, DecisionTreeParams())
        rf_dt = np.array_equal(rf.predictions(X), dt.predictions(X)) and np.array_equal(
            rf.probabilities(X), dt.probabilities(X)
        )

        w = rng.normal(size=4)
        b = float(rng.normal())
        fm = FMModel(b, w, np.zeros((4, 6)), threshold=0.5)
        lr = LogisticModel(w, b, threshold=0.5)
        fm_lr = np.array_equal(fm.raw_scores(X), lr.raw_scores(X)) and np.array_equal(
            fm.probabilities(X), lr.probabilities(X)
        )

        gbt = models.train("gbt", X, y, GbtParams(learning_rate=0.0))
        base_rate = y.mean()
        expected = np.full(X.shape[0], 1 if base_rate > 0.5 else 0)
        gbt_base = np.array_equal(gbt.predictions(X), expected) and np.allclose(
            gbt.probabilities(X), base_rate, atol=1e-12
        )

        check(
            "criterion 10: RF(1 tree/all features/no bootstrap)=DT, FM(zero factors)=LR score path, GBT(lr=0)=base rate",
            rf_dt and fm_lr and gbt_base,
            f"rf_dt={rf_dt} fm_lr={fm_lr} gbt_base={gbt_base}",
        )

    def test_criterion_11_end_to_end_cli(self, tmp_path, capsys):
        d = tmp_path

        def run(*argv):
            code = cli_main(list(argv))
            captured = capsys.readouterr()
            return code, captured.out, captured.err

        steps_ok = True
        code, _, _ = run(
            "synth", "--kind", "benefits", "--rows", "10000", "--seed", "1",
            "--out", str(d / "raw.tbl"), "--csv-out", str(d / "raw.csv"),
            "--schema-out", str(d / "schema.json"),
        )
        steps_ok &= code == 0
        code, _, _ = run(
            "ingest", "--input", str(d / "raw.csv"), "--schema", str(d / "schema.json"),
            "--derive-label", "--out", str(d / "data.tbl"),
        )
        steps_ok &= code == 0
        (d / "grid.json").write_text(json.dumps({"axes": {"num_iterations": [10]}}))
        code, _, _ = run(
            "train", "--data", str(d / "data.tbl"), "--model", "gbt",
            "--grid", str(d / "grid.json"), "--seed", "1",
            "--test-out", str(d / "test.tbl"), "--out", str(d / "m.bin"),
        )
        steps_ok &= code == 0
        code, eval_out, _ = run(
            "evaluate", "--model", str(d / "m.bin"), "--data", str(d / "test.tbl"),
            "--out", str(d / "report.json"), "--predictions", str(d / "preds.csv"),
        )
        steps_ok &= code == 0
        metric_rows = [line.split()[0] for line in eval_out.strip().splitlines()]
        table_ok = metric_rows[:7] == ["metric", "TP", "FP", "TN", "FN", "Precision", "Recall"]

        preds = (d / "preds.csv").read_text().splitlines()
        preds_ok = preds[0] == "features,prediction,trueLabel" and bool(
            re.match(r'^"\[.*\]",\d\.0,\d\.0$', preds[1])
        )

        code, imp_out, _ = run("importance", "--model", str(d / "m.bin"))
        steps_ok &= code == 0
        imp_lines = imp_out.strip().splitlines()
        ranking_ok = (
            imp_lines[0].split()[:2] == ["Ranking", "Feature"]
            and imp_lines[1].split()[0] == "1"
            and imp_lines[1].split()[1] == "Exclusions"
        )
        check(
            "criterion 11: CLI ingest->train(gbt)->evaluate->importance completes with the planted feature ranked first",
            steps_ok and table_ok and preds_ok and ranking_ok,
            f"steps={steps_ok} table={table_ok} preds={preds_ok} ranking={ranking_ok}",
        )
