import json

import pytest

from conftest import synthetic_messages
from spambench.classifiers import ClassifierSpec, fit, predict
from spambench.corpus import save_canonical
from spambench.features import fit_vocabulary, transform_corpus
from spambench.harness import (
    DEFAULT_K_VALUES,
    DEFAULT_SEEDS,
    ConfigError,
    ExperimentConfig,
    ResultsStore,
    RunResult,
    ValidationError,
    export_splits,
    read_predictions,
    result_to_record,
    record_to_result,
    run_matrix,
    score_predictions,
    write_predictions,
    write_timing,
)
from spambench.metrics import CellMetrics, score
from spambench.protocol import K_FULL, SplitSpec, sample_few_shot, split
from spambench.reports import ReportError, plot_rows_to_csv, report
from spambench.textprep import preprocess


@pytest.fixture
def corpus_dir(tmp_path, small_corpus):
    save_canonical(small_corpus, tmp_path / "synth.canonical.jsonl")
    return tmp_path


def make_config(corpus_dir, **overrides):
    defaults = dict(
        datasets=["synth"],
        models=["nb"],
        corpus_dir=corpus_dir,
        results_path=corpus_dir / "results.jsonl",
        k_values=[K_FULL],
        seeds=[0],
    )
    defaults.update(overrides)
    return ExperimentConfig(**defaults)


class TestConfig:
    def test_unknown_model_rejected_before_execution(self, corpus_dir):
        with pytest.raises(ConfigError):
            make_config(corpus_dir, models=["perceptron"])

    def test_unknown_dataset_rejected_before_execution(self, corpus_dir):
        with pytest.raises(ConfigError):
            make_config(corpus_dir, datasets=["missing"])

    def test_bad_k_rejected(self, corpus_dir):
        with pytest.raises(ConfigError):
            make_config(corpus_dir, k_values=[0])
        with pytest.raises(ConfigError):
            make_config(corpus_dir, k_values=["half"])

    def test_from_file_round_trip(self, corpus_dir):
        doc = {
            "datasets": ["synth"],
            "models": ["nb", "knn"],
            "corpus_dir": str(corpus_dir),
            "results_path": str(corpus_dir / "r.jsonl"),
            "k_values": [4, "full"],
            "seeds": [0, 1],
        }
        path = corpus_dir / "config.json"
        path.write_text(json.dumps(doc))
        config = ExperimentConfig.from_file(path)
        assert config.models == ["nb", "knn"]
        assert config.k_values == [4, "full"]

    def test_from_file_unknown_key(self, corpus_dir):
        path = corpus_dir / "config.json"
        path.write_text(json.dumps({"datasets": ["synth"], "modles": ["nb"]}))
        with pytest.raises(ConfigError):
            ExperimentConfig.from_file(path)

    def test_default_grid_arity_is_960_cells(self):
        assert len(DEFAULT_K_VALUES) * len(DEFAULT_SEEDS) * 6 * 4 == 960


class TestRunMatrix:
    def test_single_cell(self, corpus_dir):
        config = make_config(corpus_dir)
        run_matrix(config)
        results = ResultsStore.load(config.results_path)
        assert len(results) == 1
        assert results[0].status == "ok"
        assert results[0].k == K_FULL
        assert results[0].metrics.train_time_s > 0.0

    def test_cell_count_matches_grid(self, corpus_dir):
        config = make_config(
            corpus_dir, models=["nb", "knn"], k_values=[4, 8, K_FULL], seeds=[0, 1]
        )
        run_matrix(config)
        assert len(ResultsStore.load(config.results_path)) == 2 * 3 * 2

    def test_rerun_is_metric_identical(self, corpus_dir):
        config_a = make_config(corpus_dir, results_path=corpus_dir / "a.jsonl",
                               models=["nb", "svm"], k_values=[8, K_FULL], seeds=[3])
        config_b = make_config(corpus_dir, results_path=corpus_dir / "b.jsonl",
                               models=["nb", "svm"], k_values=[8, K_FULL], seeds=[3])
        run_matrix(config_a)
        run_matrix(config_b)
        strip = lambda r: {k: v for k, v in result_to_record(r).items()
                           if k not in ("train_time_s", "infer_time_s")}
        a = [strip(r) for r in ResultsStore.load(config_a.results_path)]
        b = [strip(r) for r in ResultsStore.load(config_b.results_path)]
        assert a == b

    def test_failed_cell_recorded_not_raised(self, corpus_dir):
        config = make_config(corpus_dir, k_values=[10_000, K_FULL])
        run_matrix(config)
        results = ResultsStore.load(config.results_path)
        by_k = {str(r.k): r for r in results}
        assert by_k["10000"].status == "failed"
        assert by_k["10000"].notes
        assert by_k["full"].status == "ok"

    def test_rerunning_same_store_reports_conflicts(self, corpus_dir):
        config = make_config(corpus_dir)
        run_matrix(config)
        store = ResultsStore(config.results_path)
        with pytest.warns(UserWarning, match="already recorded"):
            run_matrix(config)
        assert len(ResultsStore.load(config.results_path)) == 1


class TestResultsStore:
    def test_append_and_load(self, tmp_path):
        store = ResultsStore(tmp_path / "r.jsonl")
        result = RunResult(model="nb", dataset="d", k=4, seed=0,
                           metrics=CellMetrics(f1=0.5, precision=0.4, recall=0.6))
        assert store.append(result)
        [loaded] = ResultsStore.load(tmp_path / "r.jsonl")
        assert loaded == result

    def test_duplicate_key_is_conflict(self, tmp_path):
        store = ResultsStore(tmp_path / "r.jsonl")
        result = RunResult(model="nb", dataset="d", k=4, seed=0,
                           metrics=CellMetrics(f1=0.5, precision=0.4, recall=0.6))
        store.append(result)
        with pytest.warns(UserWarning):
            assert not store.append(result)
        assert store.conflicts == [result.key]

    def test_malformed_record_reports_line(self, tmp_path):
        path = tmp_path / "r.jsonl"
        path.write_text('{"model": "nb"}\n')
        with pytest.raises(ValidationError, match=":1"):
            ResultsStore.load(path)

    def test_record_round_trip(self):
        result = RunResult(model="m", dataset="d", k="full", seed=2, status="excluded",
                           notes="why", metrics=CellMetrics(f1=0.1, precision=0.2, recall=0.3,
                                                            train_time_s=1.5, infer_time_s=0.25))
        assert record_to_result(result_to_record(result)) == result


class TestExportSplits:
    def test_k4_train_has_four_lines(self, tmp_path, small_corpus):
        train_path, test_path = export_splits(small_corpus, "synth", 4, 0, tmp_path)
        assert len(train_path.read_text().splitlines()) == 4
        labels = [m.label for m in small_corpus]
        _, test_idx = split(labels, SplitSpec(seed=0))
        assert len(test_path.read_text().splitlines()) == len(test_idx)

    def test_matches_in_process_sample(self, tmp_path, small_corpus):
        train_path, _ = export_splits(small_corpus, "synth", 8, 3, tmp_path)
        exported_ids = [json.loads(line)["id"] for line in train_path.read_text().splitlines()]
        labels = [m.label for m in small_corpus]
        train_idx, _ = split(labels, SplitSpec(seed=3))
        sample = sample_few_shot(train_idx, labels, 8, 3)
        assert exported_ids == [small_corpus[i].id for i in sample.indices]

    def test_test_file_withholds_labels(self, tmp_path, small_corpus):
        _, test_path = export_splits(small_corpus, "synth", 4, 0, tmp_path)
        for line in test_path.read_text().splitlines():
            assert set(json.loads(line)) == {"id", "text"}

    def test_round_trip_id_sets(self, tmp_path, small_corpus):
        train_path, test_path = export_splits(small_corpus, "synth", K_FULL, 1, tmp_path)
        labels = [m.label for m in small_corpus]
        train_idx, test_idx = split(labels, SplitSpec(seed=1))
        train_ids = {json.loads(l)["id"] for l in train_path.read_text().splitlines()}
        test_ids = {json.loads(l)["id"] for l in test_path.read_text().splitlines()}
        assert train_ids == {small_corpus[i].id for i in train_idx}
        assert test_ids == {small_corpus[i].id for i in test_idx}
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["n_train"] == len(train_idx)


class TestScorePredictions:
    def _echo_predictions(self, messages, k, seed, path):
        labels = [m.label for m in messages]
        train_idx, test_idx = split(labels, SplitSpec(seed=seed))
        write_predictions(path, ((messages[i].id, labels[i], None) for i in test_idx))
        return test_idx

    def test_echo_runner_scores_perfect(self, tmp_path, small_corpus):
        pred_path = tmp_path / "pred.jsonl"
        self._echo_predictions(small_corpus, 4, 0, pred_path)
        result = score_predictions(small_corpus, "synth", 4, 0, pred_path, None, "stub")
        assert result.metrics.f1 == 1.0

    def test_all_ham_runner_scores_zero(self, tmp_path, small_corpus):
        labels = [m.label for m in small_corpus]
        _, test_idx = split(labels, SplitSpec(seed=0))
        pred_path = tmp_path / "pred.jsonl"
        write_predictions(pred_path, ((small_corpus[i].id, 0, None) for i in test_idx))
        result = score_predictions(small_corpus, "synth", 4, 0, pred_path, None, "stub")
        assert result.metrics.f1 == 0.0

    def test_path_equivalence_with_in_process_scoring(self, tmp_path, small_corpus):
        labels = [m.label for m in small_corpus]
        train_idx, test_idx = split(labels, SplitSpec(seed=0))
        sample = sample_few_shot(train_idx, labels, K_FULL, 0)
        docs = [preprocess(m.id, m.text) for m in small_corpus]
        vocab = fit_vocabulary([docs[i] for i in sample.indices], 500)
        X_train = transform_corpus([docs[i] for i in sample.indices], vocab)
        X_test = transform_corpus([docs[i] for i in test_idx], vocab)
        model = fit(ClassifierSpec(algorithm="nb"), X_train,
                    [labels[i] for i in sample.indices], n_features=len(vocab))
        preds = predict(model, X_test)
        _, direct = score([labels[i] for i in test_idx], preds)

        pred_path = tmp_path / "pred.jsonl"
        write_predictions(pred_path, ((small_corpus[i].id, p, None) for i, p in zip(test_idx, preds)))
        rescored = score_predictions(small_corpus, "synth", K_FULL, 0, pred_path, None, "nb")
        assert rescored.metrics.f1 == direct.f1
        assert rescored.metrics.precision == direct.precision
        assert rescored.metrics.recall == direct.recall

    def test_missing_id_rejected(self, tmp_path, small_corpus):
        labels = [m.label for m in small_corpus]
        _, test_idx = split(labels, SplitSpec(seed=0))
        pred_path = tmp_path / "pred.jsonl"
        write_predictions(pred_path, ((small_corpus[i].id, 0, None) for i in test_idx[:-1]))
        with pytest.raises(ValidationError, match="missing"):
            score_predictions(small_corpus, "synth", 4, 0, pred_path, None, "stub")

    def test_unknown_id_rejected(self, tmp_path, small_corpus):
        pred_path = tmp_path / "pred.jsonl"
        test_idx = self._echo_predictions(small_corpus, 4, 0, pred_path)
        with pred_path.open("a") as fh:
            fh.write(json.dumps({"id": "ghost", "predicted": 1}) + "\n")
        with pytest.raises(ValidationError, match="unknown"):
            score_predictions(small_corpus, "synth", 4, 0, pred_path, None, "stub")

    def test_duplicate_id_rejected(self, tmp_path, small_corpus):
        pred_path = tmp_path / "pred.jsonl"
        test_idx = self._echo_predictions(small_corpus, 4, 0, pred_path)
        first_id = small_corpus[test_idx[0]].id
        with pred_path.open("a") as fh:
            fh.write(json.dumps({"id": first_id, "predicted": 1}) + "\n")
        with pytest.raises(ValidationError, match="duplicate"):
            read_predictions(pred_path)

    def test_malformed_prediction_line_number(self, tmp_path):
        path = tmp_path / "p.jsonl"
        path.write_text('{"id": "a", "predicted": 1}\n{"id": "b"}\n')
        with pytest.raises(ValidationError, match=":2"):
            read_predictions(path)

    def test_timing_file_propagates(self, tmp_path, small_corpus):
        pred_path = tmp_path / "pred.jsonl"
        self._echo_predictions(small_corpus, 4, 0, pred_path)
        timing_path = tmp_path / "timing.json"
        write_timing(timing_path, 12.5, 0.75, invalid_count=2)
        result = score_predictions(small_corpus, "synth", 4, 0, pred_path, timing_path, "stub")
        assert result.metrics.train_time_s == 12.5
        assert result.metrics.infer_time_s == 0.75
        assert result.metrics.extras == {"invalid_count": 2}

    def test_timing_missing_field_rejected(self, tmp_path, small_corpus):
        pred_path = tmp_path / "pred.jsonl"
        self._echo_predictions(small_corpus, 4, 0, pred_path)
        timing_path = tmp_path / "timing.json"
        timing_path.write_text(json.dumps({"train_time_s": 1.0}))
        with pytest.raises(ValidationError, match="infer_time_s"):
            score_predictions(small_corpus, "synth", 4, 0, pred_path, timing_path, "stub")

    def test_excluded_status_propagates(self, tmp_path, small_corpus):
        pred_path = tmp_path / "pred.jsonl"
        self._echo_predictions(small_corpus, 4, 0, pred_path)
        timing_path = tmp_path / "timing.json"
        write_timing(timing_path, 1.0, 1.0, status="excluded", notes="budget exceeded")
        result = score_predictions(small_corpus, "synth", 4, 0, pred_path, timing_path, "runner")
        assert result.status == "excluded"
        assert result.notes == "budget exceeded"


class TestReports:
    def _results(self):
        rows = []
        for dataset, f1 in (("d1", 0.9), ("d2", 0.7)):
            for model in ("nb", "knn"):
                for k in (4, "full"):
                    bump = 0.05 if model == "knn" else 0.0
                    rows.append(RunResult(
                        model=model, dataset=dataset, k=k, seed=0,
                        metrics=CellMetrics(f1=f1 + bump, precision=f1, recall=f1,
                                            train_time_s=1.0, infer_time_s=0.5),
                    ))
        return rows

    def test_single_model_single_row(self):
        rows = [r for r in self._results() if r.model == "nb"]
        text, plot = report(rows, "table3")
        assert text.count("\n| nb") == 1
        assert "knn" not in text

    def test_table3_bolds_best(self):
        text, _ = report(self._results(), "table3")
        assert "**0.95**" in text

    def test_table4_macro_average(self):
        _, plot = report(self._results(), "table4")
        knn_full = [r for r in plot if r["model"] == "knn" and r["k"] == "full"]
        assert knn_full[0]["macro_f1"] == pytest.approx((0.95 + 0.75) / 2)

    def test_excluded_rendered_with_dash_and_footnote(self):
        rows = self._results()
        rows.append(RunResult(model="runner", dataset="d1", k="full", seed=0,
                              metrics=CellMetrics(f1=0, precision=0, recall=0),
                              status="excluded", notes="budget"))
        text, _ = report(rows, "table3")
        assert "—" in text
        assert "excluded: runner/d1" in text

    def test_table5_requires_all_k(self):
        text, plot = report(self._results(), "table5")
        assert plot == []
        assert "missing sample-size cells" in text

    def test_table5_from_complete_rows(self):
        rows = []
        for i, k in enumerate((4, 8, 16, 32, 64, 128, 256, "full")):
            rows.append(RunResult(model="nb", dataset="d", k=k, seed=0,
                                  metrics=CellMetrics(f1=0.1 * (i + 1), precision=0, recall=0)))
        _, plot = report(rows, "table5")
        assert plot[0]["mean_f1"] == pytest.approx(0.45)

    def test_runtime_rows(self):
        _, plot = report(self._results(), "runtime")
        assert {r["model"] for r in plot} == {"nb", "knn"}
        assert all(r["train_time_s"] == 1.0 for r in plot)

    def test_empty_results_error(self):
        with pytest.raises(ReportError):
            report([], "table3")

    def test_unknown_style_error(self):
        with pytest.raises(ReportError):
            report(self._results(), "table9")

    def test_plot_rows_to_csv(self):
        csv = plot_rows_to_csv([{"a": 1, "b": "x"}, {"a": 2, "b": "y"}])
        assert csv == "a,b\n1,x\n2,y\n"
