import json

import pytest

from conftest import make_sms_file, synthetic_messages
from spambench.cli import main
from spambench.corpus import load_canonical, save_canonical


@pytest.fixture
def sms_root(tmp_path):
    rows = [("ham", f"meeting notes number {i} for the team") for i in range(30)]
    rows += [("spam", f"win free cash prize {i} click now") for i in range(10)]
    return make_sms_file(tmp_path / "sms", rows)


@pytest.fixture
def canonical(tmp_path):
    path = tmp_path / "synth.canonical.jsonl"
    save_canonical(synthetic_messages(160, seed=2), path)
    return path


def test_ingest_writes_canonical_and_prints_stats(sms_root, tmp_path, capsys):
    out = tmp_path / "sms.canonical.jsonl"
    assert main(["ingest", "--source", "sms", "--root", str(sms_root), "--out", str(out)]) == 0
    stats = json.loads(capsys.readouterr().out.splitlines()[0])
    assert stats["total"] == 40 and stats["spam"] == 10
    assert len(load_canonical(out)) == 40


def test_ingest_missing_root_is_validation_error(tmp_path, capsys):
    rc = main(["ingest", "--source", "sms", "--root", str(tmp_path / "nope"), "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_preprocess_emits_token_lines(canonical, tmp_path):
    out = tmp_path / "tokens.jsonl"
    assert main(["preprocess", "--in", str(canonical), "--out", str(out)]) == 0
    lines = [json.loads(l) for l in out.read_text().splitlines()]
    assert len(lines) == len(load_canonical(canonical))
    assert set(lines[0]) == {"id", "tokens"}


def test_split_writes_id_files(canonical, tmp_path):
    out_dir = tmp_path / "splits"
    assert main(["split", "--corpus", str(canonical), "--seed", "1", "--out-dir", str(out_dir)]) == 0
    train_ids = (out_dir / "train_ids.txt").read_text().splitlines()
    test_ids = (out_dir / "test_ids.txt").read_text().splitlines()
    messages = load_canonical(canonical)
    assert len(train_ids) + len(test_ids) == len(messages)
    assert not set(train_ids) & set(test_ids)


def test_run_and_report_round_trip(canonical, tmp_path, capsys):
    config = {
        "datasets": ["synth"],
        "models": ["nb", "knn"],
        "corpus_dir": str(canonical.parent),
        "results_path": str(tmp_path / "results.jsonl"),
        "k_values": [4, "full"],
        "seeds": [0],
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    assert main(["run", "--config", str(config_path)]) == 0
    report_path = tmp_path / "report.md"
    plot_path = tmp_path / "plot.csv"
    assert main(["report", "--results", config["results_path"], "--style", "table4",
                 "--out", str(report_path), "--plot-data", str(plot_path)]) == 0
    assert "| nb |" in report_path.read_text()
    assert plot_path.read_text().startswith("model,k,macro_f1")


def test_run_with_bad_config_is_validation_error(tmp_path, capsys):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"datasets": [], "models": ["nb"],
                                       "corpus_dir": ".", "results_path": "r"}))
    assert main(["run", "--config", str(config_path)]) == 1


def test_export_score_cycle(canonical, tmp_path, capsys):
    out_dir = tmp_path / "exchange"
    assert main(["export-splits", "--corpus", str(canonical), "--dataset", "synth",
                 "--k", "8", "--seed", "0", "--out-dir", str(out_dir)]) == 0
    capsys.readouterr()
    test_rows = [json.loads(l) for l in (out_dir / "test.jsonl").read_text().splitlines()]
    messages = {m.id: m for m in load_canonical(canonical)}
    pred_path = tmp_path / "preds.jsonl"
    with pred_path.open("w") as fh:
        for row in test_rows:
            fh.write(json.dumps({"id": row["id"], "predicted": messages[row["id"]].label}) + "\n")
    timing_path = tmp_path / "timing.json"
    timing_path.write_text(json.dumps({"train_time_s": 2.0, "infer_time_s": 0.5}))
    results_path = tmp_path / "results.jsonl"
    assert main(["score-predictions", "--corpus", str(canonical), "--dataset", "synth",
                 "--k", "8", "--seed", "0", "--predictions", str(pred_path),
                 "--timing", str(timing_path), "--model", "echo",
                 "--results", str(results_path)]) == 0
    record = json.loads(capsys.readouterr().out.splitlines()[0])
    assert record["f1"] == 1.0
    assert json.loads(results_path.read_text().splitlines()[0])["model"] == "echo"


def test_score_predictions_rejects_gap(canonical, tmp_path, capsys):
    out_dir = tmp_path / "exchange"
    main(["export-splits", "--corpus", str(canonical), "--dataset", "synth",
          "--k", "8", "--seed", "0", "--out-dir", str(out_dir)])
    pred_path = tmp_path / "preds.jsonl"
    pred_path.write_text(json.dumps({"id": "m00000", "predicted": 1}) + "\n")
    rc = main(["score-predictions", "--corpus", str(canonical), "--dataset", "synth",
               "--k", "8", "--seed", "0", "--predictions", str(pred_path), "--model", "bad"])
    assert rc == 1


def test_fit_predict_cycle(canonical, tmp_path, capsys):
    model_path = tmp_path / "model.json"
    assert main(["fit", "--corpus", str(canonical), "--model", "nb",
                 "--budget", "200", "--out", str(model_path)]) == 0
    preds_path = tmp_path / "preds.jsonl"
    assert main(["predict", "--model-file", str(model_path), "--in", str(canonical),
                 "--out", str(preds_path)]) == 0
    rows = [json.loads(l) for l in preds_path.read_text().splitlines()]
    assert len(rows) == len(load_canonical(canonical))
    assert all(r["predicted"] in (0, 1) for r in rows)


def test_tune_features_prints_candidates(canonical, capsys):
    rc = main(["tune-features", "--corpus", str(canonical), "--model", "nb",
               "--grid", "5,50"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "features=5" in out and "features=50" in out and "best=" in out
