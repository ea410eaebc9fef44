"""Command-line entry points for the benchmark workbench.

Exit codes: 0 success, 1 validation/config/input error, 2 execution failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import classifiers, corpus, features, harness, protocol, reports
from .metrics import time_block
from .textprep import preprocess


def _parse_k(value: str) -> int | str:
    return protocol.K_FULL if value.lower() == protocol.K_FULL else int(value)


def _cmd_ingest(args) -> int:
    messages, stats = corpus.ingest(args.source, args.root)
    corpus.save_canonical(messages, args.out)
    print(json.dumps(asdict(stats)))
    print(
        f"kept {len(messages)} messages "
        f"(post-clean spam rate {corpus.spam_rate(messages):.4f}) -> {args.out}"
    )
    return 0


def _cmd_preprocess(args) -> int:
    messages = corpus.load_canonical(getattr(args, "in"))
    with Path(args.out).open("w", encoding="utf-8") as fh:
        for m in messages:
            doc = preprocess(m.id, m.text)
            fh.write(json.dumps({"id": doc.doc_id, "tokens": list(doc.tokens)}, ensure_ascii=False) + "\n")
    print(f"preprocessed {len(messages)} documents -> {args.out}")
    return 0


def _cmd_split(args) -> int:
    messages = corpus.load_canonical(args.corpus)
    spec = protocol.SplitSpec(train_fraction=args.train_fraction, seed=args.seed)
    train_idx, test_idx = protocol.split([m.label for m in messages], spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, idx in (("train_ids.txt", train_idx), ("test_ids.txt", test_idx)):
        (out_dir / name).write_text(
            "".join(messages[i].id + "\n" for i in idx), encoding="utf-8"
        )
    print(f"train={len(train_idx)} test={len(test_idx)} -> {out_dir}")
    return 0


def _cmd_tune_features(args) -> int:
    messages = corpus.load_canonical(args.corpus)
    spec_obj = protocol.SplitSpec(train_fraction=args.train_fraction, seed=args.seed)
    labels = [m.label for m in messages]
    train_idx, _ = protocol.split(labels, spec_obj)
    docs = [preprocess(messages[i].id, messages[i].text) for i in train_idx]
    grid = [int(g) for g in args.grid.split(",")]
    clf_spec = classifiers.ClassifierSpec(algorithm=args.model, seed=args.seed)
    best, by_candidate = protocol.tune_feature_count(
        docs, [labels[i] for i in train_idx], grid, clf_spec, seed=args.seed
    )
    for candidate in sorted(by_candidate):
        print(f"features={candidate}: mean F1 {by_candidate[candidate]:.4f}")
    print(f"best={best}")
    return 0


def _cmd_run(args) -> int:
    config = harness.ExperimentConfig.from_file(args.config)
    path = harness.run_matrix(config, verbose=args.verbose)
    print(f"results -> {path}")
    return 0


def _cmd_export_splits(args) -> int:
    messages = corpus.load_canonical(args.corpus)
    train_path, test_path = harness.export_splits(
        messages, args.dataset, _parse_k(args.k), args.seed, args.out_dir,
        train_fraction=args.train_fraction,
    )
    print(f"train -> {train_path}\ntest -> {test_path}")
    return 0


def _cmd_score_predictions(args) -> int:
    messages = corpus.load_canonical(args.corpus)
    result = harness.score_predictions(
        messages, args.dataset, _parse_k(args.k), args.seed,
        args.predictions, args.timing, args.model, train_fraction=args.train_fraction,
    )
    print(json.dumps(harness.result_to_record(result)))
    if args.results:
        harness.ResultsStore(args.results).append(result)
        print(f"appended -> {args.results}")
    return 0


def _cmd_report(args) -> int:
    results = harness.ResultsStore.load(args.results)
    text, plot_rows = reports.report(results, args.style)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"report -> {args.out}")
    else:
        print(text)
    if args.plot_data:
        Path(args.plot_data).write_text(reports.plot_rows_to_csv(plot_rows), encoding="utf-8")
        print(f"plot data -> {args.plot_data}")
    return 0


def _cmd_fit(args) -> int:
    messages = corpus.load_canonical(args.corpus)
    labels = [m.label for m in messages]
    train_idx, _ = protocol.split(
        labels, protocol.SplitSpec(train_fraction=args.train_fraction, seed=args.seed)
    )
    sample = protocol.sample_few_shot(train_idx, labels, _parse_k(args.k), args.seed)
    docs = [preprocess(messages[i].id, messages[i].text) for i in sample.indices]
    vocab = features.fit_vocabulary(docs, args.budget)
    X = features.transform_corpus(docs, vocab)
    spec = classifiers.ClassifierSpec(algorithm=args.model, seed=args.seed)
    model, train_time = time_block(
        lambda: classifiers.fit(spec, X, [labels[i] for i in sample.indices], n_features=len(vocab))
    )
    classifiers.save_model(model, args.out)
    features.save_vocabulary(vocab, str(args.out) + ".vocab")
    print(f"fitted {args.model} on {len(docs)} docs in {train_time:.3f}s -> {args.out}")
    return 0


def _cmd_predict(args) -> int:
    model = classifiers.load_model(args.model_file)
    vocab = features.load_vocabulary(str(args.model_file) + ".vocab")
    messages = corpus.load_canonical(getattr(args, "in"))
    docs = [preprocess(m.id, m.text) for m in messages]
    X = features.transform_corpus(docs, vocab)
    preds, infer_time = time_block(lambda: classifiers.predict(model, X))
    scores = classifiers.predict_score(model, X)
    harness.write_predictions(args.out, zip((m.id for m in messages), preds, scores))
    print(f"predicted {len(messages)} docs in {infer_time:.3f}s -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spambench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a raw dataset tree into the canonical format")
    p.add_argument("--source", required=True, choices=corpus.SOURCES)
    p.add_argument("--root", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("preprocess", help="tokenize/stem a canonical corpus")
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("split", help="write train/test id lists for a canonical corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("tune-features", help="cross-validate the tf-idf feature budget")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True, choices=classifiers.ALGORITHMS)
    p.add_argument("--grid", default=",".join(str(g) for g in harness.DEFAULT_FEATURE_GRID))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.set_defaults(func=_cmd_tune_features)

    p = sub.add_parser("run", help="execute the experiment matrix from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("export-splits", help="write exchange-format train/test files")
    p.add_argument("--corpus", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_export_splits)

    p = sub.add_parser("score-predictions", help="score an external runner's prediction file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--predictions", required=True)
    p.add_argument("--timing")
    p.add_argument("--model", required=True)
    p.add_argument("--results", help="append the scored cell to this results file")
    p.set_defaults(func=_cmd_score_predictions)

    p = sub.add_parser("report", help="render a result table from a results file")
    p.add_argument("--results", required=True)
    p.add_argument("--style", required=True, choices=reports.REPORT_STYLES)
    p.add_argument("--out")
    p.add_argument("--plot-data")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("fit", help="train one model on a corpus split (debugging)")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True, choices=classifiers.ALGORITHMS)
    p.add_argument("--k", default=protocol.K_FULL)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("predict", help="predict with a saved model (debugging)")
    p.add_argument("--model-file", required=True)
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_predict)

    return parser


_VALIDATION_ERRORS = (
    corpus.IngestError,
    corpus.CanonicalParseError,
    features.FeatureError,
    protocol.ProtocolError,
    classifiers.ClassifierError,
    harness.ConfigError,
    harness.ValidationError,
    reports.ReportError,
    FileNotFoundError,
    json.JSONDecodeError,
    ValueError,
)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"execution failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
