"""Experiment orchestration: config, run-matrix execution, results store, exchange scoring.

The results store is an append-only line-delimited file keyed by
(model, dataset, k, seed); re-running a cell never replaces the stored row,
it is reported as a conflict. External model runners interact with the
harness purely through files: exported train/test splits in, predictions and
timing out, scored by the same metrics code as in-process models.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from .classifiers import ALGORITHMS, ClassifierSpec, fit, predict
from .corpus import LabeledMessage, load_canonical
from .features import fit_vocabulary, transform_corpus
from .metrics import CellMetrics, score, time_block
from .protocol import K_FULL, SplitSpec, sample_few_shot, split, tune_feature_count
from .textprep import TokenizedDoc, preprocess

DEFAULT_K_VALUES: tuple[int | str, ...] = (4, 8, 16, 32, 64, 128, 256, K_FULL)
DEFAULT_SEEDS = (0, 1, 2, 3, 4)
DEFAULT_FEATURE_GRID = (150, 500, 1000, 2000, 3000)
DEFAULT_FEATURE_BUDGETS = {
    "nb": 1000,
    "lr": 500,
    "knn": 150,
    "svm": 3000,
    "xgb_like": 2000,
    "lgbm_like": 3000,
}


class ConfigError(ValueError):
    pass


class ValidationError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    datasets: list[str]
    models: list[str]
    corpus_dir: Path
    results_path: Path
    k_values: list[int | str] = field(default_factory=lambda: list(DEFAULT_K_VALUES))
    seeds: list[int] = field(default_factory=lambda: list(DEFAULT_SEEDS))
    feature_grid: list[int] = field(default_factory=lambda: list(DEFAULT_FEATURE_GRID))
    feature_budgets: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_FEATURE_BUDGETS))
    hyperparameters: dict[str, dict[str, Any]] = field(default_factory=dict)
    l2_normalize: bool = True
    tune_features: bool = False
    train_fraction: float = 0.8

    def __post_init__(self):
        self.corpus_dir = Path(self.corpus_dir)
        self.results_path = Path(self.results_path)
        if not self.datasets:
            raise ConfigError("config needs at least one dataset")
        if not self.models:
            raise ConfigError("config needs at least one model")
        if not self.k_values:
            raise ConfigError("config needs at least one k value")
        for model in self.models:
            if model not in ALGORITHMS:
                raise ConfigError(f"unknown model {model!r}; expected one of {ALGORITHMS}")
        for k in self.k_values:
            if isinstance(k, str):
                if k.lower() != K_FULL:
                    raise ConfigError(f"k values must be positive ints or '{K_FULL}', got {k!r}")
            elif k <= 0:
                raise ConfigError(f"k values must be positive, got {k}")
        for dataset in self.datasets:
            if not self.canonical_path(dataset).is_file():
                raise ConfigError(
                    f"canonical corpus for {dataset!r} not found at {self.canonical_path(dataset)}"
                )

    def canonical_path(self, dataset: str) -> Path:
        return self.corpus_dir / f"{dataset}.canonical.jsonl"

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {
            "datasets", "models", "corpus_dir", "results_path", "k_values", "seeds",
            "feature_grid", "feature_budgets", "hyperparameters", "l2_normalize",
            "tune_features", "train_fraction",
        }
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"datasets", "models", "corpus_dir", "results_path"} - set(doc)
        if missing:
            raise ConfigError(f"missing required config keys: {sorted(missing)}")
        return cls(**doc)


@dataclass(frozen=True)
class RunResult:
    model: str
    dataset: str
    k: int | str
    seed: int
    metrics: CellMetrics
    status: str = "ok"
    notes: str = ""

    @property
    def key(self) -> tuple[str, str, str, int]:
        return (self.model, self.dataset, str(self.k), self.seed)


def result_to_record(r: RunResult) -> dict:
    return {
        "model": r.model,
        "dataset": r.dataset,
        "k": r.k,
        "seed": r.seed,
        "status": r.status,
        "f1": r.metrics.f1,
        "precision": r.metrics.precision,
        "recall": r.metrics.recall,
        "train_time_s": r.metrics.train_time_s,
        "infer_time_s": r.metrics.infer_time_s,
        "notes": r.notes,
    }


def record_to_result(rec: dict) -> RunResult:
    return RunResult(
        model=rec["model"],
        dataset=rec["dataset"],
        k=rec["k"],
        seed=int(rec["seed"]),
        status=rec.get("status", "ok"),
        notes=rec.get("notes", ""),
        metrics=CellMetrics(
            f1=float(rec["f1"]),
            precision=float(rec["precision"]),
            recall=float(rec["recall"]),
            train_time_s=float(rec.get("train_time_s", 0.0)),
            infer_time_s=float(rec.get("infer_time_s", 0.0)),
        ),
    )


class ResultsStore:
    """Append-only JSONL store; one row per (model, dataset, k, seed)."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.conflicts: list[tuple] = []
        self._keys = {r.key for r in self.load(self.path)} if self.path.exists() else set()

    def append(self, result: RunResult) -> bool:
        if result.key in self._keys:
            self.conflicts.append(result.key)
            warnings.warn(f"cell {result.key} already recorded; keeping the existing row", stacklevel=2)
            return False
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(result_to_record(result)) + "\n")
        self._keys.add(result.key)
        return True

    @staticmethod
    def load(path: str | Path) -> list[RunResult]:
        path = Path(path)
        if not path.exists():
            return []
        out = []
        with path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    out.append(record_to_result(json.loads(line)))
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise ValidationError(f"{path}:{lineno}: malformed result record: {exc}") from exc
        return out


class _DatasetContext:
    """Per-dataset caches shared across the cells of one run."""

    def __init__(self, messages: list[LabeledMessage], config: ExperimentConfig):
        self.messages = messages
        self.labels = [m.label for m in messages]
        self.docs: list[TokenizedDoc] = [preprocess(m.id, m.text) for m in messages]
        self.config = config
        self._splits: dict[int, tuple[list[int], list[int]]] = {}
        self._matrices: dict[tuple, tuple] = {}

    def split_for(self, seed: int) -> tuple[list[int], list[int]]:
        if seed not in self._splits:
            spec = SplitSpec(train_fraction=self.config.train_fraction, seed=seed)
            self._splits[seed] = split(self.labels, spec)
        return self._splits[seed]

    def matrices_for(self, seed: int, k: int | str, budget: int):
        key = (seed, str(k), budget)
        if key not in self._matrices:
            train_idx, test_idx = self.split_for(seed)
            sample = sample_few_shot(train_idx, self.labels, k, seed)
            vocab = fit_vocabulary([self.docs[i] for i in sample.indices], budget)
            X_train = transform_corpus(
                [self.docs[i] for i in sample.indices], vocab, self.config.l2_normalize
            )
            X_test = transform_corpus(
                [self.docs[i] for i in test_idx], vocab, self.config.l2_normalize
            )
            y_train = [self.labels[i] for i in sample.indices]
            y_test = [self.labels[i] for i in test_idx]
            self._matrices[key] = (vocab, X_train, y_train, X_test, y_test)
        return self._matrices[key]


def _budget_for(ctx: _DatasetContext, model: str, seed: int, cache: dict) -> int:
    config = ctx.config
    if not config.tune_features:
        return config.feature_budgets[model]
    key = (model, seed)
    if key not in cache:
        train_idx, _ = ctx.split_for(seed)
        spec = ClassifierSpec(algorithm=model, hyperparameters=config.hyperparameters.get(model, {}), seed=seed)
        best, _ = tune_feature_count(
            [ctx.docs[i] for i in train_idx],
            [ctx.labels[i] for i in train_idx],
            config.feature_grid,
            spec,
            seed=seed,
            l2_normalize=config.l2_normalize,
        )
        cache[key] = best
    return cache[key]


def run_matrix(config: ExperimentConfig, verbose: bool = False) -> Path:
    """Execute every (dataset, model, k, seed) cell; failures are recorded, never raised."""
    store = ResultsStore(config.results_path)
    for dataset in config.datasets:
        ctx = _DatasetContext(load_canonical(config.canonical_path(dataset)), config)
        tuned: dict = {}
        for seed in config.seeds:
            for k in config.k_values:
                for model in config.models:
                    result = _run_cell(ctx, dataset, model, k, seed, tuned)
                    store.append(result)
                    if verbose:
                        rec = result_to_record(result)
                        print(
                            f"{dataset} {model} k={k} seed={seed}: "
                            f"{result.status} f1={rec['f1']:.4f}"
                        )
    return config.results_path


def _run_cell(
    ctx: _DatasetContext, dataset: str, model: str, k: int | str, seed: int, tuned: dict
) -> RunResult:
    try:
        budget = _budget_for(ctx, model, seed, tuned)
        vocab, X_train, y_train, X_test, y_test = ctx.matrices_for(seed, k, budget)
        spec = ClassifierSpec(
            algorithm=model,
            hyperparameters=ctx.config.hyperparameters.get(model, {}),
            seed=seed,
        )
        trained, train_time = time_block(
            lambda: fit(spec, X_train, y_train, n_features=len(vocab))
        )
        preds, infer_time = time_block(lambda: predict(trained, X_test))
        _, cell = score(y_test, preds)
        cell.train_time_s = train_time
        cell.infer_time_s = infer_time
        return RunResult(
            model=model, dataset=dataset, k=k, seed=seed, metrics=cell,
            notes=f"budget={budget}",
        )
    except Exception as exc:  # noqa: BLE001 - cell isolation is the contract
        return RunResult(
            model=model, dataset=dataset, k=k, seed=seed,
            metrics=CellMetrics(f1=0.0, precision=0.0, recall=0.0),
            status="failed", notes=f"{type(exc).__name__}: {exc}",
        )


# ---------------------------------------------------------------------------
# Prediction-exchange protocol
# ---------------------------------------------------------------------------


def export_splits(
    messages: Sequence[LabeledMessage],
    dataset: str,
    k: int | str,
    seed: int,
    out_dir: str | Path,
    train_fraction: float = 0.8,
) -> tuple[Path, Path]:
    """Write the few-shot train sample (with labels) and the test split (labels withheld)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = [m.label for m in messages]
    train_idx, test_idx = split(labels, SplitSpec(train_fraction=train_fraction, seed=seed))
    sample = sample_few_shot(train_idx, labels, k, seed)
    train_path = out_dir / "train.jsonl"
    test_path = out_dir / "test.jsonl"
    with train_path.open("w", encoding="utf-8") as fh:
        for i in sample.indices:
            m = messages[i]
            fh.write(json.dumps({"id": m.id, "text": m.text, "label": m.label}, ensure_ascii=False) + "\n")
    with test_path.open("w", encoding="utf-8") as fh:
        for i in test_idx:
            m = messages[i]
            fh.write(json.dumps({"id": m.id, "text": m.text}, ensure_ascii=False) + "\n")
    manifest = {
        "dataset": dataset,
        "k": sample.k,
        "seed": seed,
        "train_fraction": train_fraction,
        "n_train": len(sample.indices),
        "n_test": len(test_idx),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return train_path, test_path


def read_predictions(path: str | Path) -> dict[str, int]:
    """Parse a predictions file: one {"id", "predicted", ["score"]} record per line."""
    path = Path(path)
    preds: dict[str, int] = {}
    duplicates: list[str] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                msg_id = rec["id"]
                predicted = int(rec["predicted"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"{path}:{lineno}: malformed prediction record: {exc}") from exc
            if predicted not in (0, 1):
                raise ValidationError(f"{path}:{lineno}: predicted label must be 0 or 1, got {predicted}")
            if msg_id in preds:
                duplicates.append(msg_id)
            preds[msg_id] = predicted
    if duplicates:
        raise ValidationError(f"{path}: duplicate prediction ids: {sorted(set(duplicates))[:10]}")
    return preds


def read_timing(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    for field_name in ("train_time_s", "infer_time_s"):
        if field_name not in doc:
            raise ValidationError(f"{path}: timing file missing {field_name!r}")
    return doc


def score_predictions(
    messages: Sequence[LabeledMessage],
    dataset: str,
    k: int | str,
    seed: int,
    predictions_path: str | Path,
    timing_path: str | Path | None,
    model: str,
    train_fraction: float = 0.8,
) -> RunResult:
    """Score an external runner's predictions against the withheld test labels."""
    labels = [m.label for m in messages]
    train_idx, test_idx = split(labels, SplitSpec(train_fraction=train_fraction, seed=seed))
    sample_few_shot(train_idx, labels, k, seed)  # validates k against this split
    preds = read_predictions(predictions_path)
    test_ids = [messages[i].id for i in test_idx]
    missing = [i for i in test_ids if i not in preds]
    unknown = sorted(set(preds) - set(test_ids))
    if missing or unknown:
        raise ValidationError(
            f"{predictions_path}: prediction ids do not match the test split "
            f"(missing {len(missing)}: {missing[:5]}; unknown {len(unknown)}: {unknown[:5]})"
        )
    y_true = [labels[i] for i in test_idx]
    y_pred = [preds[messages[i].id] for i in test_idx]
    _, cell = score(y_true, y_pred)
    status, notes = "ok", ""
    if timing_path is not None:
        timing = read_timing(timing_path)
        cell.train_time_s = float(timing["train_time_s"])
        cell.infer_time_s = float(timing["infer_time_s"])
        status = timing.get("status", "ok")
        if status not in ("ok", "failed", "excluded"):
            raise ValidationError(f"{timing_path}: invalid status {status!r}")
        notes = timing.get("notes", "")
        extras = {k2: v for k2, v in timing.items()
                  if k2 not in ("train_time_s", "infer_time_s", "status", "notes")}
        cell.extras.update(extras)
    return RunResult(
        model=model, dataset=dataset, k=k, seed=seed, metrics=cell, status=status, notes=notes
    )


def write_predictions(path: str | Path, rows: Iterable[tuple[str, int, float | None]]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for msg_id, predicted, score_value in rows:
            rec: dict[str, Any] = {"id": msg_id, "predicted": int(predicted)}
            if score_value is not None:
                rec["score"] = float(score_value)
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def write_timing(path: str | Path, train_time_s: float, infer_time_s: float, **extras) -> None:
    doc = {"train_time_s": train_time_s, "infer_time_s": infer_time_s, **extras}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
