"""Six baseline classifiers behind one fit/predict interface.

Algorithms: multinomial Naive Bayes, L2 logistic regression, 1-NN, sigmoid-
kernel SVM trained by SMO, and two gradient-boosted tree modes (level-wise
and leaf-wise histogram trees). Every predictor is deterministic given its
spec seed; single-class training sets yield a constant predictor.

Score conventions (label 1 iff score strictly above the threshold, ties to ham):
  nb        posterior log-odds, threshold 0
  lr        sigmoid probability, threshold 0.5
  knn       nearest-ham minus nearest-spam distance, threshold 0
  svm       kernel decision value, threshold 0
  xgb_like / lgbm_like   boosted probability, threshold 0.5
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import scipy.sparse as sp

from ..features import FeatureVector
from . import gbdt, knn, logistic, naive_bayes, svm

ALGORITHMS = ("nb", "lr", "knn", "svm", "xgb_like", "lgbm_like")

DEFAULT_HYPERPARAMETERS: dict[str, dict[str, Any]] = {
    "nb": {"alpha": 1.0},
    "lr": {"C": 1.0, "tol": 1e-6, "max_iter": 1000},
    "knn": {"n_neighbors": 1},
    "svm": {"C": 1.0, "gamma": 1.0, "coef0": 0.0, "tol": 1e-3, "max_steps": 5_000_000},
    "xgb_like": {
        "learning_rate": 0.01,
        "n_estimators": 150,
        "max_depth": 6,
        "min_child_weight": 1.0,
        "min_samples_leaf": 1,
        "reg_lambda": 1.0,
        "max_bins": 255,
    },
    "lgbm_like": {
        "learning_rate": 0.01,
        "n_estimators": 100,
        "num_leaves": 20,
        "max_depth": 0,
        "min_child_weight": 1e-3,
        "min_samples_leaf": 20,
        "reg_lambda": 1.0,
        "max_bins": 255,
    },
}

_THRESHOLDS = {"nb": 0.0, "lr": 0.5, "knn": 0.0, "svm": 0.0, "xgb_like": 0.5, "lgbm_like": 0.5}


class ClassifierError(ValueError):
    pass


@dataclass(frozen=True)
class ClassifierSpec:
    algorithm: str
    hyperparameters: dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ClassifierError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        merged = dict(DEFAULT_HYPERPARAMETERS[self.algorithm])
        unknown = set(self.hyperparameters) - set(merged)
        if unknown:
            raise ClassifierError(f"{self.algorithm}: unknown hyperparameters {sorted(unknown)}")
        merged.update(self.hyperparameters)
        object.__setattr__(self, "hyperparameters", merged)


@dataclass(frozen=True)
class TrainedModel:
    spec: ClassifierSpec
    n_features: int
    classes_seen: tuple[int, ...]
    params: Any
    vocab_ref: str | None = None

    @property
    def threshold(self) -> float:
        return _THRESHOLDS[self.spec.algorithm]


@dataclass(frozen=True)
class ConstantParams:
    label: int


def to_csr(X: Sequence[FeatureVector], n_features: int) -> sp.csr_matrix:
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for vec in X:
        for idx in sorted(vec.entries):
            if idx < 0 or idx >= n_features:
                raise ClassifierError(
                    f"vocabulary mismatch: doc {vec.doc_id!r} has feature index {idx} "
                    f"outside [0, {n_features})"
                )
            indices.append(idx)
            data.append(vec.entries[idx])
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(X), n_features),
    )


def _infer_n_features(X: Sequence[FeatureVector]) -> int:
    top = -1
    for vec in X:
        if vec.entries:
            top = max(top, max(vec.entries))
    return top + 1


_FITTERS = {
    "nb": naive_bayes.fit_nb,
    "lr": logistic.fit_lr,
    "knn": knn.fit_knn,
    "svm": svm.fit_svm,
    "xgb_like": gbdt.fit_level_wise,
    "lgbm_like": gbdt.fit_leaf_wise,
}

_SCORERS = {
    "nb": naive_bayes.score_nb,
    "lr": logistic.score_lr,
    "knn": knn.score_knn,
    "svm": svm.score_svm,
    "xgb_like": gbdt.score_gbdt,
    "lgbm_like": gbdt.score_gbdt,
}


def fit(
    spec: ClassifierSpec,
    X: Sequence[FeatureVector],
    y: Sequence[int],
    n_features: int | None = None,
    vocab_ref: str | None = None,
) -> TrainedModel:
    if len(X) != len(y):
        raise ClassifierError(f"dimension error: {len(X)} vectors vs {len(y)} labels")
    if len(X) == 0:
        raise ClassifierError("empty training set")
    labels = set(y)
    if not labels <= {0, 1}:
        raise ClassifierError(f"non-binary labels present: {sorted(labels - {0, 1})}")
    if n_features is None:
        n_features = max(_infer_n_features(X), 1)
    classes_seen = tuple(sorted(labels))
    if len(classes_seen) == 1:
        params: Any = ConstantParams(label=classes_seen[0])
    else:
        matrix = to_csr(X, n_features)
        y_arr = np.asarray(y, dtype=np.int64)
        params = _FITTERS[spec.algorithm](matrix, y_arr, spec.hyperparameters, spec.seed)
    return TrainedModel(
        spec=spec,
        n_features=n_features,
        classes_seen=classes_seen,
        params=params,
        vocab_ref=vocab_ref,
    )


def predict_score(model: TrainedModel, X: Sequence[FeatureVector]) -> list[float]:
    if isinstance(model.params, ConstantParams):
        return [float(model.params.label)] * len(X)
    matrix = to_csr(X, model.n_features)
    scores = _SCORERS[model.spec.algorithm](model.params, matrix)
    return [float(s) for s in scores]


def predict(model: TrainedModel, X: Sequence[FeatureVector]) -> list[int]:
    threshold = model.threshold
    return [1 if s > threshold else 0 for s in predict_score(model, X)]


def save_model(model: TrainedModel, path: str | Path) -> None:
    if isinstance(model.params, ConstantParams):
        params_doc: dict[str, Any] = {"kind": "constant", "label": model.params.label}
    else:
        module = {"nb": naive_bayes, "lr": logistic, "knn": knn, "svm": svm,
                  "xgb_like": gbdt, "lgbm_like": gbdt}[model.spec.algorithm]
        params_doc = {"kind": model.spec.algorithm, **module.params_to_dict(model.params)}
    doc = {
        "format_version": 1,
        "algorithm": model.spec.algorithm,
        "hyperparameters": model.spec.hyperparameters,
        "seed": model.spec.seed,
        "n_features": model.n_features,
        "classes_seen": list(model.classes_seen),
        "vocab_ref": model.vocab_ref,
        "params": params_doc,
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_model(path: str | Path) -> TrainedModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format_version") != 1:
        raise ClassifierError(f"{path}: unsupported model format {doc.get('format_version')!r}")
    spec = ClassifierSpec(
        algorithm=doc["algorithm"], hyperparameters=doc["hyperparameters"], seed=doc["seed"]
    )
    params_doc = doc["params"]
    if params_doc["kind"] == "constant":
        params: Any = ConstantParams(label=int(params_doc["label"]))
    else:
        module = {"nb": naive_bayes, "lr": logistic, "knn": knn, "svm": svm,
                  "xgb_like": gbdt, "lgbm_like": gbdt}[doc["algorithm"]]
        params = module.params_from_dict(params_doc)
    return TrainedModel(
        spec=spec,
        n_features=int(doc["n_features"]),
        classes_seen=tuple(doc["classes_seen"]),
        params=params,
        vocab_ref=doc.get("vocab_ref"),
    )
