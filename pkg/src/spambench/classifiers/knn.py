"""1-nearest-neighbor with Euclidean distance over sparse vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

_BATCH = 512


@dataclass(frozen=True)
class KNNParams:
    train: sp.csr_matrix
    labels: np.ndarray


def fit_knn(X: sp.csr_matrix, y: np.ndarray, hyper: dict, seed: int) -> KNNParams:
    if int(hyper["n_neighbors"]) != 1:
        raise ValueError("only K=1 is supported")
    return KNNParams(train=X.copy(), labels=y.copy())


def score_knn(params: KNNParams, X: sp.csr_matrix) -> np.ndarray:
    """Nearest-ham distance minus nearest-spam distance (positive means spam is closer)."""
    train = params.train
    sq_train = np.asarray(train.multiply(train).sum(axis=1)).ravel()
    ham = params.labels == 0
    spam = params.labels == 1
    scores = np.empty(X.shape[0])
    for start in range(0, X.shape[0], _BATCH):
        chunk = X[start : start + _BATCH]
        sq_chunk = np.asarray(chunk.multiply(chunk).sum(axis=1)).ravel()
        d2 = sq_chunk[:, None] - 2.0 * (chunk @ train.T).toarray() + sq_train[None, :]
        np.maximum(d2, 0.0, out=d2)
        d_ham = d2[:, ham].min(axis=1)
        d_spam = d2[:, spam].min(axis=1)
        scores[start : start + chunk.shape[0]] = np.sqrt(d_ham) - np.sqrt(d_spam)
    return scores


def params_to_dict(params: KNNParams) -> dict:
    coo = params.train.tocoo()
    return {
        "shape": list(params.train.shape),
        "rows": coo.row.tolist(),
        "cols": coo.col.tolist(),
        "values": coo.data.tolist(),
        "labels": params.labels.tolist(),
    }


def params_from_dict(doc: dict) -> KNNParams:
    train = sp.coo_matrix(
        (doc["values"], (doc["rows"], doc["cols"])), shape=tuple(doc["shape"])
    ).tocsr()
    return KNNParams(train=train, labels=np.asarray(doc["labels"], dtype=np.int64))
