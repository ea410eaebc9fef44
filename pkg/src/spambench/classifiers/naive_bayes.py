"""Multinomial Naive Bayes over nonnegative (possibly fractional) feature weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class NBParams:
    class_log_prior: np.ndarray  # shape (2,)
    feature_log_prob: np.ndarray  # shape (2, n_features)


def fit_nb(X: sp.csr_matrix, y: np.ndarray, hyper: dict, seed: int) -> NBParams:
    alpha = float(hyper["alpha"])
    if X.nnz and X.data.min() < 0:
        raise ValueError("naive bayes requires nonnegative feature weights")
    n = X.shape[0]
    class_log_prior = np.empty(2)
    feature_log_prob = np.empty((2, X.shape[1]))
    for c in (0, 1):
        mask = y == c
        class_log_prior[c] = np.log(mask.sum() / n)
        counts = np.asarray(X[mask].sum(axis=0)).ravel() + alpha
        feature_log_prob[c] = np.log(counts) - np.log(counts.sum())
    return NBParams(class_log_prior=class_log_prior, feature_log_prob=feature_log_prob)


def score_nb(params: NBParams, X: sp.csr_matrix) -> np.ndarray:
    """Posterior log-odds of spam: log P(1|x) - log P(0|x)."""
    joint = X @ params.feature_log_prob.T + params.class_log_prior
    return joint[:, 1] - joint[:, 0]


def params_to_dict(params: NBParams) -> dict:
    return {
        "class_log_prior": params.class_log_prior.tolist(),
        "feature_log_prob": params.feature_log_prob.tolist(),
    }


def params_from_dict(doc: dict) -> NBParams:
    return NBParams(
        class_log_prior=np.asarray(doc["class_log_prior"], dtype=np.float64),
        feature_log_prob=np.asarray(doc["feature_log_prob"], dtype=np.float64),
    )
