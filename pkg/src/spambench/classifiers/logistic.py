"""L2-regularized logistic regression minimizing mean cross-entropy.

Objective: mean_i [log(1 + e^{m_i}) - y_i m_i] + ||w||^2 / (2 C n), with
m = Xw + b and an unregularized bias. The analytic gradient is authored here;
L-BFGS-B drives the descent to projected-gradient tolerance `tol`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize


@dataclass(frozen=True)
class LRParams:
    weights: np.ndarray
    bias: float
    n_iter: int


def _sigmoid(m: np.ndarray) -> np.ndarray:
    out = np.empty_like(m)
    pos = m >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-m[pos]))
    e = np.exp(m[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def loss_and_grad(
    theta: np.ndarray, X: sp.csr_matrix, y: np.ndarray, C: float
) -> tuple[float, np.ndarray]:
    n, d = X.shape
    w, b = theta[:d], theta[d]
    m = X @ w + b
    # log(1 + e^m) - y*m, computed stably
    ce = np.logaddexp(0.0, m) - y * m
    loss = ce.mean() + (w @ w) / (2.0 * C * n)
    residual = _sigmoid(m) - y
    grad_w = (X.T @ residual) / n + w / (C * n)
    grad_b = residual.mean()
    return float(loss), np.concatenate([grad_w, [grad_b]])


def fit_lr(X: sp.csr_matrix, y: np.ndarray, hyper: dict, seed: int) -> LRParams:
    C, tol, max_iter = float(hyper["C"]), float(hyper["tol"]), int(hyper["max_iter"])
    y = y.astype(np.float64)
    theta0 = np.zeros(X.shape[1] + 1)
    result = minimize(
        loss_and_grad,
        theta0,
        args=(X, y, C),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "gtol": tol, "ftol": 1e-14, "maxfun": 20 * max_iter},
    )
    theta = result.x
    return LRParams(weights=theta[:-1], bias=float(theta[-1]), n_iter=int(result.nit))


def score_lr(params: LRParams, X: sp.csr_matrix) -> np.ndarray:
    return _sigmoid(X @ params.weights + params.bias)


def params_to_dict(params: LRParams) -> dict:
    return {"weights": params.weights.tolist(), "bias": params.bias, "n_iter": params.n_iter}


def params_from_dict(doc: dict) -> LRParams:
    return LRParams(
        weights=np.asarray(doc["weights"], dtype=np.float64),
        bias=float(doc["bias"]),
        n_iter=int(doc["n_iter"]),
    )
