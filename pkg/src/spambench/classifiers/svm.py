"""Kernel SVM trained with sequential minimal optimization.

Kernel k(u, v) = tanh(gamma * <u, v> + coef0); because that kernel is not
positive semidefinite, the pair subproblem falls back to evaluating the dual
objective at the clip boundaries whenever the curvature is nonpositive.
Kernel rows are computed on demand from the sparse training matrix and kept
in a bounded LRU cache. Decision value f(x) = sum_i alpha_i y_i k(x_i, x) + b.
"""

from __future__ import annotations

import random
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

_STEP_EPS = 1e-3  # canonical step-significance eps, paired with the 1e-3 KKT tol
_OBJ_EPS = 1e-8
_CACHE_BYTES = 1024 * 1024 * 1024


@dataclass(frozen=True)
class SVMParams:
    support: sp.csr_matrix
    coef: np.ndarray  # alpha_i * y_i for the support vectors
    bias: float
    gamma: float
    coef0: float
    converged: bool


class _KernelCache:
    """Float32 kernel rows; the whole matrix is materialized when it fits the budget."""

    def __init__(self, X: sp.csr_matrix, gamma: float, coef0: float):
        self.X = X
        self.gamma = gamma
        self.coef0 = coef0
        n = X.shape[0]
        self.full: np.ndarray | None = None
        if 4 * n * n <= _CACHE_BYTES:
            self.full = np.empty((n, n), dtype=np.float32)
            for start in range(0, n, 2048):
                block = (X[start : start + 2048] @ X.T).toarray()
                self.full[start : start + block.shape[0]] = np.tanh(gamma * block + coef0)
        self.rows: OrderedDict[int, np.ndarray] = OrderedDict()
        self.max_rows = max(2, _CACHE_BYTES // (4 * n))

    def row(self, i: int) -> np.ndarray:
        if self.full is not None:
            return self.full[i]
        cached = self.rows.get(i)
        if cached is not None:
            self.rows.move_to_end(i)
            return cached
        k = np.tanh(
            self.gamma * (self.X @ self.X[i].T).toarray().ravel() + self.coef0
        ).astype(np.float32)
        self.rows[i] = k
        if len(self.rows) > self.max_rows:
            self.rows.popitem(last=False)
        return k


class _SMOSolver:
    def __init__(self, X: sp.csr_matrix, y: np.ndarray, hyper: dict, seed: int):
        self.n = X.shape[0]
        self.y = np.where(y == 1, 1.0, -1.0)
        self.C = float(hyper["C"])
        self.tol = float(hyper["tol"])
        self.max_steps = int(hyper["max_steps"])
        self.kernel = _KernelCache(X, float(hyper["gamma"]), float(hyper["coef0"]))
        self.alpha = np.zeros(self.n)
        self.b = 0.0
        self.errors = -self.y.copy()  # f = 0 everywhere at the start
        self.steps = 0
        self.rng = random.Random(seed)

    def _take_step(self, i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        a1_old, a2_old = self.alpha[i1], self.alpha[i2]
        y1, y2 = self.y[i1], self.y[i2]
        e1, e2 = self.errors[i1], self.errors[i2]
        s = y1 * y2
        if s < 0:
            lo = max(0.0, a2_old - a1_old)
            hi = min(self.C, self.C + a2_old - a1_old)
        else:
            lo = max(0.0, a1_old + a2_old - self.C)
            hi = min(self.C, a1_old + a2_old)
        if lo >= hi:
            return False
        k1 = self.kernel.row(i1)
        k2 = self.kernel.row(i2)
        k11, k12, k22 = k1[i1], k1[i2], k2[i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0:
            a2 = a2_old + y2 * (e1 - e2) / eta
            a2 = min(max(a2, lo), hi)
        else:
            # nonpositive curvature: compare the dual objective at both ends
            f1 = e1 + y1 - self.b
            f2 = e2 + y2 - self.b
            v1 = f1 - a1_old * y1 * k11 - a2_old * y2 * k12
            v2 = f2 - a1_old * y1 * k12 - a2_old * y2 * k22
            gamma_sum = a1_old + s * a2_old

            def dual_at(a2_val: float) -> float:
                a1_val = gamma_sum - s * a2_val
                return (
                    a1_val
                    + a2_val
                    - 0.5 * k11 * a1_val * a1_val
                    - 0.5 * k22 * a2_val * a2_val
                    - s * k12 * a1_val * a2_val
                    - y1 * a1_val * v1
                    - y2 * a2_val * v2
                )

            lo_obj, hi_obj = dual_at(lo), dual_at(hi)
            if lo_obj > hi_obj + _OBJ_EPS:
                a2 = lo
            elif hi_obj > lo_obj + _OBJ_EPS:
                a2 = hi
            else:
                a2 = a2_old
        if abs(a2 - a2_old) < _STEP_EPS * (a2 + a2_old + _STEP_EPS):
            return False
        a1 = a1_old + s * (a2_old - a2)
        d1, d2 = y1 * (a1 - a1_old), y2 * (a2 - a2_old)
        b1 = self.b - e1 - d1 * k11 - d2 * k12
        b2 = self.b - e2 - d1 * k12 - d2 * k22
        if 0.0 < a1 < self.C:
            b_new = b1
        elif 0.0 < a2 < self.C:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)
        self.errors += d1 * k1 + d2 * k2 + (b_new - self.b)
        self.alpha[i1], self.alpha[i2] = a1, a2
        self.b = b_new
        self.steps += 1
        return True

    def _examine(self, i2: int) -> bool:
        y2, a2, e2 = self.y[i2], self.alpha[i2], self.errors[i2]
        r2 = e2 * y2
        if not ((r2 < -self.tol and a2 < self.C) or (r2 > self.tol and a2 > 0.0)):
            return False
        non_bound = np.flatnonzero((self.alpha > 0.0) & (self.alpha < self.C))
        if len(non_bound) > 1:
            gaps = np.abs(self.errors[non_bound] - e2)
            if self._take_step(int(non_bound[int(np.argmax(gaps))]), i2):
                return True
        if len(non_bound):
            start = self.rng.randrange(len(non_bound))
            for idx in range(len(non_bound)):
                if self._take_step(int(non_bound[(start + idx) % len(non_bound)]), i2):
                    return True
        start = self.rng.randrange(self.n)
        for idx in range(self.n):
            if self._take_step((start + idx) % self.n, i2):
                return True
        return False

    def solve(self) -> tuple[np.ndarray, float, bool]:
        examine_all = True
        num_changed = 1
        while num_changed > 0 or examine_all:
            if self.steps >= self.max_steps:
                return self.alpha, self.b, False
            num_changed = 0
            if examine_all:
                targets = range(self.n)
            else:
                targets = np.flatnonzero((self.alpha > 0.0) & (self.alpha < self.C))
            for i2 in targets:
                num_changed += int(self._examine(int(i2)))
                if self.steps >= self.max_steps:
                    return self.alpha, self.b, False
            if examine_all:
                examine_all = False
            elif num_changed == 0:
                examine_all = True
        return self.alpha, self.b, True


def fit_svm(X: sp.csr_matrix, y: np.ndarray, hyper: dict, seed: int) -> SVMParams:
    solver = _SMOSolver(X, y, hyper, seed)
    alpha, bias, converged = solver.solve()
    keep = np.flatnonzero(alpha > 1e-12)
    return SVMParams(
        support=X[keep].copy(),
        coef=(alpha * solver.y)[keep],
        bias=float(bias),
        gamma=float(hyper["gamma"]),
        coef0=float(hyper["coef0"]),
        converged=converged,
    )


def score_svm(params: SVMParams, X: sp.csr_matrix) -> np.ndarray:
    if params.support.shape[0] == 0:
        return np.full(X.shape[0], params.bias)
    kernel = np.tanh(params.gamma * (X @ params.support.T).toarray() + params.coef0)
    return kernel @ params.coef + params.bias


def params_to_dict(params: SVMParams) -> dict:
    coo = params.support.tocoo()
    return {
        "shape": list(params.support.shape),
        "rows": coo.row.tolist(),
        "cols": coo.col.tolist(),
        "values": coo.data.tolist(),
        "coef": params.coef.tolist(),
        "bias": params.bias,
        "gamma": params.gamma,
        "coef0": params.coef0,
        "converged": params.converged,
    }


def params_from_dict(doc: dict) -> SVMParams:
    support = sp.coo_matrix(
        (doc["values"], (doc["rows"], doc["cols"])), shape=tuple(doc["shape"])
    ).tocsr()
    return SVMParams(
        support=support,
        coef=np.asarray(doc["coef"], dtype=np.float64),
        bias=float(doc["bias"]),
        gamma=float(doc["gamma"]),
        coef0=float(doc["coef0"]),
        converged=bool(doc["converged"]),
    )
