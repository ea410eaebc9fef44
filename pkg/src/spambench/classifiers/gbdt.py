"""Gradient-boosted decision trees with histogram split finding.

Two growth modes share the machinery: level-wise growth to a depth cap and
leaf-wise (best-first) growth to a leaf-count cap. Features are pre-binned
once per fit: bin 0 holds zero values, the nonzero values get equal-frequency
quantile bins (at most max_bins total). Histograms are accumulated over the
sparse nonzeros only; the zero bin receives the node remainder. Loss is
logistic; the base score is the prior log-odds, so zero boosting rounds (or a
zero learning rate) predict the class prior everywhere. Leaf values are
-G/(H + reg_lambda). Equal-gain ties resolve to the lowest feature then the
lowest bin, keeping fits deterministic.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

_MIN_GAIN = 1e-12
_PREDICT_BATCH = 4096


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray  # int32, -1 for leaves
    threshold: np.ndarray  # float64 raw-value threshold, go left iff v <= threshold
    left: np.ndarray  # int32
    right: np.ndarray  # int32
    value: np.ndarray  # float64 leaf values


@dataclass(frozen=True)
class GBDTParams:
    base_score: float
    learning_rate: float
    trees: tuple[Tree, ...]


class _TreeBuilder:
    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []

    def add_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        return len(self.feature) - 1

    def set_split(self, node: int, feature: int, threshold: float, left: int, right: int) -> None:
        self.feature[node] = feature
        self.threshold[node] = threshold
        self.left[node] = left
        self.right[node] = right

    def finish(self, leaf_of: np.ndarray, grad: np.ndarray, hess: np.ndarray, reg_lambda: float) -> Tree:
        n_nodes = len(self.feature)
        g_leaf = np.bincount(leaf_of, weights=grad, minlength=n_nodes)
        h_leaf = np.bincount(leaf_of, weights=hess, minlength=n_nodes)
        value = np.zeros(n_nodes)
        is_leaf = np.asarray(self.left) == -1
        value[is_leaf] = -g_leaf[is_leaf] / (h_leaf[is_leaf] + reg_lambda)
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int32),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int32),
            right=np.asarray(self.right, dtype=np.int32),
            value=value,
        )


class _Binner:
    """Equal-frequency bins over the nonzero training values of each feature."""

    def __init__(self, X: sp.csr_matrix, max_bins: int):
        Xc = X.tocsc()
        self.cuts: list[np.ndarray] = []
        max_cuts = max_bins - 1
        for f in range(Xc.shape[1]):
            vals = Xc.data[Xc.indptr[f] : Xc.indptr[f + 1]]
            vals = vals[vals > 0]
            if len(vals) == 0:
                self.cuts.append(np.empty(0))
                continue
            qs = np.linspace(0.0, 1.0, min(max_cuts, len(vals)) + 1)[1:]
            self.cuts.append(np.unique(np.quantile(vals, qs)))

    def bin_matrix(self, X: sp.csr_matrix) -> sp.csc_matrix:
        Xc = X.tocsc(copy=True)
        binned = np.zeros(len(Xc.data), dtype=np.int64)
        for f in range(Xc.shape[1]):
            start, end = Xc.indptr[f], Xc.indptr[f + 1]
            vals = Xc.data[start:end]
            binned[start:end] = np.where(
                vals > 0, 1 + np.searchsorted(self.cuts[f], vals, side="left"), 0
            )
        return sp.csc_matrix((binned, Xc.indices, Xc.indptr), shape=Xc.shape)

    def threshold_value(self, f: int, b: int) -> float:
        # split "bin <= b": bin 0 is the zero bin, bin i covers (cuts[i-1], cuts[i]]
        return 0.0 if b == 0 else float(self.cuts[f][b - 1])


@dataclass(frozen=True)
class _Split:
    gain: float
    feature: int
    bin: int


class _FitContext:
    def __init__(self, X: sp.csr_matrix, hyper: dict):
        self.binner = _Binner(X, int(hyper["max_bins"]))
        binned_csc = self.binner.bin_matrix(X)
        self.Xb = binned_csc.tocsr()
        self.Xb.sort_indices()
        self.Xb_csc = binned_csc
        self.n, self.n_features = X.shape
        self.stride = int(self.Xb.data.max()) + 2 if self.Xb.nnz else 2
        self.reg_lambda = float(hyper["reg_lambda"])
        self.min_child_weight = float(hyper["min_child_weight"])
        self.min_samples_leaf = int(hyper["min_samples_leaf"])

    def best_split(self, rows: np.ndarray, grad: np.ndarray, hess: np.ndarray) -> _Split | None:
        sub = self.Xb[rows]
        per_row = np.diff(sub.indptr)
        flat = sub.indices.astype(np.int64) * self.stride + sub.data
        size = self.n_features * self.stride
        g_hist = np.bincount(flat, weights=np.repeat(grad[rows], per_row), minlength=size)
        h_hist = np.bincount(flat, weights=np.repeat(hess[rows], per_row), minlength=size)
        counts = np.bincount(flat, minlength=size)
        g_hist = g_hist.reshape(self.n_features, self.stride)
        h_hist = h_hist.reshape(self.n_features, self.stride)
        counts = counts.reshape(self.n_features, self.stride)
        g_total = grad[rows].sum()
        h_total = hess[rows].sum()
        g_hist[:, 0] = g_total - g_hist[:, 1:].sum(axis=1)
        h_hist[:, 0] = h_total - h_hist[:, 1:].sum(axis=1)
        counts[:, 0] = len(rows) - counts[:, 1:].sum(axis=1)

        gl = np.cumsum(g_hist, axis=1)[:, :-1]
        hl = np.cumsum(h_hist, axis=1)[:, :-1]
        nl = np.cumsum(counts, axis=1)[:, :-1]
        gr, hr, nr = g_total - gl, h_total - hl, len(rows) - nl
        parent = g_total * g_total / (h_total + self.reg_lambda)
        gain = 0.5 * (
            gl * gl / (hl + self.reg_lambda) + gr * gr / (hr + self.reg_lambda) - parent
        )
        ok = (
            (hl >= self.min_child_weight)
            & (hr >= self.min_child_weight)
            & (nl >= self.min_samples_leaf)
            & (nr >= self.min_samples_leaf)
        )
        gain = np.where(ok, gain, -np.inf)
        best_flat = int(np.argmax(gain))  # first occurrence: lowest feature, then lowest bin
        best_gain = float(gain.ravel()[best_flat])
        if not np.isfinite(best_gain) or best_gain <= _MIN_GAIN:
            return None
        f, b = divmod(best_flat, gain.shape[1])
        return _Split(gain=best_gain, feature=int(f), bin=int(b))

    def partition(self, rows: np.ndarray, split: _Split) -> tuple[np.ndarray, np.ndarray]:
        col = np.zeros(self.n, dtype=np.int64)
        start, end = self.Xb_csc.indptr[split.feature], self.Xb_csc.indptr[split.feature + 1]
        col[self.Xb_csc.indices[start:end]] = self.Xb_csc.data[start:end]
        go_left = col[rows] <= split.bin
        return rows[go_left], rows[~go_left]


def _grow_level_wise(
    ctx: _FitContext, grad: np.ndarray, hess: np.ndarray, max_depth: int
) -> tuple[_TreeBuilder, np.ndarray]:
    builder = _TreeBuilder()
    leaf_of = np.zeros(ctx.n, dtype=np.int64)
    root = builder.add_node()
    frontier = [(root, np.arange(ctx.n))]
    for _depth in range(max_depth):
        next_frontier = []
        for node, rows in frontier:
            split = ctx.best_split(rows, grad, hess)
            if split is None:
                continue
            left_rows, right_rows = ctx.partition(rows, split)
            left = builder.add_node()
            right = builder.add_node()
            builder.set_split(
                node, split.feature, ctx.binner.threshold_value(split.feature, split.bin), left, right
            )
            leaf_of[left_rows] = left
            leaf_of[right_rows] = right
            next_frontier.append((left, left_rows))
            next_frontier.append((right, right_rows))
        if not next_frontier:
            break
        frontier = next_frontier
    return builder, leaf_of


def _grow_leaf_wise(
    ctx: _FitContext, grad: np.ndarray, hess: np.ndarray, num_leaves: int, max_depth: int
) -> tuple[_TreeBuilder, np.ndarray]:
    builder = _TreeBuilder()
    leaf_of = np.zeros(ctx.n, dtype=np.int64)
    root = builder.add_node()
    heap: list[tuple[float, int, int, int, np.ndarray, _Split]] = []
    order = 0

    def enqueue(node: int, rows: np.ndarray, depth: int) -> None:
        nonlocal order
        if max_depth and depth >= max_depth:
            return
        split = ctx.best_split(rows, grad, hess)
        if split is not None:
            heapq.heappush(heap, (-split.gain, order, node, depth, rows, split))
            order += 1

    enqueue(root, np.arange(ctx.n), 0)
    leaves = 1
    while heap and leaves < num_leaves:
        _, _, node, depth, rows, split = heapq.heappop(heap)
        left_rows, right_rows = ctx.partition(rows, split)
        left = builder.add_node()
        right = builder.add_node()
        builder.set_split(
            node, split.feature, ctx.binner.threshold_value(split.feature, split.bin), left, right
        )
        leaf_of[left_rows] = left
        leaf_of[right_rows] = right
        leaves += 1
        enqueue(left, left_rows, depth + 1)
        enqueue(right, right_rows, depth + 1)
    return builder, leaf_of


def _sigmoid(m: np.ndarray) -> np.ndarray:
    out = np.empty_like(m)
    pos = m >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-m[pos]))
    e = np.exp(m[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _fit_boosted(X: sp.csr_matrix, y: np.ndarray, hyper: dict, mode: str) -> GBDTParams:
    ctx = _FitContext(X, hyper)
    y = y.astype(np.float64)
    prior = y.mean()
    base_score = float(np.log(prior / (1.0 - prior)))
    lr = float(hyper["learning_rate"])
    raw = np.full(ctx.n, base_score)
    trees: list[Tree] = []
    for _ in range(int(hyper["n_estimators"])):
        p = _sigmoid(raw)
        grad = p - y
        hess = p * (1.0 - p)
        if mode == "level":
            builder, leaf_of = _grow_level_wise(ctx, grad, hess, int(hyper["max_depth"]))
        else:
            builder, leaf_of = _grow_leaf_wise(
                ctx, grad, hess, int(hyper["num_leaves"]), int(hyper.get("max_depth", 0))
            )
        tree = builder.finish(leaf_of, grad, hess, ctx.reg_lambda)
        raw += lr * tree.value[leaf_of]
        trees.append(tree)
    return GBDTParams(base_score=base_score, learning_rate=lr, trees=tuple(trees))


def fit_level_wise(X: sp.csr_matrix, y: np.ndarray, hyper: dict, seed: int) -> GBDTParams:
    return _fit_boosted(X, y, hyper, "level")


def fit_leaf_wise(X: sp.csr_matrix, y: np.ndarray, hyper: dict, seed: int) -> GBDTParams:
    return _fit_boosted(X, y, hyper, "leaf")


def _route(tree: Tree, dense_batch: np.ndarray) -> np.ndarray:
    node = np.zeros(dense_batch.shape[0], dtype=np.int32)
    active = tree.left[node] != -1
    while active.any():
        idx = np.flatnonzero(active)
        cur = node[idx]
        vals = dense_batch[idx, tree.feature[cur]]
        node[idx] = np.where(vals <= tree.threshold[cur], tree.left[cur], tree.right[cur])
        active = tree.left[node] != -1
    return tree.value[node]


def score_gbdt(params: GBDTParams, X: sp.csr_matrix) -> np.ndarray:
    raw = np.full(X.shape[0], params.base_score)
    for start in range(0, X.shape[0], _PREDICT_BATCH):
        batch = np.asarray(X[start : start + _PREDICT_BATCH].todense())
        acc = np.zeros(batch.shape[0])
        for tree in params.trees:
            acc += _route(tree, batch)
        raw[start : start + batch.shape[0]] += params.learning_rate * acc
    return _sigmoid(raw)


def params_to_dict(params: GBDTParams) -> dict:
    return {
        "base_score": params.base_score,
        "learning_rate": params.learning_rate,
        "trees": [
            {
                "feature": t.feature.tolist(),
                "threshold": t.threshold.tolist(),
                "left": t.left.tolist(),
                "right": t.right.tolist(),
                "value": t.value.tolist(),
            }
            for t in params.trees
        ],
    }


def params_from_dict(doc: dict) -> GBDTParams:
    trees = tuple(
        Tree(
            feature=np.asarray(t["feature"], dtype=np.int32),
            threshold=np.asarray(t["threshold"], dtype=np.float64),
            left=np.asarray(t["left"], dtype=np.int32),
            right=np.asarray(t["right"], dtype=np.int32),
            value=np.asarray(t["value"], dtype=np.float64),
        )
        for t in doc["trees"]
    )
    return GBDTParams(
        base_score=float(doc["base_score"]),
        learning_rate=float(doc["learning_rate"]),
        trees=trees,
    )
