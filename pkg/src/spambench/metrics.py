"""Precision/recall/F1 with spam as the positive class, macro averaging, and timing capture."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, TypeVar

T = TypeVar("T")

FEW_SHOT_K = (4, 8, 16, 32, 64, 128, 256, "full")


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass
class CellMetrics:
    f1: float
    precision: float
    recall: float
    train_time_s: float = 0.0
    infer_time_s: float = 0.0
    extras: dict = field(default_factory=dict)


def confusion(y_true: Sequence[int], y_pred: Sequence[int]) -> ConfusionCounts:
    if len(y_true) != len(y_pred):
        raise MetricsError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted")
    if len(y_true) == 0:
        raise MetricsError("cannot score an empty prediction set")
    tp = fp = fn = tn = 0
    for t, p in zip(y_true, y_pred):
        if t not in (0, 1) or p not in (0, 1):
            raise MetricsError(f"labels must be 0 or 1, got true={t} pred={p}")
        if p == 1:
            if t == 1:
                tp += 1
            else:
                fp += 1
        else:
            if t == 1:
                fn += 1
            else:
                tn += 1
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def metrics_from_confusion(c: ConfusionCounts) -> CellMetrics:
    precision = c.tp / (c.tp + c.fp) if (c.tp + c.fp) > 0 else 0.0
    recall = c.tp / (c.tp + c.fn) if (c.tp + c.fn) > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) > 0 else 0.0
    return CellMetrics(f1=f1, precision=precision, recall=recall)


def score(y_true: Sequence[int], y_pred: Sequence[int]) -> tuple[ConfusionCounts, CellMetrics]:
    c = confusion(y_true, y_pred)
    return c, metrics_from_confusion(c)


def macro_over_datasets(cells: Mapping[str, CellMetrics]) -> CellMetrics:
    """Unweighted mean of each metric over the datasets present.

    Callers exclude unavailable cells before calling; exclusions are theirs
    to report.
    """
    if not cells:
        raise MetricsError("macro average needs at least one dataset cell")
    n = len(cells)
    return CellMetrics(
        f1=sum(c.f1 for c in cells.values()) / n,
        precision=sum(c.precision for c in cells.values()) / n,
        recall=sum(c.recall for c in cells.values()) / n,
        train_time_s=sum(c.train_time_s for c in cells.values()) / n,
        infer_time_s=sum(c.infer_time_s for c in cells.values()) / n,
    )


def mean_std_over_k(rows: Mapping[int | str, float]) -> tuple[float, float]:
    """Mean and population standard deviation over the eight sample-size cells."""
    missing = [k for k in FEW_SHOT_K if k not in rows]
    if missing:
        raise MetricsError(f"missing sample-size cells: {missing}")
    values = [float(rows[k]) for k in FEW_SHOT_K]
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)
    return mean, math.sqrt(var)


def time_block(action: Callable[[], T]) -> tuple[T, float]:
    """Run action and return (result, wall seconds on the monotonic clock)."""
    start = time.perf_counter()
    result = action()
    return result, time.perf_counter() - start


def mean(xs: Iterable[float]) -> float:
    xs = list(xs)
    return sum(xs) / len(xs)
