"""Train/test splitting, few-shot support-set sampling, and stratified 5-fold CV."""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field
from typing import Sequence

from .features import fit_vocabulary, transform_corpus
from .metrics import score
from .textprep import TokenizedDoc

K_FULL = "full"


class ProtocolError(ValueError):
    pass


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ProtocolError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


@dataclass(frozen=True)
class FewShotSample:
    k: int | str
    seed: int
    indices: tuple[int, ...]


@dataclass(frozen=True)
class FoldAssignment:
    n_folds: int
    fold_of: dict[int, int]

    def fold_indices(self, fold: int) -> list[int]:
        return sorted(i for i, f in self.fold_of.items() if f == fold)


def _class_members(labels: Sequence[int], indices: Sequence[int] | None = None) -> dict[int, list[int]]:
    pool = range(len(labels)) if indices is None else indices
    members: dict[int, list[int]] = {}
    for i in pool:
        members.setdefault(labels[i], []).append(i)
    return members


def split(labels: Sequence[int], spec: SplitSpec) -> tuple[list[int], list[int]]:
    """Stratified train/test split; per-class train size is round(fraction * class size).

    Counts are clamped so both sides keep at least one member of every class.
    """
    members = _class_members(labels)
    for label, idx in members.items():
        if len(idx) < 2:
            raise ProtocolError(f"class {label} has {len(idx)} member(s); need >= 2 to stratify")
    rng = random.Random(spec.seed)
    train: list[int] = []
    test: list[int] = []
    for label in sorted(members):
        idx = sorted(members[label])
        rng.shuffle(idx)
        n_train = int(spec.train_fraction * len(idx) + 0.5)
        n_train = min(max(n_train, 1), len(idx) - 1)
        train.extend(idx[:n_train])
        test.extend(idx[n_train:])
    return sorted(train), sorted(test)


def _stratified_counts(k: int, class_sizes: dict[int, int]) -> dict[int, int]:
    """Largest-remainder apportionment of k over classes, minimum one per class."""
    n = sum(class_sizes.values())
    exact = {c: k * size / n for c, size in class_sizes.items()}
    counts = {c: int(exact[c]) for c in class_sizes}
    leftovers = k - sum(counts.values())
    # remainder desc, ham (label 0) wins ties
    order = sorted(class_sizes, key=lambda c: (-(exact[c] - counts[c]), c))
    for c in order[:leftovers]:
        counts[c] += 1
    for c in sorted(class_sizes):
        if counts[c] == 0:
            donor = max(sorted(counts), key=lambda d: counts[d])
            counts[donor] -= 1
            counts[c] += 1
    return counts


def sample_few_shot(
    train_indices: Sequence[int], labels: Sequence[int], k: int | str, seed: int
) -> FewShotSample:
    """Seeded stratified draw of k support examples from the training split."""
    if isinstance(k, str):
        if k.lower() != K_FULL:
            raise ProtocolError(f"k must be a positive count or '{K_FULL}', got {k!r}")
        return FewShotSample(k=K_FULL, seed=seed, indices=tuple(train_indices))
    members = _class_members(labels, train_indices)
    if k > len(train_indices):
        raise ProtocolError(f"k={k} exceeds training size {len(train_indices)}")
    if len(members) >= 2 and k < 2:
        raise ProtocolError(f"k={k} cannot cover both classes; need k >= 2")
    if k < 1:
        raise ProtocolError(f"k must be >= 1, got {k}")
    counts = _stratified_counts(k, {c: len(v) for c, v in members.items()})
    for c, want in counts.items():
        if want > len(members[c]):
            raise ProtocolError(
                f"class {c} has only {len(members[c])} training member(s), need {want}"
            )
    rng = random.Random(seed)
    chosen: list[int] = []
    for c in sorted(members):
        chosen.extend(rng.sample(sorted(members[c]), counts[c]))
    return FewShotSample(k=k, seed=seed, indices=tuple(sorted(chosen)))


def make_folds(labels: Sequence[int], n_folds: int = 5, seed: int = 0) -> FoldAssignment:
    """Stratified fold partition; fold sizes differ by at most one overall."""
    members = _class_members(labels)
    for label, idx in members.items():
        if len(idx) < n_folds:
            raise ProtocolError(
                f"class {label} has {len(idx)} member(s); need >= {n_folds} for {n_folds} folds"
            )
    rng = random.Random(seed)
    fold_of: dict[int, int] = {}
    loads = [0] * n_folds
    for label in sorted(members):
        idx = sorted(members[label])
        rng.shuffle(idx)
        base, rem = divmod(len(idx), n_folds)
        extra = set(sorted(range(n_folds), key=lambda f: (loads[f], f))[:rem])
        pos = 0
        for f in range(n_folds):
            take = base + (1 if f in extra else 0)
            for i in idx[pos : pos + take]:
                fold_of[i] = f
            pos += take
            loads[f] += take
    return FoldAssignment(n_folds=n_folds, fold_of=fold_of)


def tune_feature_count(
    docs: Sequence[TokenizedDoc],
    labels: Sequence[int],
    grid: Sequence[int],
    classifier_spec,
    n_folds: int = 5,
    seed: int = 0,
    l2_normalize: bool = True,
) -> tuple[int, dict[int, float]]:
    """5-fold CV over candidate feature budgets; returns (best count, mean F1 per candidate).

    The vocabulary for each fold is fit on that fold's training portion only.
    Ties go to the smaller count; candidates that fail on any fold are
    excluded with a warning.
    """
    from .classifiers import fit, predict  # deferred: classifiers sit below protocol

    if not grid:
        raise ProtocolError("feature-count grid is empty")
    folds = make_folds(labels, n_folds=n_folds, seed=seed)
    results: dict[int, float] = {}
    for candidate in sorted(set(grid)):
        f1s: list[float] = []
        try:
            for f in range(n_folds):
                va_idx = folds.fold_indices(f)
                tr_idx = sorted(set(range(len(labels))) - set(va_idx))
                vocab = fit_vocabulary([docs[i] for i in tr_idx], candidate)
                X_tr = transform_corpus([docs[i] for i in tr_idx], vocab, l2_normalize)
                X_va = transform_corpus([docs[i] for i in va_idx], vocab, l2_normalize)
                model = fit(classifier_spec, X_tr, [labels[i] for i in tr_idx], n_features=len(vocab))
                preds = predict(model, X_va)
                _, cell = score([labels[i] for i in va_idx], preds)
                f1s.append(cell.f1)
        except Exception as exc:  # noqa: BLE001 - candidate exclusion is the contract
            warnings.warn(f"feature count {candidate} excluded: {exc}", stacklevel=2)
            continue
        results[candidate] = sum(f1s) / len(f1s)
    if not results:
        raise ProtocolError("every candidate feature count failed cross-validation")
    best = max(sorted(results), key=lambda c: results[c])
    return best, results
