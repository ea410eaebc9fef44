"""Training-corpus vocabulary and sparse tf-idf feature vectors.

Weights follow tf(t,d) * ln(N / n_t) with raw term counts and no smoothing;
the vocabulary keeps the max_features terms with the highest document
frequency (ties broken lexicographically). Optional L2 normalization is
applied last and enabled by default.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .textprep import TokenizedDoc


class FeatureError(ValueError):
    pass


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    df: dict[str, int]
    corpus_size: int
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self) -> int:
        return len(self.terms)

    def idf(self, term: str) -> float:
        return math.log(self.corpus_size / self.df[term])


@dataclass(frozen=True)
class FeatureVector:
    doc_id: str
    entries: dict[int, float]

    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.entries.values()))


def fit_vocabulary(docs: list[TokenizedDoc], max_features: int) -> Vocabulary:
    """Rank terms by document frequency (desc, lexicographic tiebreak) and keep the top max_features."""
    if max_features < 1:
        raise FeatureError(f"max_features must be >= 1, got {max_features}")
    if not docs:
        raise FeatureError("cannot fit a vocabulary on an empty document list")
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(set(doc.tokens))
    if not df:
        raise FeatureError("all documents have empty token lists")
    ranked = sorted(df.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = ranked[:max_features]
    return Vocabulary(
        terms=tuple(t for t, _ in kept),
        df={t: n for t, n in kept},
        corpus_size=len(docs),
    )


def transform(doc: TokenizedDoc, vocab: Vocabulary, l2_normalize: bool = True) -> FeatureVector:
    """tf-idf vector for one document; out-of-vocabulary tokens contribute nothing."""
    counts: Counter[str] = Counter(t for t in doc.tokens if t in vocab.index)
    entries: dict[int, float] = {}
    for term, tf in counts.items():
        weight = tf * vocab.idf(term)
        if weight != 0.0:
            entries[vocab.index[term]] = weight
    if l2_normalize and entries:
        norm = math.sqrt(sum(w * w for w in entries.values()))
        if norm > 0.0:
            entries = {i: w / norm for i, w in entries.items()}
    return FeatureVector(doc_id=doc.doc_id, entries=entries)


def transform_corpus(
    docs: list[TokenizedDoc], vocab: Vocabulary, l2_normalize: bool = True
) -> list[FeatureVector]:
    return [transform(doc, vocab, l2_normalize) for doc in docs]


def save_vocabulary(vocab: Vocabulary, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"corpus_size": vocab.corpus_size, "n_terms": len(vocab.terms)}) + "\n")
        for term in vocab.terms:
            fh.write(json.dumps({"term": term, "df": vocab.df[term]}, ensure_ascii=False) + "\n")


def load_vocabulary(path: str | Path) -> Vocabulary:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        try:
            header = json.loads(fh.readline())
        except json.JSONDecodeError as exc:
            raise FeatureError(f"{path}: malformed vocabulary header: {exc}") from exc
        terms: list[str] = []
        df: dict[str, int] = {}
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                term, count = rec["term"], int(rec["df"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise FeatureError(f"{path}:{lineno}: malformed vocabulary record") from exc
            terms.append(term)
            df[term] = count
    if len(terms) != header.get("n_terms"):
        raise FeatureError(
            f"{path}: header says {header.get('n_terms')} terms, found {len(terms)}"
        )
    return Vocabulary(terms=tuple(terms), df=df, corpus_size=int(header["corpus_size"]))
