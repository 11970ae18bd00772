"""In-process inverted index with BM25 (Lucene-style, non-negative idf)."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from eventir.corpus import Corpus
from eventir.errors import InvariantViolation, UnknownIdError
from eventir.ranking import RankedList
from eventir.text import AnalysisConfig, tokenize

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75


@dataclass(frozen=True)
class BM25Params:
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B

    def __post_init__(self):
        if not (self.k1 >= 0 and math.isfinite(self.k1)):
            raise ValueError(f"k1 must be finite and >= 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must lie in [0, 1], got {self.b}")


def idf(doc_count: int, df: int) -> float:
    return math.log(1.0 + (doc_count - df + 0.5) / (df + 0.5))


def tf_component(tf: float, doc_len: float, avg_doc_len: float, k1: float, b: float) -> float:
    return tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * doc_len / avg_doc_len))


@dataclass
class InvertedIndex:
    postings: Mapping[str, tuple[tuple[str, int], ...]]
    doc_lengths: Mapping[str, int]
    params: BM25Params = field(default_factory=BM25Params)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    def __post_init__(self):
        self.doc_count = len(self.doc_lengths)
        self.avg_doc_length = (sum(self.doc_lengths.values()) / self.doc_count) if self.doc_count else 0.0
        self._idf = {t: idf(self.doc_count, len(p)) for t, p in self.postings.items()}
        self._tf = {t: dict(p) for t, p in self.postings.items()}

    def check_invariants(self) -> None:
        for term, posting in self.postings.items():
            ids = [d for d, _ in posting]
            if ids != sorted(ids) or len(set(ids)) != len(ids):
                raise InvariantViolation(f"posting for {term!r} not sorted/unique")
            for d, tf in posting:
                if d not in self.doc_lengths:
                    raise InvariantViolation(f"posting for {term!r} references unknown doc {d!r}")
                if tf < 1:
                    raise InvariantViolation(f"non-positive tf in posting {term!r}")

    def tokenize(self, text: str) -> list[str]:
        return tokenize(text, self.analysis)


def build_index(corpus: Corpus, analysis: AnalysisConfig | None = None,
                params: BM25Params | None = None) -> InvertedIndex:
    """Index ``title + " " + body`` of every article."""
    analysis = analysis if analysis is not None else AnalysisConfig.default()
    params = params if params is not None else BM25Params()
    doc_lengths: dict[str, int] = {}
    postings: dict[str, list[tuple[str, int]]] = {}
    for article_id in sorted(corpus.articles):
        tokens = tokenize(corpus.articles[article_id].text, analysis)
        doc_lengths[article_id] = len(tokens)
        for term, tf in Counter(tokens).items():
            postings.setdefault(term, []).append((article_id, tf))
    index = InvertedIndex(
        postings={t: tuple(p) for t, p in sorted(postings.items())},
        doc_lengths=doc_lengths,
        params=params,
        analysis=analysis,
    )
    index.check_invariants()
    return index


def bm25_score(index: InvertedIndex, query_tokens: Sequence[str], doc_id: str) -> float:
    if doc_id not in index.doc_lengths:
        raise UnknownIdError("document", doc_id)
    k1, b = index.params.k1, index.params.b
    doc_len = index.doc_lengths[doc_id]
    score = 0.0
    for term in query_tokens:
        tf = index._tf.get(term, {}).get(doc_id)
        if tf:
            score += index._idf[term] * tf_component(tf, doc_len, index.avg_doc_length, k1, b)
    return score


def bm25_scores(index: InvertedIndex, query_tokens: Sequence[str]) -> dict[str, float]:
    """Term-at-a-time accumulation; repeated query tokens count once per occurrence."""
    k1, b = index.params.k1, index.params.b
    avg = index.avg_doc_length
    lengths = index.doc_lengths
    acc: dict[str, float] = {}
    for term in query_tokens:
        posting = index.postings.get(term)
        if not posting:
            continue
        term_idf = index._idf[term]
        for doc_id, tf in posting:
            acc[doc_id] = acc.get(doc_id, 0.0) + term_idf * tf_component(tf, lengths[doc_id], avg, k1, b)
    return acc


def bm25_search(index: InvertedIndex, query_tokens: Sequence[str], top_k: int) -> RankedList:
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    scores = bm25_scores(index, query_tokens)
    return RankedList.from_scores({d: s for d, s in scores.items() if s > 0}, top_k)
