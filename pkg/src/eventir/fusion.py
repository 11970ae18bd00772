"""Reciprocal rank fusion and sigmoid rank-aware boosting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from eventir.errors import DataError
from eventir.ranking import RankedList


DEFAULT_RRF_K = 60.0


@dataclass(frozen=True)
class BoostParams:
    alpha: float = 10.0  # similarity weight
    beta: float = 0.5  # article-rank weight
    gamma: float = 0.2  # maximum boost

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class Candidate:
    image_id: str
    similarity: float
    article_rank: int

    def __post_init__(self):
        if self.article_rank < 1:
            raise ValueError(f"article_rank must be >= 1, got {self.article_rank}")


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def boost_score(c: Candidate, p: BoostParams) -> float:
    return sigmoid(p.alpha * c.similarity - p.beta * math.log(c.article_rank)) * p.gamma


def final_score(c: Candidate, p: BoostParams) -> float:
    return c.similarity + boost_score(c, p)


def rrf(rankings: Sequence[RankedList], k: float = DEFAULT_RRF_K) -> RankedList:
    """Sum of ``1 / (k + rank)`` over the lists containing each id.

    Contributions are summed with ``math.fsum`` so the result does not
    depend on the order of ``rankings``.
    """
    if not rankings:
        raise ValueError("rrf needs at least one ranking")
    if not k > 0:
        raise ValueError(f"rrf k must be positive, got {k}")
    terms: dict[str, list[float]] = {}
    for ranking in rankings:
        for rank, (doc_id, _) in enumerate(ranking, start=1):
            terms.setdefault(doc_id, []).append(1.0 / (k + rank))
    return RankedList.from_scores({d: math.fsum(t) for d, t in terms.items()})


def rerank_single(candidates: Sequence[Candidate], p: BoostParams) -> RankedList:
    return RankedList.from_scores({c.image_id: final_score(c, p) for c in candidates})


def rerank_dual(candidates_a: Sequence[Candidate], candidates_b: Sequence[Candidate],
                p: BoostParams, rrf_k: float = DEFAULT_RRF_K, top_n: int = 10,
                p_b: BoostParams | None = None) -> RankedList:
    """Boost and rank each model's candidates, then fuse the two rankings.

    ``p_b`` overrides the boost parameters for the second model.
    """
    ids_a = {c.image_id for c in candidates_a}
    ids_b = {c.image_id for c in candidates_b}
    if ids_a != ids_b or len(ids_a) != len(candidates_a) or len(ids_b) != len(candidates_b):
        raise DataError(
            f"candidate sets differ: {len(ids_a - ids_b)} only in A, {len(ids_b - ids_a)} only in B"
        )
    ranked_a = rerank_single(candidates_a, p)
    ranked_b = rerank_single(candidates_b, p_b or p)
    return rrf([ranked_a, ranked_b], rrf_k).top(top_n)
