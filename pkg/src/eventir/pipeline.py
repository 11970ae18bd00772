"""End-to-end two-stage retrieval.

Stage one fuses the entity-matching and BM25 article rankings with RRF and
keeps the top-K articles. Stage two scores every image linked to those
articles in both embedding slots, applies the rank-aware boost, and fuses
the two per-model rankings with RRF again.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from eventir.config import SLOT_NAMES, PipelineConfig, load_config
from eventir.corpus import Corpus, Query, load_corpus
from eventir.entities import (
    Entity,
    EntityIndex,
    EntityWeightTable,
    Gazetteer,
    SynonymTable,
    build_entity_index,
    default_weight_table,
    entity_search,
    expand_entities,
    extract_entities,
    load_gazetteer,
    load_synonyms,
)
from eventir.errors import ConfigError, DataError, InvariantViolation
from eventir.fusion import BoostParams, Candidate, rerank_single, rrf
from eventir.lexical import BM25Params, InvertedIndex, bm25_search, build_index
from eventir.persist import load_entity_index, load_index
from eventir.ranking import RankedList
from eventir.text import AnalysisConfig, default_stopwords, load_stopwords
from eventir.vectors import EmbeddingMatrix, load_embeddings, similarities

log = logging.getLogger(__name__)

__all__ = ["PipelineConfig", "QueryTrace", "RetrievalSystem", "Slot", "load_config"]

LEXICAL_INDEX_FILE = "lexical.eidx"
ENTITY_INDEX_FILE = "entity.eidx"


class MissingQueryEmbeddingError(DataError):
    pass


@dataclass(frozen=True)
class Slot:
    """One reranking model: its image and query embedding spaces plus boost params."""

    name: str
    images: EmbeddingMatrix
    queries: EmbeddingMatrix
    boost: BoostParams = field(default_factory=BoostParams)


@dataclass
class QueryTrace:
    query_id: str
    entities: list[Entity]
    entity_branch: RankedList
    bm25_branch: RankedList
    fused_articles: RankedList
    candidates: dict[str, int]
    dropped_candidates: list[str]
    model_rankings: dict[str, RankedList]
    final: RankedList
    timings_ms: dict[str, float]
    total_ms: float

    def to_dict(self) -> dict:
        def rl(r: RankedList):
            return [[i, s] for i, s in r]

        return {
            "query_id": self.query_id,
            "entities": [e.to_dict() for e in self.entities],
            "entity_branch": rl(self.entity_branch),
            "bm25_branch": rl(self.bm25_branch),
            "fused_articles": rl(self.fused_articles),
            "candidates": self.candidates,
            "dropped_candidates": self.dropped_candidates,
            "model_rankings": {k: rl(v) for k, v in self.model_rankings.items()},
            "final": rl(self.final),
            "timings_ms": self.timings_ms,
            "total_ms": self.total_ms,
        }


class _Clock:
    """Contiguous stage timer: stage durations sum exactly to the total."""

    def __init__(self):
        self.start = self.last = time.perf_counter()
        self.stages: dict[str, float] = {}

    def lap(self, name: str) -> None:
        now = time.perf_counter()
        self.stages[name] = (now - self.last) * 1000.0
        self.last = now

    @property
    def total_ms(self) -> float:
        return (self.last - self.start) * 1000.0


def link_images(corpus: Corpus) -> dict[str, tuple[str, ...]]:
    """article id -> linked image ids, from both sides of the link."""
    links: dict[str, list[str]] = {aid: list(a.image_ids) for aid, a in corpus.articles.items()}
    for iid in sorted(corpus.images):
        for aid in corpus.images[iid].article_ids:
            if iid not in links[aid]:
                links[aid].append(iid)
    return {aid: tuple(ids) for aid, ids in links.items()}


class RetrievalSystem:
    """Immutable shared state for answering queries."""

    def __init__(self, corpus: Corpus, index: InvertedIndex, entity_index: EntityIndex,
                 slots: Sequence[Slot] = (), *, weights: EntityWeightTable | None = None,
                 synonyms: Mapping | None = None, gazetteer: Gazetteer | None = None,
                 rrf_k: float = 60.0, top_k_articles: int = 30, top_n_images: int = 10,
                 branch_depth: int = 100):
        self.corpus = corpus
        self.index = index
        self.entity_index = entity_index
        self.slots = tuple(slots)
        self.weights = weights or default_weight_table()
        self.synonyms = synonyms if synonyms is not None else SynonymTable()
        self.gazetteer = gazetteer
        self.rrf_k = rrf_k
        self.top_k_articles = top_k_articles
        self.top_n_images = top_n_images
        self.branch_depth = max(branch_depth, top_k_articles)
        self.links = link_images(corpus)

    @classmethod
    def from_config(cls, config: PipelineConfig, *, need_slots: bool = True) -> RetrievalSystem:
        required = ["articles", "images"]
        if need_slots:
            required += [f"slots.{n}.{kind}" for n in SLOT_NAMES for kind in ("images", "queries")]
        config.check_files(*required)
        gazetteer = load_gazetteer(config.gazetteer) if config.gazetteer else None
        corpus = load_corpus(config.articles, config.images, config.entities)
        corpus = ensure_article_entities(corpus, gazetteer)
        analysis = AnalysisConfig(
            load_stopwords(config.stopwords) if config.stopwords else default_stopwords(),
            config.stem,
        )
        params = BM25Params(config.k1, config.b)
        index, entity_index = _load_or_build_indexes(config, corpus, analysis, params)
        slots = []
        if need_slots:
            for name in SLOT_NAMES:
                sc = config.slots[name]
                images = load_embeddings(sc.images)
                queries = load_embeddings(sc.queries)
                if images.dim != queries.dim:
                    raise DataError(f"slot {name}: image dim {images.dim} != query dim {queries.dim}")
                if sc.model_tag is not None:
                    for m, label in ((images, "images"), (queries, "queries")):
                        if m.model_tag != sc.model_tag:
                            raise DataError(
                                f"slot {name} {label}: model tag {m.model_tag!r}, expected {sc.model_tag!r}"
                            )
                elif images.model_tag != queries.model_tag:
                    raise DataError(f"slot {name}: image/query model tags differ")
                slots.append(Slot(name, images, queries, sc.boost))
        return cls(
            corpus, index, entity_index, slots,
            weights=default_weight_table().with_overrides(config.entity_weights),
            synonyms=load_synonyms(config.synonyms) if config.synonyms else SynonymTable(),
            gazetteer=gazetteer,
            rrf_k=config.rrf_k,
            top_k_articles=config.top_k_articles,
            top_n_images=config.top_n_images,
            branch_depth=config.branch_depth,
        )

    def query_entities(self, query: Query) -> list[Entity]:
        ents = list(query.entities)
        if not ents and self.gazetteer is not None:
            ents = extract_entities(query.text, self.gazetteer)
        return expand_entities(ents, self.synonyms)

    def stage_one(self, query: Query, entities: Sequence[Entity] | None = None):
        """Return ``(entity_branch, bm25_branch, fused_top_k)``."""
        if entities is None:
            entities = self.query_entities(query)
        ent = entity_search(self.entity_index, entities, self.weights, self.branch_depth)
        lex = bm25_search(self.index, self.index.tokenize(query.text), self.branch_depth)
        return ent, lex, self._fuse_articles(ent, lex)

    def _fuse_articles(self, ent: RankedList, lex: RankedList) -> RankedList:
        # An empty branch contributes nothing, so entity-less queries reduce to BM25 only.
        branches = [r for r in (ent, lex) if len(r)]
        if not branches:
            return RankedList()
        return rrf(branches, self.rrf_k).top(self.top_k_articles)

    def candidates(self, fused_articles: RankedList) -> dict[str, int]:
        """image id -> best (smallest) rank among its retained articles."""
        out: dict[str, int] = {}
        for rank, (aid, _) in enumerate(fused_articles, start=1):
            for iid in self.links.get(aid, ()):
                out.setdefault(iid, rank)
        return out

    def retrieve(self, query: Query, trace: bool = False):
        if not self.slots:
            raise ConfigError("no embedding slots loaded; full retrieval needs both slots")
        clock = _Clock()
        entities = self.query_entities(query)
        ent = entity_search(self.entity_index, entities, self.weights, self.branch_depth)
        clock.lap("entity_branch")
        lex = bm25_search(self.index, self.index.tokenize(query.text), self.branch_depth)
        clock.lap("bm25_branch")
        fused = self._fuse_articles(ent, lex)
        clock.lap("article_fusion")

        ranks = self.candidates(fused)
        for slot in self.slots:
            if query.id not in slot.queries:
                raise MissingQueryEmbeddingError(f"query {query.id!r} missing from slot {slot.name} embeddings")
        dropped = sorted(i for i in ranks if any(i not in s.images for s in self.slots))
        if dropped:
            log.warning("query %s: %d candidate images lack embeddings; dropped", query.id, len(dropped))
        dropped_set = set(dropped)
        kept = [i for i in ranks if i not in dropped_set]
        clock.lap("candidates")

        sims = {s.name: similarities(s.images, s.queries.vector(query.id), kept) for s in self.slots}
        clock.lap("similarity")

        model_rankings = {
            s.name: rerank_single([Candidate(i, sims[s.name][i], ranks[i]) for i in kept], s.boost)
            for s in self.slots
        }
        final = rrf(list(model_rankings.values()), self.rrf_k).top(self.top_n_images) if kept else RankedList()
        clock.lap("rerank")

        if len(final) > self.top_n_images or any(i not in ranks for i in final.ids):
            raise InvariantViolation(f"query {query.id!r}: final list escapes the candidate set")
        if not trace:
            return final
        return final, QueryTrace(
            query_id=query.id,
            entities=entities,
            entity_branch=ent,
            bm25_branch=lex,
            fused_articles=fused,
            candidates=ranks,
            dropped_candidates=dropped,
            model_rankings=model_rankings,
            final=final,
            timings_ms=clock.stages,
            total_ms=clock.total_ms,
        )

    def retrieve_all(self, queries: Sequence[Query], workers: int = 1) -> list[tuple[str, RankedList]]:
        """Results in input order regardless of worker scheduling."""
        if workers <= 1:
            results = [self.retrieve(q) for q in queries]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(self.retrieve, queries))
        return [(q.id, r) for q, r in zip(queries, results)]


def ensure_article_entities(corpus: Corpus, gazetteer: Gazetteer | None) -> Corpus:
    """Fill empty article entity lists by gazetteer extraction over title + body."""
    if gazetteer is None:
        return corpus
    extracted = {aid: extract_entities(a.text, gazetteer)
                 for aid, a in corpus.articles.items() if not a.entities}
    return corpus.with_entities(extracted) if extracted else corpus


def build_indexes(corpus: Corpus, analysis: AnalysisConfig, params: BM25Params):
    entity_lists = {aid: a.entities for aid, a in corpus.articles.items()}
    return build_index(corpus, analysis, params), build_entity_index(entity_lists)


def _load_or_build_indexes(config: PipelineConfig, corpus: Corpus, analysis: AnalysisConfig,
                           params: BM25Params):
    if config.index_dir is not None:
        lex_path = Path(config.index_dir) / LEXICAL_INDEX_FILE
        ent_path = Path(config.index_dir) / ENTITY_INDEX_FILE
        if lex_path.exists() and ent_path.exists():
            index = load_index(lex_path)
            if set(index.doc_lengths) != set(corpus.articles):
                raise DataError(f"{lex_path} was built from a different corpus; re-run `index`")
            if index.params != params or index.analysis != analysis:
                raise DataError(f"{lex_path} was built with different analysis/BM25 settings; re-run `index`")
            return index, load_entity_index(ent_path)
    return build_indexes(corpus, analysis, params)
