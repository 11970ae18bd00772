"""Entity-guided two-stage event image retrieval."""

from eventir.corpus import Article, Corpus, ImageRecord, Query, load_corpus, load_ground_truth
from eventir.entities import Entity, EntityType, default_weight_table
from eventir.evaluation import evaluate_run
from eventir.fusion import BoostParams, Candidate, boost_score, final_score, rerank_dual, rrf
from eventir.lexical import bm25_search, build_index
from eventir.pipeline import PipelineConfig, RetrievalSystem
from eventir.ranking import RankedList
from eventir.vectors import EmbeddingMatrix, cosine_topk, load_embeddings, save_embeddings

__all__ = [
    "Article",
    "BoostParams",
    "Candidate",
    "Corpus",
    "EmbeddingMatrix",
    "Entity",
    "EntityType",
    "ImageRecord",
    "PipelineConfig",
    "Query",
    "RankedList",
    "RetrievalSystem",
    "bm25_search",
    "boost_score",
    "build_index",
    "cosine_topk",
    "default_weight_table",
    "evaluate_run",
    "final_score",
    "load_corpus",
    "load_embeddings",
    "load_ground_truth",
    "rerank_dual",
    "rrf",
    "save_embeddings",
]
