"""mAP, mRR and Recall@K over run files."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from eventir.corpus import iter_records, write_records
from eventir.errors import DuplicateIdError, EmptyRelevantSetError, MalformedRecordError
from eventir.ranking import RankedList

log = logging.getLogger(__name__)

DEFAULT_KS = (1, 5, 10)


def _ids(ranking) -> list[str]:
    return ranking.ids if isinstance(ranking, RankedList) else list(ranking)


def _check(relevant) -> None:
    if not relevant:
        raise EmptyRelevantSetError("<ranking>")


def average_precision(ranking, relevant) -> float:
    _check(relevant)
    hits = 0
    total = 0.0
    for i, doc_id in enumerate(_ids(ranking), start=1):
        if doc_id in relevant:
            hits += 1
            total += hits / i
    return total / len(relevant)


def reciprocal_rank(ranking, relevant) -> float:
    _check(relevant)
    for i, doc_id in enumerate(_ids(ranking), start=1):
        if doc_id in relevant:
            return 1.0 / i
    return 0.0


def recall_at(ranking, relevant, k: int) -> float:
    _check(relevant)
    if k < 1:
        raise ValueError("k must be >= 1")
    top = set(_ids(ranking)[:k])
    return len(top & set(relevant)) / len(relevant)


@dataclass
class QueryMetrics:
    ap: float
    rr: float
    recall: dict[int, float]
    missing: bool = False


@dataclass
class MetricReport:
    map_score: float
    mrr_score: float
    recall_at: dict[int, float]
    per_query: dict[str, QueryMetrics] = field(default_factory=dict)
    missing_queries: list[str] = field(default_factory=list)
    ignored_queries: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mAP": self.map_score,
            "mRR": self.mrr_score,
            "recall": {str(k): v for k, v in self.recall_at.items()},
            "num_queries": len(self.per_query),
            "missing_queries": self.missing_queries,
            "ignored_queries": self.ignored_queries,
            "per_query": {
                qid: {"ap": m.ap, "rr": m.rr, "recall": {str(k): v for k, v in m.recall.items()},
                      "missing": m.missing}
                for qid, m in self.per_query.items()
            },
        }

    def summary(self) -> str:
        lines = [
            f"queries  {len(self.per_query)}",
            f"mAP      {self.map_score:.4f}",
            f"mRR      {self.mrr_score:.4f}",
        ]
        lines += [f"R@{k:<7d}{v:.4f}" for k, v in self.recall_at.items()]
        if self.missing_queries:
            lines.append(f"missing  {len(self.missing_queries)} queries scored as empty")
        if self.ignored_queries:
            lines.append(f"ignored  {len(self.ignored_queries)} run queries without ground truth")
        return "\n".join(lines)


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def evaluate_run(run: Mapping[str, Sequence[str] | RankedList],
                 truth: Mapping[str, Iterable[str]],
                 ks: Sequence[int] = DEFAULT_KS) -> MetricReport:
    ks = sorted(set(ks))
    per_query: dict[str, QueryMetrics] = {}
    missing = []
    for qid in sorted(truth):
        relevant = frozenset(truth[qid])
        if not relevant:
            raise EmptyRelevantSetError(qid)
        ranking = run.get(qid)
        if ranking is None:
            missing.append(qid)
            ranking = []
        per_query[qid] = QueryMetrics(
            ap=average_precision(ranking, relevant),
            rr=reciprocal_rank(ranking, relevant),
            recall={k: recall_at(ranking, relevant, k) for k in ks},
            missing=qid not in run,
        )
    ignored = sorted(q for q in run if q not in truth)
    if missing:
        log.warning("%d queries have no system output; scored as empty", len(missing))
    if ignored:
        log.warning("%d run queries have no ground truth; ignored", len(ignored))
    return MetricReport(
        map_score=_mean([m.ap for m in per_query.values()]),
        mrr_score=_mean([m.rr for m in per_query.values()]),
        recall_at={k: _mean([m.recall[k] for m in per_query.values()]) for k in ks},
        per_query=per_query,
        missing_queries=missing,
        ignored_queries=ignored,
    )


def load_run(path: str | Path) -> dict[str, list[str]]:
    run: dict[str, list[str]] = {}
    for line_no, rec in iter_records(path):
        qid = rec.get("query_id")
        ids = rec.get("image_ids")
        if not isinstance(qid, str) or not qid:
            raise MalformedRecordError(path, line_no, "missing or invalid 'query_id'")
        if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
            raise MalformedRecordError(path, line_no, "'image_ids' must be a list of strings")
        if len(set(ids)) != len(ids):
            raise MalformedRecordError(path, line_no, f"query {qid!r} lists an image twice")
        if qid in run:
            raise DuplicateIdError("run query", qid)
        run[qid] = ids
    return run


def save_run(run: Iterable[tuple[str, Sequence[str]]], path: str | Path) -> None:
    """Write ``(query_id, image_ids)`` pairs in the given order."""
    write_records(path, ({"query_id": qid, "image_ids": list(ids)} for qid, ids in run))


def save_report(report: MetricReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
