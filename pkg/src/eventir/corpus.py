"""Corpus, query and ground-truth ingestion (line-delimited JSON records)."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from eventir.entities import Entity, dedupe
from eventir.errors import (
    DanglingReferenceError,
    DuplicateIdError,
    EmptyRelevantSetError,
    MalformedRecordError,
)


@dataclass(frozen=True)
class Article:
    id: str
    title: str
    body: str
    image_ids: tuple[str, ...] = ()
    entities: tuple[Entity, ...] = ()

    @property
    def text(self) -> str:
        return f"{self.title} {self.body}"

    def to_record(self) -> dict:
        rec = {"id": self.id, "title": self.title, "body": self.body, "image_ids": list(self.image_ids)}
        if self.entities:
            rec["entities"] = [e.to_dict() for e in self.entities]
        return rec


@dataclass(frozen=True)
class ImageRecord:
    id: str
    article_ids: tuple[str, ...]
    caption: str | None = None

    def to_record(self) -> dict:
        rec = {"id": self.id, "article_ids": list(self.article_ids)}
        if self.caption is not None:
            rec["caption"] = self.caption
        return rec


@dataclass(frozen=True)
class Query:
    id: str
    text: str
    entities: tuple[Entity, ...] = ()

    def to_record(self) -> dict:
        rec = {"id": self.id, "text": self.text}
        if self.entities:
            rec["entities"] = [e.to_dict() for e in self.entities]
        return rec


@dataclass(frozen=True)
class Corpus:
    articles: Mapping[str, Article] = field(default_factory=dict)
    images: Mapping[str, ImageRecord] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "articles", MappingProxyType(dict(self.articles)))
        object.__setattr__(self, "images", MappingProxyType(dict(self.images)))

    def images_of(self, article_id: str) -> tuple[str, ...]:
        return self.articles[article_id].image_ids

    def with_entities(self, entities: Mapping[str, Iterable[Entity]]) -> Corpus:
        """Replace article entity lists for the owners present in ``entities``."""
        articles = {
            aid: replace(a, entities=tuple(dedupe(entities[aid]))) if aid in entities else a
            for aid, a in self.articles.items()
        }
        return Corpus(articles, self.images)


def iter_records(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield ``(line_no, record)`` for each non-blank line; records must be JSON objects."""
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecordError(path, line_no, f"invalid JSON: {exc.msg}") from None
            if not isinstance(rec, dict):
                raise MalformedRecordError(path, line_no, "record is not an object")
            yield line_no, rec


def _str_field(rec, name, path, line_no, required=True, allow_empty=True):
    if name not in rec or rec[name] is None:
        if required:
            raise MalformedRecordError(path, line_no, f"missing field {name!r}")
        return None
    value = rec[name]
    if not isinstance(value, str):
        raise MalformedRecordError(path, line_no, f"field {name!r} must be a string")
    if not allow_empty and not value.strip():
        raise MalformedRecordError(path, line_no, f"field {name!r} must be non-empty")
    return value


def _str_list(rec, name, path, line_no, required=True) -> list[str]:
    if name not in rec:
        if required:
            raise MalformedRecordError(path, line_no, f"missing field {name!r}")
        return []
    value = rec[name]
    if not isinstance(value, list) or not all(isinstance(v, str) and v for v in value):
        raise MalformedRecordError(path, line_no, f"field {name!r} must be a list of non-empty strings")
    return value


def _entity_list(rec, path, line_no, name="entities") -> tuple[Entity, ...]:
    raw = rec.get(name)
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise MalformedRecordError(path, line_no, f"field {name!r} must be a list")
    out = []
    for item in raw:
        if not isinstance(item, dict) or not isinstance(item.get("text"), str) or "type" not in item:
            raise MalformedRecordError(path, line_no, "entities must be objects with 'text' and 'type'")
        try:
            out.append(Entity.from_dict(item))
        except ValueError as exc:
            raise MalformedRecordError(path, line_no, str(exc)) from None
    return tuple(dedupe(out))


def load_articles(path: str | Path) -> dict[str, Article]:
    articles: dict[str, Article] = {}
    for line_no, rec in iter_records(path):
        aid = _str_field(rec, "id", path, line_no, allow_empty=False)
        if aid in articles:
            raise DuplicateIdError("article", aid)
        image_ids = _str_list(rec, "image_ids", path, line_no)
        if len(set(image_ids)) != len(image_ids):
            raise MalformedRecordError(path, line_no, f"article {aid!r} lists an image twice")
        articles[aid] = Article(
            id=aid,
            title=_str_field(rec, "title", path, line_no),
            body=_str_field(rec, "body", path, line_no),
            image_ids=tuple(image_ids),
            entities=_entity_list(rec, path, line_no),
        )
    return articles


def load_images(path: str | Path, articles: Mapping[str, Article]) -> dict[str, ImageRecord]:
    images: dict[str, ImageRecord] = {}
    for line_no, rec in iter_records(path):
        iid = _str_field(rec, "id", path, line_no, allow_empty=False)
        if iid in images:
            raise DuplicateIdError("image", iid)
        article_ids = _str_list(rec, "article_ids", path, line_no)
        if not article_ids:
            raise MalformedRecordError(path, line_no, f"image {iid!r} has no article_ids")
        for aid in article_ids:
            if aid not in articles:
                raise DanglingReferenceError(iid, aid)
        images[iid] = ImageRecord(
            id=iid,
            article_ids=tuple(dict.fromkeys(article_ids)),
            caption=_str_field(rec, "caption", path, line_no, required=False),
        )
    return images


def load_entity_sidecar(path: str | Path) -> dict[str, list[Entity]]:
    """owner_id -> entities. Repeated owners accumulate."""
    out: dict[str, list[Entity]] = defaultdict(list)
    for line_no, rec in iter_records(path):
        owner = _str_field(rec, "owner_id", path, line_no, allow_empty=False)
        if "entities" not in rec:
            raise MalformedRecordError(path, line_no, "missing field 'entities'")
        out[owner].extend(_entity_list(rec, path, line_no))
    return {k: dedupe(v) for k, v in out.items()}


def load_corpus(articles_path: str | Path, images_path: str | Path,
                entities_path: str | Path | None = None) -> Corpus:
    """Load and cross-check a corpus. Sidecar entities replace embedded ones."""
    articles = load_articles(articles_path)
    images = load_images(images_path, articles)
    corpus = Corpus(articles, images)
    if entities_path is not None:
        sidecar = load_entity_sidecar(entities_path)
        corpus = corpus.with_entities({k: v for k, v in sidecar.items() if k in articles})
    return corpus


def save_corpus(corpus: Corpus, articles_path: str | Path, images_path: str | Path) -> None:
    write_records(articles_path, (a.to_record() for a in corpus.articles.values()))
    write_records(images_path, (i.to_record() for i in corpus.images.values()))


def load_queries(path: str | Path, entities_path: str | Path | None = None) -> list[Query]:
    queries: list[Query] = []
    seen = set()
    for line_no, rec in iter_records(path):
        qid = _str_field(rec, "id", path, line_no, allow_empty=False)
        if qid in seen:
            raise DuplicateIdError("query", qid)
        seen.add(qid)
        queries.append(Query(qid, _str_field(rec, "text", path, line_no), _entity_list(rec, path, line_no)))
    if entities_path is not None:
        sidecar = load_entity_sidecar(entities_path)
        queries = [replace(q, entities=tuple(sidecar[q.id])) if q.id in sidecar else q for q in queries]
    return queries


def load_ground_truth(path: str | Path) -> dict[str, frozenset[str]]:
    truth: dict[str, set[str]] = defaultdict(set)
    for line_no, rec in iter_records(path):
        qid = _str_field(rec, "query_id", path, line_no, allow_empty=False)
        image_ids = _str_list(rec, "image_ids", path, line_no)
        if not image_ids:
            raise EmptyRelevantSetError(qid)
        truth[qid].update(image_ids)
    return {qid: frozenset(ids) for qid, ids in truth.items()}


def write_records(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True, separators=(",", ":")))
            fh.write("\n")
