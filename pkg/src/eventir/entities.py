"""Entities: gazetteer extraction, type weighting, synonym expansion and
the entity-matching retrieval branch."""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from eventir.errors import DataError, MalformedRecordError
from eventir.ranking import RankedList
from eventir.text import tokenize


class EntityType(str, enum.Enum):
    PERSON = "PERSON"
    ORG = "ORG"
    GPE = "GPE"
    CARDINAL = "CARDINAL"
    DATE = "DATE"
    TIME = "TIME"
    LOC = "LOC"
    EVENT = "EVENT"
    NORP = "NORP"
    FAC = "FAC"
    OTHER = "OTHER"

    @classmethod
    def parse(cls, label: str) -> EntityType:
        """Labels outside the declared set (e.g. spaCy's WORK_OF_ART) map to OTHER."""
        try:
            return cls(str(label).strip().upper())
        except ValueError:
            return cls.OTHER


@dataclass(frozen=True)
class Entity:
    text: str
    type: EntityType
    canonical: str = field(init=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.type, EntityType):
            object.__setattr__(self, "type", EntityType.parse(self.type))
        canonical = self.text.strip().lower()
        if not canonical:
            raise ValueError("entity text must be non-empty")
        object.__setattr__(self, "canonical", canonical)

    @property
    def key(self) -> tuple[str, EntityType]:
        return (self.canonical, self.type)

    @classmethod
    def from_dict(cls, d: Mapping) -> Entity:
        return cls(str(d["text"]), EntityType.parse(d["type"]))

    def to_dict(self) -> dict:
        return {"text": self.text, "type": self.type.value}


def dedupe(entities: Iterable[Entity]) -> list[Entity]:
    seen = set()
    out = []
    for e in entities:
        if e.key not in seen:
            seen.add(e.key)
            out.append(e)
    return out


class Gazetteer:
    """Maps lowercase surface forms to entity types.

    Matching is done on token sequences, so "york" never fires inside
    "yorkshire" and punctuation differences ("u.s." vs "u s") are ignored.
    """

    def __init__(self, entries: Mapping[str, EntityType | str]):
        self.entries: dict[str, EntityType] = {}
        self._by_tokens: dict[tuple[str, ...], str] = {}
        for surface, etype in entries.items():
            key = surface.strip().lower()
            if not key:
                raise ValueError("gazetteer keys must be non-empty")
            etype = etype if isinstance(etype, EntityType) else EntityType.parse(etype)
            self.entries.setdefault(key, etype)
            toks = tuple(tokenize(key))
            if toks:
                self._by_tokens.setdefault(toks, key)
        self.max_len = max((len(t) for t in self._by_tokens), default=0)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, surface: str) -> bool:
        return surface.strip().lower() in self.entries

    def lookup_tokens(self, tokens: tuple[str, ...]) -> str | None:
        return self._by_tokens.get(tokens)


def load_gazetteer(path: str | Path) -> Gazetteer:
    entries: dict[str, EntityType] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0].strip():
                raise MalformedRecordError(path, line_no, "expected 'surface<TAB>TYPE'")
            entries.setdefault(parts[0].strip().lower(), EntityType.parse(parts[1]))
    return Gazetteer(entries)


def extract_entities(text: str, gazetteer: Gazetteer) -> list[Entity]:
    """Leftmost-longest dictionary matching over the token sequence of ``text``."""
    tokens = tokenize(text)
    found = []
    i = 0
    while i < len(tokens):
        for length in range(min(gazetteer.max_len, len(tokens) - i), 0, -1):
            surface = gazetteer.lookup_tokens(tuple(tokens[i : i + length]))
            if surface is not None:
                found.append(Entity(surface, gazetteer.entries[surface]))
                i += length
                break
        else:
            i += 1
    return dedupe(found)


# Weights published for the four most indicative types; the rest share 1.0.
_TYPE_WEIGHTS = {
    EntityType.PERSON: 4.3,
    EntityType.ORG: 3.8,
    EntityType.CARDINAL: 3.5,
    EntityType.GPE: 3.1,
}
DEFAULT_OTHER_WEIGHT = 1.0


@dataclass(frozen=True)
class EntityWeightTable:
    weights: Mapping[EntityType, float]

    def __post_init__(self):
        weights = {EntityType.parse(k) if not isinstance(k, EntityType) else k: float(v)
                   for k, v in self.weights.items()}
        missing = [t.value for t in EntityType if t not in weights]
        if missing:
            raise ValueError(f"no weight for entity types {missing}")
        bad = {t.value: w for t, w in weights.items() if not (w > 0 and math.isfinite(w))}
        if bad:
            raise ValueError(f"entity weights must be positive and finite: {bad}")
        object.__setattr__(self, "weights", weights)

    def __getitem__(self, etype: EntityType | str) -> float:
        if not isinstance(etype, EntityType):
            etype = EntityType.parse(etype)
        return self.weights[etype]

    def with_overrides(self, overrides: Mapping[str, float]) -> EntityWeightTable:
        merged = dict(self.weights)
        for label, w in overrides.items():
            try:
                merged[EntityType(str(label).upper())] = float(w)
            except ValueError:
                raise DataError(f"unknown entity type {label!r} in weight overrides") from None
        return EntityWeightTable(merged)

    def scaled(self, c: float) -> EntityWeightTable:
        return EntityWeightTable({t: w * c for t, w in self.weights.items()})


def default_weight_table() -> EntityWeightTable:
    return EntityWeightTable({t: _TYPE_WEIGHTS.get(t, DEFAULT_OTHER_WEIGHT) for t in EntityType})


class SynonymTable(dict):
    """canonical form -> frozenset of alternative canonical forms (directed)."""

    def __init__(self, mapping: Mapping[str, Iterable[str]] | None = None):
        super().__init__()
        for form, alts in (mapping or {}).items():
            form = form.strip().lower()
            alts = frozenset(a.strip().lower() for a in alts if a.strip())
            if form in alts:
                raise ValueError(f"synonym entry {form!r} maps to itself")
            if alts:
                self[form] = self.get(form, frozenset()) | alts


def load_synonyms(path: str | Path) -> SynonymTable:
    mapping: dict[str, set[str]] = defaultdict(set)
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0].strip():
                raise MalformedRecordError(path, line_no, "expected 'form<TAB>alt1,alt2,...'")
            alts = [a for a in parts[1].split(",") if a.strip()]
            if parts[0].strip().lower() in {a.strip().lower() for a in alts}:
                raise MalformedRecordError(path, line_no, "form lists itself as a synonym")
            mapping[parts[0]].update(alts)
    return SynonymTable(mapping)


def expand_entities(entities: Sequence[Entity], table: Mapping[str, Iterable[str]]) -> list[Entity]:
    """Append each entity's synonym variants (same type) right after it.

    A variant whose canonical form is already an input is skipped, so a
    variant can never shadow an input entity of a different type.
    """
    inputs = {e.canonical for e in entities}
    seen = set()
    out = []
    for e in entities:
        if e.key in seen:
            continue
        seen.add(e.key)
        out.append(e)
        for alt in sorted(table.get(e.canonical, ())):
            variant = Entity(alt, e.type)
            if variant.key in seen or variant.canonical in inputs:
                continue
            seen.add(variant.key)
            out.append(variant)
    return out


@dataclass(frozen=True)
class EntityIndex:
    """canonical form -> sorted article IDs containing it."""

    postings: Mapping[str, tuple[str, ...]]
    doc_count: int


def build_entity_index(entity_lists: Mapping[str, Iterable[Entity]]) -> EntityIndex:
    """``entity_lists`` maps article id -> that article's entities."""
    postings: dict[str, set[str]] = defaultdict(set)
    for article_id, ents in entity_lists.items():
        for e in ents:
            postings[e.canonical].add(article_id)
    return EntityIndex(
        postings={c: tuple(sorted(ids)) for c, ids in sorted(postings.items())},
        doc_count=len(entity_lists),
    )


def _distinct_by_canonical(entities: Iterable[Entity]) -> list[Entity]:
    seen = set()
    out = []
    for e in entities:
        if e.canonical not in seen:
            seen.add(e.canonical)
            out.append(e)
    return out


def entity_scores(index: EntityIndex, query_entities: Sequence[Entity],
                  weights: EntityWeightTable) -> dict[str, float]:
    """weight(type) * ln(1 + N/df) summed over distinct matched query entities."""
    scores: dict[str, float] = {}
    n = index.doc_count
    for e in _distinct_by_canonical(query_entities):
        posting = index.postings.get(e.canonical)
        if not posting:
            continue
        contribution = weights[e.type] * math.log(1.0 + n / len(posting))
        for article_id in posting:
            scores[article_id] = scores.get(article_id, 0.0) + contribution
    return scores


def entity_search(index: EntityIndex, query_entities: Sequence[Entity],
                  weights: EntityWeightTable, top_k: int) -> RankedList:
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    scores = entity_scores(index, query_entities, weights)
    return RankedList.from_scores({k: v for k, v in scores.items() if v > 0}, top_k)
