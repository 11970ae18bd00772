"""The ranked-list carrier passed between retrieval stages."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from eventir.errors import InvariantViolation


@dataclass(frozen=True)
class RankedList:
    """Ordered ``(id, score)`` entries; rank of ``entries[i]`` is ``i + 1``.

    IDs are unique and scores non-increasing. Use :meth:`from_scores` to
    build one from an unordered score map with the standard tie-break
    (descending score, then ascending id).
    """

    entries: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        entries = tuple((str(i), float(s)) for i, s in self.entries)
        object.__setattr__(self, "entries", entries)
        seen = set()
        prev = float("inf")
        for doc_id, score in entries:
            if doc_id in seen:
                raise InvariantViolation(f"duplicate id {doc_id!r} in ranked list")
            if score > prev:
                raise InvariantViolation(f"scores increase at {doc_id!r}")
            seen.add(doc_id)
            prev = score

    @classmethod
    def from_scores(cls, scores: Mapping[str, float], top_k: int | None = None) -> RankedList:
        ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
        if top_k is not None:
            ordered = ordered[:top_k]
        return cls(tuple(ordered))

    @classmethod
    def from_ids(cls, ids: Iterable[str]) -> RankedList:
        """Wrap a bare ID ordering; scores are synthesized as ``-rank``."""
        return cls(tuple((doc_id, -float(rank)) for rank, doc_id in enumerate(ids, start=1)))

    @property
    def ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.entries]

    @property
    def scores(self) -> list[float]:
        return [score for _, score in self.entries]

    def ranks(self) -> dict[str, int]:
        return {doc_id: rank for rank, (doc_id, _) in enumerate(self.entries, start=1)}

    def top(self, n: int) -> RankedList:
        return RankedList(self.entries[:n])

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[str, float]]:
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]
