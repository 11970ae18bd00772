"""EIDX binary persistence for the lexical and entity indexes.

Layout (all integers little-endian)::

    b"EIDX" | u32 version | u8 kind
    kind 0 (lexical): f64 k1 | f64 b | u8 stem | u32 n_stop, n_stop x str
                      | u32 n_docs, n_docs x (str id, u32 length)
                      | u32 n_terms, n_terms x (str term, u32 n, n x (u32 doc_ordinal, u32 tf))
    kind 1 (entity):  u32 doc_count | u32 n_terms, n_terms x (str canonical, u32 n, n x str id)

``str`` is ``u32 byte length + UTF-8``. Doc ordinals index the doc table,
which is written in ascending id order. Everything is written in sorted
order so equal indexes serialize to equal bytes.
"""

from __future__ import annotations

import struct
from pathlib import Path

from eventir.entities import EntityIndex
from eventir.errors import IndexFormatError
from eventir.lexical import BM25Params, InvertedIndex
from eventir.text import AnalysisConfig

MAGIC = b"EIDX"
VERSION = 1
KIND_LEXICAL = 0
KIND_ENTITY = 1


class _Writer:
    def __init__(self):
        self.parts: list[bytes] = []

    def u8(self, v):
        self.parts.append(struct.pack("<B", v))

    def u32(self, v):
        self.parts.append(struct.pack("<I", v))

    def f64(self, v):
        self.parts.append(struct.pack("<d", v))

    def str(self, s: str):
        raw = s.encode("utf-8")
        self.u32(len(raw))
        self.parts.append(raw)

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, buf: bytes, path):
        self.buf = buf
        self.pos = 0
        self.path = path

    def _take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise IndexFormatError(f"{self.path}: truncated index file")
        chunk = self.buf[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self._take(1)[0]

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self._take(8))[0]

    def str(self) -> str:
        try:
            return self._take(self.u32()).decode("utf-8")
        except UnicodeDecodeError:
            raise IndexFormatError(f"{self.path}: invalid UTF-8 string") from None

    def finish(self):
        if self.pos != len(self.buf):
            raise IndexFormatError(f"{self.path}: {len(self.buf) - self.pos} trailing bytes")


def _header(kind: int) -> _Writer:
    w = _Writer()
    w.parts.append(MAGIC)
    w.u32(VERSION)
    w.u8(kind)
    return w


def _open(path, kind: int) -> _Reader:
    buf = Path(path).read_bytes()
    if buf[:4] != MAGIC:
        raise IndexFormatError(f"{path}: bad magic {buf[:4]!r}")
    r = _Reader(buf, path)
    r.pos = 4
    version = r.u32()
    if version != VERSION:
        raise IndexFormatError(f"{path}: unsupported index version {version}")
    found = r.u8()
    if found != kind:
        raise IndexFormatError(f"{path}: index kind {found}, expected {kind}")
    return r


def dump_index(index: InvertedIndex) -> bytes:
    w = _header(KIND_LEXICAL)
    w.f64(index.params.k1)
    w.f64(index.params.b)
    w.u8(1 if index.analysis.stem else 0)
    stop = sorted(index.analysis.stopwords)
    w.u32(len(stop))
    for s in stop:
        w.str(s)
    doc_ids = sorted(index.doc_lengths)
    ordinal = {d: i for i, d in enumerate(doc_ids)}
    w.u32(len(doc_ids))
    for d in doc_ids:
        w.str(d)
        w.u32(index.doc_lengths[d])
    terms = sorted(index.postings)
    w.u32(len(terms))
    for t in terms:
        w.str(t)
        posting = index.postings[t]
        w.u32(len(posting))
        for d, tf in posting:
            w.u32(ordinal[d])
            w.u32(tf)
    return w.getvalue()


def save_index(index: InvertedIndex, path: str | Path) -> None:
    Path(path).write_bytes(dump_index(index))


def load_index(path: str | Path) -> InvertedIndex:
    r = _open(path, KIND_LEXICAL)
    params = BM25Params(r.f64(), r.f64())
    stem = bool(r.u8())
    stopwords = frozenset(r.str() for _ in range(r.u32()))
    doc_ids = []
    doc_lengths = {}
    for _ in range(r.u32()):
        d = r.str()
        doc_ids.append(d)
        doc_lengths[d] = r.u32()
    postings = {}
    for _ in range(r.u32()):
        t = r.str()
        entries = []
        for _ in range(r.u32()):
            o = r.u32()
            if o >= len(doc_ids):
                raise IndexFormatError(f"{path}: doc ordinal {o} out of range")
            entries.append((doc_ids[o], r.u32()))
        postings[t] = tuple(entries)
    r.finish()
    index = InvertedIndex(postings, doc_lengths, params, AnalysisConfig(stopwords, stem))
    try:
        index.check_invariants()
    except Exception as exc:
        raise IndexFormatError(f"{path}: {exc}") from None
    return index


def save_entity_index(index: EntityIndex, path: str | Path) -> None:
    w = _header(KIND_ENTITY)
    w.u32(index.doc_count)
    w.u32(len(index.postings))
    for canonical in sorted(index.postings):
        ids = index.postings[canonical]
        w.str(canonical)
        w.u32(len(ids))
        for d in ids:
            w.str(d)
    Path(path).write_bytes(w.getvalue())


def load_entity_index(path: str | Path) -> EntityIndex:
    r = _open(path, KIND_ENTITY)
    doc_count = r.u32()
    postings = {}
    for _ in range(r.u32()):
        c = r.str()
        postings[c] = tuple(r.str() for _ in range(r.u32()))
    r.finish()
    return EntityIndex(postings, doc_count)
