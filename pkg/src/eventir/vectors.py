"""EVEC embedding files and exact cosine search over candidate sets.

EVEC layout (little-endian)::

    b"EVEC" | u32 version | u32 count | u32 dim | u16 tag_len + UTF-8 model_tag
    count x (u16 id_len + UTF-8 id | dim x f32)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from eventir.errors import (
    BadMagicError,
    DimensionMismatchError,
    DuplicateIdError,
    EmbeddingFormatError,
    TruncatedFileError,
    UnknownIdError,
    VersionMismatchError,
    ZeroVectorError,
)
from eventir.ranking import RankedList

MAGIC = b"EVEC"
VERSION = 1
# Rows already this close to unit norm are kept as-is so reloading is bit-stable.
_UNIT_TOLERANCE = 1e-6
_HEADER = struct.Struct("<4sIII")


def normalize_rows(vectors: np.ndarray, ids: Sequence[str]) -> np.ndarray:
    v64 = np.asarray(vectors, dtype=np.float64)
    norms = np.linalg.norm(v64, axis=1)
    for i in np.flatnonzero(~(norms > 0)):
        raise ZeroVectorError(ids[i])
    out = np.asarray(vectors, dtype=np.float32).copy()
    redo = np.abs(norms - 1.0) > _UNIT_TOLERANCE
    if redo.any():
        out[redo] = (v64[redo] / norms[redo, None]).astype(np.float32)
    return out


@dataclass(frozen=True)
class EmbeddingMatrix:
    ids: tuple[str, ...]
    vectors: np.ndarray
    model_tag: str = ""
    _row: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ids = tuple(self.ids)
        vectors = np.asarray(self.vectors, dtype=np.float32)
        if vectors.ndim != 2 or vectors.shape[0] != len(ids):
            raise DimensionMismatchError(f"expected {len(ids)} rows, got array of shape {vectors.shape}")
        if vectors.shape[1] < 1:
            raise DimensionMismatchError("embedding dim must be >= 1")
        row = {}
        for i, vid in enumerate(ids):
            if vid in row:
                raise DuplicateIdError("embedding", vid)
            row[vid] = i
        vectors = normalize_rows(vectors, ids)
        vectors.setflags(write=False)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "_row", row)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, vid: str) -> bool:
        return vid in self._row

    def vector(self, vid: str) -> np.ndarray:
        try:
            return self.vectors[self._row[vid]]
        except KeyError:
            raise UnknownIdError("embedding", vid) from None

    def rows(self, ids: Iterable[str]) -> np.ndarray:
        idx = []
        for vid in ids:
            if vid not in self._row:
                raise UnknownIdError("embedding", vid)
            idx.append(self._row[vid])
        return self.vectors[idx]


def dump_embeddings(matrix: EmbeddingMatrix) -> bytes:
    tag = matrix.model_tag.encode("utf-8")
    parts = [_HEADER.pack(MAGIC, VERSION, len(matrix), matrix.dim), struct.pack("<H", len(tag)), tag]
    vectors = matrix.vectors.astype("<f4", copy=False)
    for vid, vec in zip(matrix.ids, vectors):
        raw = vid.encode("utf-8")
        parts.append(struct.pack("<H", len(raw)))
        parts.append(raw)
        parts.append(vec.tobytes())
    return b"".join(parts)


def save_embeddings(matrix: EmbeddingMatrix, path: str | Path) -> None:
    Path(path).write_bytes(dump_embeddings(matrix))


def _parse_records(buf: bytes, pos: int, count: int, dim: int):
    """Return (ids, raw float chunks, end offset) or raise TruncatedFileError."""
    ids, chunks = [], []
    step = 4 * dim
    for _ in range(count):
        if pos + 2 > len(buf):
            raise TruncatedFileError("record header past end of file")
        (n,) = struct.unpack_from("<H", buf, pos)
        pos += 2
        if pos + n + step > len(buf):
            raise TruncatedFileError("record past end of file")
        try:
            ids.append(buf[pos : pos + n].decode("utf-8"))
        except UnicodeDecodeError:
            raise EmbeddingFormatError(f"record {len(ids)} has a non-UTF-8 id") from None
        pos += n
        chunks.append(buf[pos : pos + step])
        pos += step
    return ids, chunks, pos


def _infer_dim(buf: bytes, pos: int, count: int, header_dim: int) -> int | None:
    """Find another dim under which the records parse exactly to end of file."""
    if count == 0:
        return None
    upper = min((len(buf) - pos) // (4 * count), 1 << 16)
    for d in range(1, upper + 1):
        if d == header_dim:
            continue
        try:
            _, _, end = _parse_records(buf, pos, count, d)
        except EmbeddingFormatError:
            continue
        if end == len(buf):
            return d
    return None


def parse_embeddings(buf: bytes, source: str = "<bytes>") -> EmbeddingMatrix:
    if len(buf) < 4 or buf[:4] != MAGIC:
        raise BadMagicError(f"{source}: bad magic {buf[:4]!r}")
    if len(buf) < _HEADER.size + 2:
        raise TruncatedFileError(f"{source}: header truncated")
    _, version, count, dim = _HEADER.unpack_from(buf, 0)
    if version != VERSION:
        raise VersionMismatchError(f"{source}: format version {version}, expected {VERSION}")
    if dim < 1:
        raise DimensionMismatchError(f"{source}: header declares dim {dim}")
    pos = _HEADER.size
    (tag_len,) = struct.unpack_from("<H", buf, pos)
    pos += 2
    if pos + tag_len > len(buf):
        raise TruncatedFileError(f"{source}: model tag truncated")
    try:
        model_tag = buf[pos : pos + tag_len].decode("utf-8")
    except UnicodeDecodeError:
        raise EmbeddingFormatError(f"{source}: model tag is not UTF-8") from None
    pos += tag_len
    try:
        ids, chunks, end = _parse_records(buf, pos, count, dim)
    except TruncatedFileError as exc:
        other = _infer_dim(buf, pos, count, dim)
        if other is not None:
            raise DimensionMismatchError(f"{source}: header dim {dim}, records dim {other}") from None
        raise TruncatedFileError(f"{source}: {exc}") from None
    if end != len(buf):
        other = _infer_dim(buf, pos, count, dim)
        if other is not None:
            raise DimensionMismatchError(f"{source}: header dim {dim}, records dim {other}")
        raise EmbeddingFormatError(f"{source}: {len(buf) - end} trailing bytes after {count} records")
    vectors = np.frombuffer(b"".join(chunks), dtype="<f4").reshape(count, dim) if count else np.zeros((0, dim), np.float32)
    if not np.all(np.isfinite(vectors)):
        raise EmbeddingFormatError(f"{source}: non-finite vector component")
    return EmbeddingMatrix(tuple(ids), vectors.astype(np.float32), model_tag)


def load_embeddings(path: str | Path) -> EmbeddingMatrix:
    return parse_embeddings(Path(path).read_bytes(), str(path))


def _unit_query(matrix: EmbeddingMatrix, query_vec) -> np.ndarray:
    q = np.asarray(query_vec, dtype=np.float64).reshape(-1)
    if q.shape[0] != matrix.dim:
        raise DimensionMismatchError(f"query dim {q.shape[0]} != matrix dim {matrix.dim}")
    norm = np.linalg.norm(q)
    if not norm > 0:
        raise ZeroVectorError("<query>")
    return q / norm


def similarities(matrix: EmbeddingMatrix, query_vec, candidates: Sequence[str]) -> dict[str, float]:
    """Cosine of the query against each candidate (rows are unit-norm)."""
    q = _unit_query(matrix, query_vec)
    candidates = list(candidates)
    if not candidates:
        return {}
    sims = matrix.rows(candidates).astype(np.float64) @ q
    return {vid: float(s) for vid, s in zip(candidates, sims)}


def cosine_topk(matrix: EmbeddingMatrix, query_vec, candidates: Iterable[str], k: int) -> RankedList:
    if k < 1:
        raise ValueError("k must be >= 1")
    return RankedList.from_scores(similarities(matrix, query_vec, sorted(set(candidates))), k)
