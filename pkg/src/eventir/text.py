"""Deterministic tokenization shared by indexing and querying."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

# Runs of Unicode letters/digits; underscore and punctuation split.
_TOKEN_RE = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class AnalysisConfig:
    stopwords: frozenset[str] = field(default_factory=frozenset)
    stem: bool = False

    @classmethod
    def default(cls) -> AnalysisConfig:
        return cls(stopwords=default_stopwords())


def _normalize(text: str) -> str:
    return unicodedata.normalize("NFC", unicodedata.normalize("NFC", text).casefold())


def parse_stopwords(lines) -> frozenset[str]:
    words = set()
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if line:
            words.add(_normalize(line))
    return frozenset(words)


def load_stopwords(path: str | Path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return parse_stopwords(fh)


def default_stopwords() -> frozenset[str]:
    text = resources.files("eventir").joinpath("data/stopwords_en.txt").read_text(encoding="utf-8")
    return parse_stopwords(text.splitlines())


def s_stem(token: str) -> str:
    """Harman's "S" stemmer: strips English plural endings only."""
    if token.endswith("ies") and not token.endswith(("eies", "aies")) and len(token) > 3:
        return token[:-3] + "y"
    if token.endswith("es") and not token.endswith(("aes", "ees", "oes")) and len(token) > 2:
        return token[:-1]
    if token.endswith("s") and not token.endswith(("us", "ss")) and len(token) > 1:
        return token[:-1]
    return token


def tokenize(text: str, config: AnalysisConfig | None = None) -> list[str]:
    if not text:
        return []
    tokens = _TOKEN_RE.findall(_normalize(text))
    if config is None:
        return tokens
    if config.stopwords:
        tokens = [t for t in tokens if t not in config.stopwords]
    if config.stem:
        tokens = [s_stem(t) for t in tokens]
    return tokens
