"""Brute-force reference implementations used as test oracles.

Nothing here touches the inverted index, the entity index, or the fusion
helpers in the package: every score is recomputed from raw tokens,
full-corpus scans, and exact rational arithmetic where ranks are fused.
"""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction

import re
import unicodedata

import numpy as np


def tokenize(text: str) -> list[str]:
    folded = unicodedata.normalize("NFC", unicodedata.normalize("NFC", text).casefold())
    return re.findall(r"[^\W_]+", folded)


def bm25_scores(docs: dict[str, list[str]], query: list[str], k1: float = 1.2, b: float = 0.75) -> dict[str, float]:
    """Exhaustive BM25: ``docs`` maps id -> token list."""
    n = len(docs)
    if n == 0:
        return {}
    avgdl = sum(len(t) for t in docs.values()) / n
    df = Counter()
    for toks in docs.values():
        df.update(set(toks))
    out = {}
    for doc_id, toks in docs.items():
        tf = Counter(toks)
        score = 0.0
        for term in query:
            if tf[term] == 0:
                continue
            term_idf = math.log(1.0 + (n - df[term] + 0.5) / (df[term] + 0.5))
            score += term_idf * (tf[term] * (k1 + 1.0) / (tf[term] + k1 * (1.0 - b + b * len(toks) / avgdl)))
        out[doc_id] = score
    return out


def rank(scores: dict, top_k: int | None = None, positive_only: bool = True) -> list:
    items = [(d, s) for d, s in scores.items() if s > 0 or not positive_only]
    items.sort(key=lambda kv: (-kv[1], kv[0]))
    return items[:top_k] if top_k is not None else items


def entity_scores(article_entities: dict[str, set[str]], query: list[tuple[str, str]],
                  weights: dict[str, float]) -> dict[str, float]:
    """``query`` is a list of (canonical, type); first occurrence of a canonical wins."""
    n = len(article_entities)
    distinct, seen = [], set()
    for canon, etype in query:
        if canon not in seen:
            seen.add(canon)
            distinct.append((canon, etype))
    out = {}
    for aid, ents in article_entities.items():
        score = 0.0
        for canon, etype in distinct:
            if canon in ents:
                df = sum(1 for e in article_entities.values() if canon in e)
                score += weights[etype] * math.log(1.0 + n / df)
        out[aid] = score
    return out


def rrf_exact(rankings: list[list[str]], k: int = 60) -> list[tuple[str, Fraction]]:
    scores: dict[str, Fraction] = {}
    for ranking in rankings:
        for r, doc_id in enumerate(ranking, start=1):
            scores[doc_id] = scores.get(doc_id, Fraction(0)) + 1 / (Fraction(k) + r)
    return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))


def sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x)) if x >= 0 else math.exp(x) / (1.0 + math.exp(x))


def boost(s: float, r: int, alpha: float, beta: float, gamma: float) -> float:
    return sigmoid(alpha * s - beta * math.log(r)) * gamma


def cosine(u, v) -> float:
    u = [float(x) for x in u]
    v = [float(x) for x in v]
    nu = math.sqrt(math.fsum(x * x for x in u))
    nv = math.sqrt(math.fsum(x * x for x in v))
    return math.fsum(a * b for a, b in zip(u, v)) / (nu * nv)


def gazetteer_scan(text: str, gazetteer: dict[str, str]) -> list[tuple[str, str]]:
    """Leftmost-longest matching by trying every gazetteer entry at every position."""
    tokens = tokenize(text)
    entries = sorted(((tuple(tokenize(s)), s, t) for s, t in gazetteer.items()), key=lambda e: -len(e[0]))
    out, seen, i = [], set(), 0
    while i < len(tokens):
        for toks, surface, etype in entries:
            if toks and tuple(tokens[i : i + len(toks)]) == toks:
                if (surface, etype) not in seen:
                    seen.add((surface, etype))
                    out.append((surface, etype))
                i += len(toks)
                break
        else:
            i += 1
    return out


def reference_pipeline(articles: list[dict], images: list[dict], queries: list[dict],
                       gazetteer: dict[str, str], synonyms: dict[str, list[str]],
                       slots: list[tuple[dict, dict, tuple[float, float, float]]], stopwords: frozenset,
                       weights: dict[str, float], top_k: int = 30, top_n: int = 10, depth: int = 100,
                       rrf_k: int = 60) -> list[tuple[str, list[str]]]:
    """Monolithic end-to-end reference.

    ``slots`` holds (image id -> vector, query id -> vector, (alpha, beta, gamma)).
    """
    docs = {}
    art_ents = {}
    for a in articles:
        text = a["title"] + " " + a["body"]
        docs[a["id"]] = [t for t in tokenize(text) if t not in stopwords]
        art_ents[a["id"]] = {s for s, _ in gazetteer_scan(text, gazetteer)}
    links = {a["id"]: list(a["image_ids"]) for a in articles}
    for img in sorted(images, key=lambda i: i["id"]):
        for aid in img["article_ids"]:
            if img["id"] not in links[aid]:
                links[aid].append(img["id"])

    run = []
    for q in queries:
        ents = gazetteer_scan(q["text"], gazetteer)
        expanded = []
        for surface, etype in ents:
            expanded.append((surface, etype))
            for alt in sorted(synonyms.get(surface, [])):
                if (alt, etype) not in ents and (alt, etype) not in expanded:
                    expanded.append((alt, etype))
        ent_rank = [d for d, _ in rank(entity_scores(art_ents, expanded, weights), depth)]
        lex_rank = [d for d, _ in rank(bm25_scores(docs, [t for t in tokenize(q["text"]) if t not in stopwords]), depth)]
        branches = [r for r in (ent_rank, lex_rank) if r]
        fused = [d for d, _ in rrf_exact(branches, rrf_k)][:top_k] if branches else []

        best_rank = {}
        for r, aid in enumerate(fused, start=1):
            for iid in links[aid]:
                best_rank.setdefault(iid, r)
        per_model = []
        for image_vecs, query_vecs, (alpha, beta, gamma) in slots:
            qv = query_vecs[q["id"]]
            final = {}
            for iid, r in best_rank.items():
                s = cosine(image_vecs[iid], qv)
                final[iid] = s + boost(s, r, alpha, beta, gamma)
            per_model.append([d for d, _ in rank(final, positive_only=False)])
        out = [d for d, _ in rrf_exact(per_model, rrf_k)][:top_n] if best_rank else []
        run.append((q["id"], out))
    return run


def random_unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)
