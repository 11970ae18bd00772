"""Deterministic synthetic corpora with planted ground truth.

Each query targets one planted article. The article carries the query's
PERSON (unique to it), event keywords shared only with the query, and a
target image whose embedding is the nearest one to the query's embedding
in both slots. Everything else is distractor material drawn from shared
pools.

With ``adversarial=True`` the query mentions only a PERSON and a GPE. The
planted article has the PERSON but not the GPE, and exactly one distractor
article has the GPE but not the PERSON, so both entities have df = 1 and
only the type weights separate the two articles in the entity branch.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from eventir.corpus import write_records
from eventir.vectors import EmbeddingMatrix, save_embeddings

SLOT_TAGS = {"a": "event-aligned", "b": "contrastive"}
_CONSONANTS = "bcdfghjklmnprstvz"
_VOWELS = "aeiou"


@dataclass(frozen=True)
class SyntheticPaths:
    root: Path
    config: Path
    articles: Path
    images: Path
    queries: Path
    ground_truth: Path
    planted: Path


class _Words:
    """Unique pronounceable pseudo-words; never repeats across the whole corpus."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.used: set[str] = set()

    def new(self, syllables: int = 3) -> str:
        while True:
            w = "".join(self.rng.choice(_CONSONANTS) + self.rng.choice(_VOWELS) for _ in range(syllables))
            if w not in self.used:
                self.used.add(w)
                return w


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def generate_synthetic(out_dir: str | Path, seed: int = 42, n_articles: int = 200, n_queries: int = 50,
                       dim: int = 64, adversarial: bool = False, max_images_per_article: int = 3
                       ) -> SyntheticPaths:
    if n_queries > n_articles or (adversarial and 2 * n_queries > n_articles):
        raise ValueError("not enough articles for the requested number of queries")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    nrng = np.random.default_rng(seed)
    words = _Words(rng)

    filler = [words.new(2) for _ in range(300)]
    cities = [words.new(3) for _ in range(15)]
    orgs = []
    for _ in range(20):
        full = f"{words.new(3)} {words.new(3)} {words.new(2)}"
        acronym = "".join(p[0] for p in full.split()) + words.new(1)
        words.used.add(acronym)
        orgs.append((full, acronym))

    article_ids = [f"A{i:04d}" for i in range(n_articles)]
    planted = rng.sample(article_ids, n_queries)
    planted_set = set(planted)
    others = [a for a in article_ids if a not in planted_set]
    adv_distractor = dict(zip(planted, rng.sample(others, n_queries))) if adversarial else {}
    adv_gpe = {a: words.new(4) for a in planted} if adversarial else {}

    gazetteer: dict[str, str] = {}
    for c in cities:
        gazetteer[c] = "GPE"
    for full, acronym in orgs:
        gazetteer[full] = "ORG"
        gazetteer[acronym] = "ORG"
    gazetteer.update({g: "GPE" for g in adv_gpe.values()})

    facts = {}
    articles, images = [], []
    image_counter = 0
    for aid in article_ids:
        person = f"{words.new(2)} {words.new(3)}"
        gazetteer[person] = "PERSON"
        cardinal = str(rng.randrange(1000, 99999))
        while cardinal in gazetteer:
            cardinal = str(rng.randrange(1000, 99999))
        gazetteer[cardinal] = "CARDINAL"
        city = rng.choice(cities)
        org_full, org_acr = rng.choice(orgs)
        keywords = [words.new(3) for _ in range(4)]
        n_img = rng.randint(1, max_images_per_article)
        img_ids = [f"I{image_counter + k:05d}" for k in range(n_img)]
        image_counter += n_img
        facts[aid] = dict(person=person, city=city, org=(org_full, org_acr), cardinal=cardinal,
                          keywords=keywords, images=img_ids)

        body_words = rng.sample(filler, 40)
        sentences = [
            f"{person} spoke on behalf of the {org_full} in {city}.",
            f"Officials counted {cardinal} {keywords[0]} near the {keywords[1]}.",
            " ".join(body_words[:20]) + ".",
            f"The {keywords[2]} and {keywords[3]} drew attention.",
            " ".join(body_words[20:]) + ".",
        ]
        owner = next((p for p, d in adv_distractor.items() if d == aid), None)
        if owner is not None:
            sentences.append(f"Crowds gathered in {adv_gpe[owner]}.")
        title = f"{keywords[0].capitalize()} {rng.choice(filler)} {rng.choice(filler)}"
        articles.append({"id": aid, "title": title, "body": " ".join(sentences), "image_ids": img_ids})
        for iid in img_ids:
            images.append({"id": iid, "article_ids": [aid], "caption": f"{rng.choice(filler)} {keywords[0]}"})

    all_images = [rec["id"] for rec in images]
    queries, truth, planted_recs = [], [], []
    for n, aid in enumerate(planted):
        f = facts[aid]
        qid = f"Q{n:04d}"
        padding = " ".join(rng.sample(filler, 12))
        if adversarial:
            text = (f"{f['person'].title()} appeared in {adv_gpe[aid].title()} as {f['keywords'][0]} "
                    f"and {f['keywords'][2]} continued. {padding}.")
        else:
            text = (f"{f['person'].title()} of the {f['org'][1].upper()} in {f['city'].title()} "
                    f"reported {f['cardinal']} {f['keywords'][0]} while the {f['keywords'][2]} and "
                    f"{f['keywords'][3]} unfolded. {padding}.")
        target = f["images"][0]
        queries.append({"id": qid, "text": text})
        truth.append({"query_id": qid, "image_ids": [target]})
        rec = {"query_id": qid, "article_id": aid, "image_id": target}
        if adversarial:
            rec["distractor_article_id"] = adv_distractor[aid]
        planted_recs.append(rec)

    write_records(out / "articles.jsonl", articles)
    write_records(out / "images.jsonl", images)
    write_records(out / "queries.jsonl", queries)
    write_records(out / "ground_truth.jsonl", truth)
    write_records(out / "planted.jsonl", planted_recs)
    with open(out / "gazetteer.tsv", "w", encoding="utf-8", newline="\n") as fh:
        for surface in sorted(gazetteer):
            fh.write(f"{surface}\t{gazetteer[surface]}\n")
    with open(out / "synonyms.tsv", "w", encoding="utf-8", newline="\n") as fh:
        for full, acronym in sorted(orgs, key=lambda o: o[1]):
            fh.write(f"{acronym}\t{full}\n")

    image_index = {iid: i for i, iid in enumerate(all_images)}
    for slot, tag in SLOT_TAGS.items():
        vecs = nrng.standard_normal((len(all_images), dim))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        qvecs = np.empty((len(planted), dim))
        for n, aid in enumerate(planted):
            imgs = facts[aid]["images"]
            target = image_index[imgs[0]]
            for sib in imgs[1:]:
                # Same-article siblings sit closer to the query than random images.
                vecs[image_index[sib]] = _unit(0.6 * vecs[target] + 0.8 * _unit(nrng.standard_normal(dim)))
            qvecs[n] = _unit(vecs[target] + 0.25 * _unit(nrng.standard_normal(dim)))
        for n, aid in enumerate(planted):
            sims = vecs @ qvecs[n]
            if int(np.argmax(sims)) != image_index[facts[aid]["images"][0]]:
                raise RuntimeError(f"seed {seed}: planted image is not nearest for query {n} (slot {slot})")
        save_embeddings(EmbeddingMatrix(tuple(all_images), vecs.astype(np.float32), tag),
                        out / f"slot_{slot}_images.evec")
        save_embeddings(EmbeddingMatrix(tuple(q["id"] for q in queries), qvecs.astype(np.float32), tag),
                        out / f"slot_{slot}_queries.evec")

    config = {
        "articles": "articles.jsonl",
        "images": "images.jsonl",
        "queries": "queries.jsonl",
        "ground_truth": "ground_truth.jsonl",
        "gazetteer": "gazetteer.tsv",
        "synonyms": "synonyms.tsv",
        "slots": {
            slot: {"images": f"slot_{slot}_images.evec", "queries": f"slot_{slot}_queries.evec", "model_tag": tag}
            for slot, tag in SLOT_TAGS.items()
        },
    }
    (out / "config.yaml").write_text(yaml.safe_dump(config, sort_keys=True), encoding="utf-8")
    return SyntheticPaths(out, out / "config.yaml", out / "articles.jsonl", out / "images.jsonl",
                          out / "queries.jsonl", out / "ground_truth.jsonl", out / "planted.jsonl")
