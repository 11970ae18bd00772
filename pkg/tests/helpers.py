import random

from eventir.corpus import Article, Corpus


def make_corpus(texts: dict[str, str]) -> Corpus:
    return Corpus({aid: Article(aid, "", body) for aid, body in texts.items()})


def random_texts(rng: random.Random, n_docs: int, vocab_size: int = 30, max_len: int = 40) -> dict[str, str]:
    vocab = [f"w{i}" for i in range(vocab_size)]
    # Zipf-ish skew so some terms are common and some rare.
    weights = [1.0 / (i + 1) for i in range(vocab_size)]
    return {
        f"d{i:03d}": " ".join(rng.choices(vocab, weights, k=rng.randint(0, max_len)))
        for i in range(n_docs)
    }


def random_query(rng: random.Random, vocab_size: int = 30) -> list[str]:
    return [f"w{rng.randrange(vocab_size + 5)}" for _ in range(rng.randint(1, 6))]
