"""Shared fixtures and synthetic-corpus generators."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for kn_reference


def zipf_probs(vocab_size: int, exponent: float = 1.2) -> np.ndarray:
    ranks = np.arange(1, vocab_size + 1, dtype=np.float64)
    p = ranks**-exponent
    return p / p.sum()


def make_vocab(size: int, prefix: str = "w") -> list[str]:
    return [f"{prefix}{i}" for i in range(size)]


def make_corpus(rng, vocab, n_tokens, mean_len=10, exponent=1.2):
    """Zipf-distributed token streams of roughly ``n_tokens`` total tokens."""
    probs = zipf_probs(len(vocab), exponent)
    flat = rng.choice(len(vocab), size=n_tokens, p=probs)
    lengths = rng.poisson(mean_len, size=max(2 * n_tokens // max(mean_len, 1), 4)) + 1
    docs = []
    pos = 0
    for length in lengths:
        if pos >= n_tokens:
            break
        chunk = flat[pos : pos + int(length)]
        pos += int(length)
        docs.append([vocab[i] for i in chunk])
    if pos < n_tokens:
        docs.append([vocab[i] for i in flat[pos:]])
    return docs


@pytest.fixture(scope="session")
def small_zipf_corpus():
    rng = np.random.default_rng(11)
    return make_corpus(rng, make_vocab(60), 2_000, mean_len=8)


@pytest.fixture(scope="session")
def bundled_lexicon():
    from corpus_affinity.metrics import ContentWordLexicon

    return ContentWordLexicon.bundled()


def write_corpus_file(path: Path, docs) -> Path:
    path.write_text("\n".join(" ".join(doc) for doc in docs) + "\n", encoding="utf-8")
    return path
