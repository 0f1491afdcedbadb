"""Synthetic corpora, gibberish corruption, and a hashing word embedder.

Everything here is deterministic given its seed, so pipeline runs are
reproducible end to end without any external model or dataset. The
embedder maps a word to a fixed-dimension vector through signed counts
of character n-grams; unrelated words land nearly orthogonal, which is
all nearest-neighbor scoring needs at desk scale.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from .archive import Archive
from .corpus import Corpus, Document, SubwordSpan, WordToken
from .errors import EmptyInputError, ParamError, SchemaError

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def _check_range(lo: int, hi: int, minimum: int, name: str):
    if lo < minimum or hi < lo:
        raise ParamError(
            f"{name} range [{lo}, {hi}] must satisfy {minimum} <= min <= max")


@dataclass(frozen=True)
class VocabConfig:
    vocab_size: int = 120
    word_len_min: int = 3
    word_len_max: int = 8
    doc_len_min: int = 6
    doc_len_max: int = 16
    alphabet: str = string.ascii_lowercase
    zipf_exponent: float = 1.0

    def __post_init__(self):
        if self.vocab_size < 10:
            raise ParamError(f"vocab_size must be >= 10, got {self.vocab_size}")
        _check_range(self.word_len_min, self.word_len_max, 1, "word length")
        _check_range(self.doc_len_min, self.doc_len_max, 1, "doc length")
        if len(set(self.alphabet)) < 2:
            raise ParamError("alphabet needs at least 2 distinct characters")
        if self.zipf_exponent < 0:
            raise ParamError(
                f"zipf_exponent must be >= 0, got {self.zipf_exponent}")


@dataclass(frozen=True)
class CorruptionConfig:
    doc_anomaly_rate: float = 0.1
    tokens_min: int = 1
    tokens_max: int = 3
    gibberish_len_min: int = 6
    gibberish_len_max: int = 12
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.doc_anomaly_rate < 1.0):
            raise ParamError(
                f"doc_anomaly_rate must be in (0, 1), got {self.doc_anomaly_rate}")
        _check_range(self.tokens_min, self.tokens_max, 1, "tokens per corruption")
        _check_range(self.gibberish_len_min, self.gibberish_len_max, 1,
                     "gibberish length")


@dataclass(frozen=True)
class HashEmbedConfig:
    dim: int = 64
    ngram_min: int = 2
    ngram_max: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.dim < 8:
            raise ParamError(f"dim must be >= 8, got {self.dim}")
        if not (2 <= self.ngram_min <= self.ngram_max <= 5):
            raise ParamError(
                f"ngram range [{self.ngram_min}, {self.ngram_max}] must "
                "satisfy 2 <= min <= max <= 5")


def _build_vocab(cfg: VocabConfig, rng: np.random.Generator) -> list[str]:
    letters = list(cfg.alphabet)
    vocab: list[str] = []
    seen: set[str] = set()
    while len(vocab) < cfg.vocab_size:
        length = int(rng.integers(cfg.word_len_min, cfg.word_len_max + 1))
        word = "".join(rng.choice(letters, size=length))
        if word not in seen:
            seen.add(word)
            vocab.append(word)
    return vocab


def gen_normal_corpus(cfg: VocabConfig, n_docs: int, seed: int = 0) -> Corpus:
    """Sample n_docs documents from a seeded zipf-weighted vocabulary.

    Word frequencies follow rank^(-zipf_exponent); exponent 0 gives a
    uniform vocabulary. Every token and document is labeled 0.
    """
    if n_docs < 1:
        raise ParamError(f"n_docs must be >= 1, got {n_docs}")
    rng = np.random.default_rng(seed)
    vocab = _build_vocab(cfg, rng)
    ranks = np.arange(1, len(vocab) + 1, dtype=np.float64)
    weights = ranks ** (-cfg.zipf_exponent)
    probs = weights / weights.sum()

    docs = []
    for i in range(n_docs):
        length = int(rng.integers(cfg.doc_len_min, cfg.doc_len_max + 1))
        picks = rng.choice(len(vocab), size=length, p=probs)
        words = tuple(WordToken(text=vocab[int(p)], label=0) for p in picks)
        docs.append(Document(doc_id=f"doc-{i:05d}", words=words, label=0))
    return Corpus(documents=tuple(docs), name=f"synth-{seed}")


def _gen_gibberish(rng: np.random.Generator, lo: int, hi: int,
                   forbidden: set[str]) -> str:
    letters = list(string.ascii_lowercase)
    while True:
        length = int(rng.integers(lo, hi + 1))
        word = "".join(rng.choice(letters, size=length))
        if word not in forbidden:
            return word


def inject_gibberish(corpus: Corpus, cfg: CorruptionConfig) -> Corpus:
    """Insert out-of-vocabulary gibberish words into a fraction of documents.

    Rounded to the nearest count and at least one, doc_anomaly_rate of
    the documents each receive 1 or more random letter strings at random
    positions. Inserted words are resampled until absent from the corpus
    vocabulary, so token-level ground truth is exact: inserted tokens are
    labeled 1, their host documents 1, everything else 0.
    """
    for doc in corpus.documents:
        if doc.label == 1 or any(w.label == 1 for w in doc.words):
            raise SchemaError(
                f"document {doc.doc_id!r} already carries anomaly labels")
    n_docs = len(corpus.documents)
    if n_docs < 1:
        raise EmptyInputError("cannot corrupt an empty corpus")

    vocab = {w.text for doc in corpus.documents for w in doc.words}
    n_anom = max(1, int(round(cfg.doc_anomaly_rate * n_docs)))
    rng = np.random.default_rng(cfg.seed)
    corrupt_set = set(rng.choice(n_docs, size=n_anom, replace=False).tolist())

    docs = []
    for i, doc in enumerate(corpus.documents):
        if i not in corrupt_set:
            docs.append(Document(
                doc_id=doc.doc_id,
                words=tuple(WordToken(w.text, label=0) for w in doc.words),
                label=0))
            continue
        words = [WordToken(w.text, label=0) for w in doc.words]
        n_insert = int(rng.integers(cfg.tokens_min, cfg.tokens_max + 1))
        for _ in range(n_insert):
            gib = _gen_gibberish(rng, cfg.gibberish_len_min,
                                 cfg.gibberish_len_max, vocab)
            pos = int(rng.integers(0, len(words) + 1))
            words.insert(pos, WordToken(gib, label=1))
        docs.append(Document(doc_id=doc.doc_id, words=tuple(words), label=1))
    return Corpus(documents=tuple(docs), name=f"{corpus.name}|corrupted")


def _fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def _hash_with_seed(text: str, seed: int) -> int:
    payload = (seed & _MASK64).to_bytes(8, "little") + text.encode("utf-8")
    return _fnv1a64(payload)


def hash_embed_word(word: str, cfg: HashEmbedConfig) -> np.ndarray:
    """Embed one word as L2-normalized signed character n-gram counts.

    The word is wrapped in boundary markers '<' and '>', every character
    n-gram with length in [ngram_min, ngram_max] is hashed with FNV-1a
    64-bit (offset 0xCBF29CE484222325, prime 0x100000001B3, fed the
    8 little-endian bytes of cfg.seed then the n-gram's UTF-8 bytes),
    bit 0 of the hash gives the sign and the remaining bits pick the
    coordinate (h >> 1) mod dim. Signed counts accumulate in float64,
    are L2-normalized, and returned as float32. Identical on every
    platform by construction.
    """
    if not word:
        raise EmptyInputError("cannot embed an empty word")
    padded = f"<{word}>"
    acc = np.zeros(cfg.dim, dtype=np.float64)
    for n in range(cfg.ngram_min, cfg.ngram_max + 1):
        for start in range(0, len(padded) - n + 1):
            h = _hash_with_seed(padded[start:start + n], cfg.seed)
            sign = 1.0 if h & 1 else -1.0
            acc[(h >> 1) % cfg.dim] += sign
    norm = float(np.sqrt((acc * acc).sum()))
    if norm == 0.0:
        # signed counts cancelled exactly; fall back to a unit basis vector
        acc[_hash_with_seed(padded, cfg.seed) % cfg.dim] = 1.0
        norm = 1.0
    return (acc / norm).astype(np.float32)


def embed_corpus(corpus: Corpus, cfg: HashEmbedConfig) -> Archive:
    """Embed every word (one row per word, identity spans) as an archive."""
    spans = []
    rows: list[np.ndarray] = []
    for doc in corpus.documents:
        doc_spans = tuple(SubwordSpan(word_index=i, start=i, end=i + 1)
                          for i in range(len(doc.words)))
        spans.append(doc_spans)
        for w in doc.words:
            rows.append(hash_embed_word(w.text, cfg))
    matrix = (np.stack(rows).astype(np.float32) if rows
              else np.zeros((0, cfg.dim), dtype=np.float32))
    return Archive(corpus=corpus, spans=tuple(spans), matrix=matrix)
