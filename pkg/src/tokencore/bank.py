"""Memory bank of normal word embeddings and nearest-neighbor scoring.

Training stores every pooled word vector from the normal documents
(optionally uniformly subsampled, always exactly deduplicated). A test
token's anomaly score is the Euclidean distance to its nearest bank
vector; document scores aggregate token scores (mean by default).

Distances accumulate in float64 over explicit difference vectors, so the
exact path is bit-deterministic across runs and thread counts and a score
is 0.0 exactly iff the query equals a bank vector.
"""

from __future__ import annotations

import enum
import os
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import as_matrix, as_vector, check_dim
from .archive import Archive
from .errors import (ContaminationError, EmptyInputError, FormatError,
                     IoError, ParamError, SchemaError)
from .pooling import PoolingMode, pool_document

BANK_MAGIC = b"TKBK"
BANK_VERSION = 1

# query-block kernel budget: block * N * d <= ~8M float64 elements
_KERNEL_BUDGET = 1 << 23


class SubsampleMode(enum.Enum):
    NONE = "none"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class SubsampleConfig:
    mode: SubsampleMode = SubsampleMode.NONE
    keep_fraction: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.keep_fraction <= 1.0):
            raise ParamError(
                f"keep_fraction must be in (0, 1], got {self.keep_fraction}")
        if self.mode is SubsampleMode.NONE and self.keep_fraction != 1.0:
            raise ParamError("keep_fraction must be 1.0 when mode is NONE")


@dataclass
class MemoryBank:
    """Immutable-after-build set of normal word vectors (float32)."""

    vectors: np.ndarray
    provenance: str = ""
    seed: int = 0
    index: "object | None" = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        vecs = np.ascontiguousarray(np.asarray(self.vectors, dtype=np.float32))
        if vecs.ndim != 2 or vecs.shape[0] < 1:
            raise SchemaError(f"bank needs (N>=1, d) vectors, got {vecs.shape}")
        if not np.isfinite(vecs).all():
            raise SchemaError("bank vectors must be finite")
        self.vectors = vecs

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def n_vectors(self) -> int:
        return int(self.vectors.shape[0])


def min_sq_dists(vectors: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Exact min squared L2 distance from each query row to the vector set.

    Computed blockwise over (query, vector, dim) difference tensors with
    float64 accumulation; the block size depends only on the problem
    shape, never on thread configuration.
    """
    base = np.asarray(vectors, dtype=np.float64)
    qs = np.asarray(queries, dtype=np.float64)
    n, d = base.shape
    out = np.empty(qs.shape[0], dtype=np.float64)
    block = max(1, _KERNEL_BUDGET // max(1, n * d))
    for lo in range(0, qs.shape[0], block):
        chunk = qs[lo:lo + block]
        diff = chunk[:, None, :] - base[None, :, :]
        d2 = np.einsum("qnd,qnd->qn", diff, diff)
        out[lo:lo + block] = d2.min(axis=1)
    return out


def build_bank(archive: Archive, mode: PoolingMode = PoolingMode.MAX,
               subsample: SubsampleConfig | None = None) -> MemoryBank:
    """Pool all training words and store them (deduplicated) in a bank.

    The archive must be normal-only: any document or word labeled
    anomalous raises ContaminationError.
    """
    corpus, spans, matrix = archive
    for doc in corpus.documents:
        if doc.label == 1 or any(w.label == 1 for w in doc.words):
            raise ContaminationError(
                f"training document {doc.doc_id!r} carries an anomaly label")

    pooled: list[np.ndarray] = []
    offset = 0
    for doc, doc_spans in zip(corpus.documents, spans):
        n_rows = doc_spans[-1].end if doc_spans else 0
        if doc_spans:
            pooled.append(pool_document(matrix[offset:offset + n_rows],
                                        doc_spans, mode))
        offset += n_rows
    if not pooled:
        raise EmptyInputError("training archive contains no words")
    rows = np.concatenate(pooled, axis=0)

    sub = subsample or SubsampleConfig()
    seed = sub.seed
    if sub.mode is SubsampleMode.UNIFORM:
        rng = np.random.default_rng(sub.seed)
        keep = max(1, int(round(sub.keep_fraction * rows.shape[0])))
        idx = rng.choice(rows.shape[0], size=keep, replace=False)
        rows = rows[idx]

    rows = np.unique(rows.astype(np.float32, copy=False), axis=0)
    return MemoryBank(vectors=rows,
                      provenance=f"{corpus.name}|pooling={mode.value}",
                      seed=seed)


def score_token(bank: MemoryBank, e_test) -> float:
    """Euclidean distance from one test embedding to its nearest bank vector."""
    q = as_vector(e_test, "e_test")
    check_dim(q.shape[0], bank.dim, "e_test")
    return float(score_tokens(bank, q[None, :])[0])


def score_tokens(bank: MemoryBank, queries) -> np.ndarray:
    """Vectorized score_token over query rows; returns float64 distances."""
    qs = as_matrix(queries, "queries", allow_empty=True)
    if qs.shape[0] == 0:
        return np.empty(0, dtype=np.float64)
    check_dim(qs.shape[1], bank.dim, "queries")
    if bank.index is not None:
        d2 = bank.index.min_sq_dists(qs)
    else:
        d2 = min_sq_dists(bank.vectors, qs)
    return np.sqrt(d2)


class AggregatorKind(enum.Enum):
    MEAN = "mean"
    MAX = "max"
    TOPK_MEAN = "topk"


@dataclass(frozen=True)
class Aggregator:
    """Token-to-document score aggregation rule (mean is the default)."""

    kind: AggregatorKind = AggregatorKind.MEAN
    k: int = 3

    def __post_init__(self):
        if self.kind is AggregatorKind.TOPK_MEAN and self.k < 1:
            raise ParamError(f"top-k aggregation needs k >= 1, got {self.k}")

    @classmethod
    def parse(cls, text: str) -> "Aggregator":
        """Parse 'mean', 'max', or 'topk:K'."""
        text = text.lower()
        if text == "mean":
            return cls(AggregatorKind.MEAN)
        if text == "max":
            return cls(AggregatorKind.MAX)
        if text.startswith("topk"):
            _, _, arg = text.partition(":")
            try:
                return cls(AggregatorKind.TOPK_MEAN, k=int(arg) if arg else 3)
            except ValueError:
                pass
        raise ParamError(f"unknown aggregator {text!r} (use mean, max, topk:K)")

    def aggregate(self, token_scores: np.ndarray) -> float:
        scores = np.asarray(token_scores, dtype=np.float64)
        if scores.size == 0:
            raise EmptyInputError("cannot aggregate zero token scores")
        if self.kind is AggregatorKind.MAX:
            return float(scores.max())
        if self.kind is AggregatorKind.TOPK_MEAN:
            k = min(self.k, scores.size)
            top = np.sort(scores)[-k:]
            value = float(top.mean())
        else:
            value = float(scores.mean(dtype=np.float64))
        # float dust must not escape the [min, max] envelope
        return float(min(max(value, scores.min()), scores.max()))


MEAN_AGGREGATOR = Aggregator(AggregatorKind.MEAN)


@dataclass(frozen=True)
class ScoredDocument:
    doc_id: str
    token_scores: tuple[float, ...]
    doc_score: float


def score_document(bank: MemoryBank, word_vectors, doc_id: str = "",
                   aggregator: Aggregator = MEAN_AGGREGATOR) -> ScoredDocument:
    """Score every word of one document and aggregate (T >= 1 required)."""
    vecs = as_matrix(word_vectors, "word_vectors", allow_empty=True)
    if vecs.shape[0] == 0:
        raise EmptyInputError(f"document {doc_id!r} has no words to score")
    token_scores = score_tokens(bank, vecs)
    return ScoredDocument(doc_id=doc_id,
                          token_scores=tuple(float(s) for s in token_scores),
                          doc_score=aggregator.aggregate(token_scores))


def save_bank(bank: MemoryBank, path) -> None:
    """Write the bank file: TKBK header then raw little-endian float32 rows.

    Layout: magic "TKBK", u32 version, u32 dim, u64 N, u64 seed,
    u32 provenance byte length, provenance UTF-8, then N*dim floats.
    All integers little-endian.
    """
    prov = bank.provenance.encode("utf-8")
    header = BANK_MAGIC + struct.pack(
        "<IIQQI", BANK_VERSION, bank.dim, bank.n_vectors,
        bank.seed & 0xFFFFFFFFFFFFFFFF, len(prov))
    try:
        tmp = os.fspath(path) + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(header)
            fh.write(prov)
            fh.write(bank.vectors.astype("<f4", copy=False).tobytes())
        os.replace(tmp, os.fspath(path))
    except OSError as exc:
        raise IoError(f"cannot write bank to {path}: {exc}") from exc


def load_bank(path) -> MemoryBank:
    """Read a TKBK bank file; the round trip through save_bank is bit-exact."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read bank from {path}: {exc}") from exc

    fixed = 4 + struct.calcsize("<IIQQI")
    if len(raw) < fixed or raw[:4] != BANK_MAGIC:
        raise FormatError(f"{path}: not a bank file (bad magic or truncated header)")
    version, dim, n, seed, prov_len = struct.unpack("<IIQQI", raw[4:fixed])
    if version != BANK_VERSION:
        raise FormatError(f"{path}: unsupported bank version {version}")
    if dim < 1 or n < 1:
        raise FormatError(f"{path}: invalid dim={dim} N={n}")
    body = raw[fixed:]
    if len(body) != prov_len + 4 * dim * n:
        raise SchemaError(
            f"{path}: file has {len(body)} payload bytes, "
            f"header implies {prov_len + 4 * dim * n}")
    provenance = body[:prov_len].decode("utf-8")
    vectors = np.frombuffer(body[prov_len:], dtype="<f4").reshape(n, dim)
    return MemoryBank(vectors=np.ascontiguousarray(vectors),
                      provenance=provenance, seed=seed)


def with_index(bank: MemoryBank, index) -> MemoryBank:
    """Return a copy of the bank with an attached (approximate) index."""
    return replace(bank, index=index)
