"""Subword-to-word pooling.

A word split into n subwords is represented by one vector: the
element-wise maximum of its subword embeddings by default (so the
strongest per-dimension signal survives), or mean / first-subword
pooling for ablation.
"""

from __future__ import annotations

import enum
from typing import Sequence

import numpy as np

from .corpus import SubwordSpan
from .errors import EmptyInputError, SchemaError


class PoolingMode(enum.Enum):
    MAX = "max"
    MEAN = "mean"
    FIRST = "first"

    @classmethod
    def parse(cls, name: str) -> "PoolingMode":
        try:
            return cls(name.lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise SchemaError(f"unknown pooling mode {name!r} (use {valid})") from None


def pool_word(subvecs, mode: PoolingMode = PoolingMode.MAX) -> np.ndarray:
    """Pool n >= 1 same-dimension subword vectors into one word vector."""
    if isinstance(subvecs, np.ndarray):
        rows = subvecs
    else:
        vecs = [np.asarray(v) for v in subvecs]
        if not vecs:
            raise EmptyInputError("pool_word needs at least one vector")
        dims = {v.shape for v in vecs}
        if len(dims) > 1 or any(v.ndim != 1 for v in vecs):
            raise SchemaError(f"mixed subword vector shapes: {sorted(dims)}")
        rows = np.stack(vecs)
    if rows.ndim != 2:
        raise SchemaError(f"expected (n, d) subword rows, got shape {rows.shape}")
    if rows.shape[0] == 0:
        raise EmptyInputError("pool_word needs at least one vector")

    if mode is PoolingMode.MAX:
        return rows.max(axis=0)
    if mode is PoolingMode.MEAN:
        # accumulate in float64, report in the input precision
        return rows.mean(axis=0, dtype=np.float64).astype(rows.dtype)
    if mode is PoolingMode.FIRST:
        return rows[0].copy()
    raise SchemaError(f"unknown pooling mode {mode!r}")


def pool_document(doc_rows: np.ndarray, spans: Sequence[SubwordSpan],
                  mode: PoolingMode = PoolingMode.MAX) -> np.ndarray:
    """Pool one document's subword rows into a (n_words, d) matrix.

    Spans must tile ``doc_rows`` contiguously (word i owns rows
    [start_i, end_i)); violations raise SchemaError.
    """
    doc_rows = np.asarray(doc_rows)
    if doc_rows.ndim != 2:
        raise SchemaError(f"doc_rows must be 2-D, got shape {doc_rows.shape}")
    cursor = 0
    for i, span in enumerate(spans):
        if span.word_index != i or span.start != cursor or span.end <= span.start:
            raise SchemaError(f"span {i} ({span}) does not tile the document rows")
        cursor = span.end
    if cursor != doc_rows.shape[0]:
        raise SchemaError(
            f"spans cover {cursor} rows but document has {doc_rows.shape[0]}")

    out = np.empty((len(spans), doc_rows.shape[1]), dtype=doc_rows.dtype)
    for i, span in enumerate(spans):
        out[i] = pool_word(doc_rows[span.start:span.end], mode)
    return out
