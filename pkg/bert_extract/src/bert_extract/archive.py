"""Writer for the embedding archive directory format.

Layout (the wire contract consumed by the scoring pipeline)::

    header.json   {"magic": "TKEM", "version": 1, "dim": d,
                   "n_subwords_total": n, "dtype": "f32le"}
    meta.jsonl    one JSON object per document, in corpus order:
                  doc_id, words, label?, word_labels?,
                  spans [[start,end),...] with document-local row indices,
                  windows [[word_lo,word_hi),...] when a document was split
    emb.bin       n x d little-endian float32, row-major, documents
                  concatenated in corpus order

Spans must tile each document's rows exactly; every value must be
finite. Sequence-level control tokens never appear as rows.
"""

from __future__ import annotations

import json
import os
from typing import Sequence

import numpy as np

from .corpus import Document
from .errors import DataError, IoError, SchemaError

MAGIC = "TKEM"
VERSION = 1
DTYPE_TAG = "f32le"

# (start, end) row ranges, one per word, document-local
DocSpans = tuple[tuple[int, int], ...]


def validate_doc_spans(doc: Document, spans: Sequence[tuple[int, int]]) -> int:
    """Check that spans tile the document's rows; return the row count."""
    if len(spans) != len(doc.words):
        raise SchemaError(
            f"doc {doc.doc_id!r}: {len(spans)} spans for {len(doc.words)} words")
    cursor = 0
    for i, (start, end) in enumerate(spans):
        if end <= start:
            raise SchemaError(
                f"doc {doc.doc_id!r}: span {i} is empty ([{start},{end}))")
        if start != cursor:
            raise SchemaError(
                f"doc {doc.doc_id!r}: span {i} starts at {start}, "
                f"expected {cursor} (spans must tile the rows)")
        cursor = end
    return cursor


def _atomic_write_bytes(path: str, data: bytes) -> None:
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def write_archive(documents: Sequence[Document],
                  spans: Sequence[DocSpans],
                  windows: Sequence[tuple[tuple[int, int], ...] | None],
                  matrix: np.ndarray,
                  directory: str | os.PathLike) -> None:
    """Validate and write an archive directory atomically (per file)."""
    matrix = np.ascontiguousarray(np.asarray(matrix, dtype=np.float32))
    if matrix.ndim != 2 or matrix.shape[1] < 1:
        raise SchemaError(f"matrix must be (n, dim>=1), got shape {matrix.shape}")
    if not (len(documents) == len(spans) == len(windows)):
        raise SchemaError("documents, spans and windows must align")
    total = 0
    for doc, doc_spans in zip(documents, spans):
        total += validate_doc_spans(doc, doc_spans)
    if total != matrix.shape[0]:
        raise SchemaError(
            f"spans cover {total} rows but matrix has {matrix.shape[0]}")
    if matrix.size and not np.isfinite(matrix).all():
        raise DataError("matrix contains NaN or Inf")

    directory = os.fspath(directory)
    try:
        os.makedirs(directory, exist_ok=True)
        header = {
            "magic": MAGIC,
            "version": VERSION,
            "dim": int(matrix.shape[1]),
            "n_subwords_total": int(matrix.shape[0]),
            "dtype": DTYPE_TAG,
        }
        _atomic_write_bytes(
            os.path.join(directory, "header.json"),
            (json.dumps(header, indent=2) + "\n").encode("utf-8"))

        lines = []
        for doc, doc_spans, doc_windows in zip(documents, spans, windows):
            record = doc.to_record()
            record["spans"] = [[start, end] for start, end in doc_spans]
            if doc_windows is not None:
                record["windows"] = [[lo, hi] for lo, hi in doc_windows]
            lines.append(json.dumps(record, ensure_ascii=False,
                                    separators=(",", ":")))
        _atomic_write_bytes(
            os.path.join(directory, "meta.jsonl"),
            ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8"))

        _atomic_write_bytes(os.path.join(directory, "emb.bin"),
                            matrix.astype("<f4", copy=False).tobytes())
    except OSError as exc:
        raise IoError(f"cannot write archive to {directory}: {exc}") from exc


def write_warnings(records: Sequence[dict],
                   directory: str | os.PathLike) -> None:
    """Write the warnings sidecar next to the archive files, if any."""
    if not records:
        return
    lines = [json.dumps(r, ensure_ascii=False, separators=(",", ":"))
             for r in records]
    try:
        _atomic_write_bytes(
            os.path.join(os.fspath(directory), "warnings.jsonl"),
            ("\n".join(lines) + "\n").encode("utf-8"))
    except OSError as exc:
        raise IoError(f"cannot write warnings sidecar: {exc}") from exc
