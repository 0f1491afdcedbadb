"""On-disk embedding archive: a corpus, per-subword float32 vectors, spans.

This directory format is the wire contract between the scoring pipeline
and any embedding producer. Layout::

    header.json   {"magic": "TKEM", "version": 1, "dim": d,
                   "n_subwords_total": n, "dtype": "f32le"}
    meta.jsonl    one JSON object per document, in corpus order:
                  doc_id, words, label?, word_labels?, spans [[start,end),...]
                  (span row indices are document-local; extra keys ignored)
    emb.bin       n x d little-endian float32, row-major, documents
                  concatenated in corpus order

Every value in emb.bin must be finite and its size must equal exactly
4 * dim * n_subwords_total bytes. Sequence-level control tokens (e.g. a
transformer's start/end markers) must never appear as rows.
"""

from __future__ import annotations

import json
import os
from typing import NamedTuple, Sequence

import numpy as np

from .corpus import (Corpus, Document, SubwordSpan, document_from_record,
                     document_to_record, validate_corpus)
from .errors import DataError, FormatError, IoError, SchemaError

MAGIC = "TKEM"
VERSION = 1
DTYPE_TAG = "f32le"

DocSpans = tuple[SubwordSpan, ...]


class Archive(NamedTuple):
    """In-memory form of an archive directory."""

    corpus: Corpus
    spans: tuple[DocSpans, ...]
    matrix: np.ndarray  # (n_subwords_total, dim) float32


def validate_doc_spans(doc: Document, spans: Sequence[SubwordSpan]) -> int:
    """Check that spans partition a document's subword rows; return row count.

    Raises SchemaError on any violation: wrong span count, misordered
    word indices, empty spans, gaps, or overlaps.
    """
    if len(spans) != len(doc.words):
        raise SchemaError(
            f"doc {doc.doc_id!r}: {len(spans)} spans for {len(doc.words)} words")
    cursor = 0
    for i, span in enumerate(spans):
        if span.word_index != i:
            raise SchemaError(
                f"doc {doc.doc_id!r}: span {i} has word_index {span.word_index}")
        if span.end <= span.start:
            raise SchemaError(
                f"doc {doc.doc_id!r}: span {i} is empty ([{span.start},{span.end}))")
        if span.start != cursor:
            raise SchemaError(
                f"doc {doc.doc_id!r}: span {i} starts at {span.start}, "
                f"expected {cursor} (spans must tile the rows)")
        cursor = span.end
    return cursor


def _validate_triple(corpus: Corpus, spans: Sequence[Sequence[SubwordSpan]],
                     matrix: np.ndarray) -> None:
    report = validate_corpus(corpus)
    if not report.ok:
        raise SchemaError(f"invalid corpus: {report.summary()}")
    if len(spans) != len(corpus.documents):
        raise SchemaError(
            f"{len(spans)} span lists for {len(corpus.documents)} documents")
    if matrix.ndim != 2:
        raise SchemaError(f"matrix must be 2-D, got shape {matrix.shape}")
    total = 0
    for doc, doc_spans in zip(corpus.documents, spans):
        total += validate_doc_spans(doc, doc_spans)
    if total != matrix.shape[0]:
        raise SchemaError(
            f"spans cover {total} rows but matrix has {matrix.shape[0]}")
    if matrix.size and not np.isfinite(matrix).all():
        raise DataError("matrix contains NaN or Inf")


def _atomic_write_bytes(path: str, data: bytes) -> None:
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def write_archive(corpus: Corpus, spans: Sequence[Sequence[SubwordSpan]],
                  matrix: np.ndarray, directory: str | os.PathLike) -> None:
    """Validate and write an archive directory atomically (per file)."""
    matrix = np.ascontiguousarray(np.asarray(matrix, dtype=np.float32))
    if matrix.ndim != 2 or matrix.shape[1] < 1:
        raise SchemaError(f"matrix must be (n, dim>=1), got shape {matrix.shape}")
    _validate_triple(corpus, spans, matrix)

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
        for doc, doc_spans in zip(corpus.documents, spans):
            record = document_to_record(doc)
            record["spans"] = [[s.start, s.end] for s in doc_spans]
            lines.append(json.dumps(record, ensure_ascii=False,
                                    separators=(",", ":")))
        _atomic_write_bytes(
            os.path.join(directory, "meta.jsonl"),
            ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8"))

        _atomic_write_bytes(os.path.join(directory, "emb.bin"),
                            matrix.astype("<f4", copy=False).tobytes())
    except OSError as exc:
        raise IoError(f"cannot write archive to {directory}: {exc}") from exc


def read_archive(directory: str | os.PathLike) -> Archive:
    """Read and fully validate an archive directory.

    Inverse of :func:`write_archive` on valid archives; no partially
    constructed result escapes a failed validation.
    """
    directory = os.fspath(directory)
    try:
        with open(os.path.join(directory, "header.json"), encoding="utf-8") as fh:
            header = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read archive header: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"header.json is not valid JSON: {exc}") from None

    if header.get("magic") != MAGIC:
        raise FormatError(f"bad magic {header.get('magic')!r}, expected {MAGIC!r}")
    if header.get("version") != VERSION:
        raise FormatError(f"unsupported version {header.get('version')!r}")
    if header.get("dtype") != DTYPE_TAG:
        raise FormatError(f"unsupported dtype {header.get('dtype')!r}")
    dim = header.get("dim")
    n_total = header.get("n_subwords_total")
    if not isinstance(dim, int) or dim < 1:
        raise FormatError(f"dim must be a positive integer, got {dim!r}")
    if not isinstance(n_total, int) or n_total < 0:
        raise FormatError(f"n_subwords_total must be >= 0, got {n_total!r}")

    emb_path = os.path.join(directory, "emb.bin")
    try:
        actual_size = os.path.getsize(emb_path)
        with open(emb_path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read embeddings: {exc}") from exc
    expected_size = 4 * dim * n_total
    if actual_size != expected_size:
        raise SchemaError(
            f"emb.bin is {actual_size} bytes, header implies {expected_size}")
    matrix = np.frombuffer(raw, dtype="<f4").reshape(n_total, dim)
    matrix = np.ascontiguousarray(matrix)  # own, writable copy
    if matrix.size and not np.isfinite(matrix).all():
        raise DataError("emb.bin contains NaN or Inf")

    docs: list[Document] = []
    spans: list[DocSpans] = []
    try:
        with open(os.path.join(directory, "meta.jsonl"), encoding="utf-8") as fh:
            meta_lines = fh.readlines()
    except OSError as exc:
        raise IoError(f"cannot read archive meta: {exc}") from exc
    for lineno, line in enumerate(meta_lines, start=1):
        line = line.strip()
        if not line:
            continue
        where = f"meta.jsonl:{lineno}"
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{where}: invalid JSON: {exc}") from None
        doc = document_from_record(record, where=where)
        raw_spans = record.get("spans")
        if raw_spans is None:
            raise SchemaError(f"{where}: missing 'spans'")
        try:
            doc_spans = tuple(
                SubwordSpan(word_index=i, start=int(s), end=int(e))
                for i, (s, e) in enumerate(raw_spans))
        except (TypeError, ValueError):
            raise SchemaError(f"{where}: malformed spans {raw_spans!r}") from None
        docs.append(doc)
        spans.append(doc_spans)

    corpus = Corpus(documents=tuple(docs), name=os.path.basename(directory))
    _validate_triple(corpus, spans, matrix)
    return Archive(corpus=corpus, spans=tuple(spans), matrix=matrix)


def doc_row_offsets(spans: Sequence[DocSpans]) -> np.ndarray:
    """Global starting row of each document (cumulative subword counts)."""
    counts = [s[-1].end if s else 0 for s in spans]
    return np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
