"""Reader for the corpus interchange format.

One JSON object per line: ``doc_id`` (string), ``words`` (non-empty list
of non-empty strings), optional ``label`` (0/1) and ``word_labels``
(0/1 per word). Unknown keys are ignored so producers can annotate.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .errors import IoError, SchemaError


@dataclass(frozen=True)
class Document:
    doc_id: str
    words: tuple[str, ...]
    label: int | None = None
    word_labels: tuple[int, ...] | None = None

    def to_record(self) -> dict:
        record: dict = {"doc_id": self.doc_id, "words": list(self.words)}
        if self.label is not None:
            record["label"] = self.label
        if self.word_labels is not None:
            record["word_labels"] = list(self.word_labels)
        return record


def _document_from_record(record: dict, where: str) -> Document:
    if not isinstance(record, dict):
        raise SchemaError(f"{where}: expected a JSON object")
    try:
        doc_id = record["doc_id"]
        words = record["words"]
    except KeyError as exc:
        raise SchemaError(f"{where}: missing required key {exc}") from None
    if not isinstance(doc_id, str) or not doc_id:
        raise SchemaError(f"{where}: doc_id must be a non-empty string")
    if not isinstance(words, list) or not words:
        raise SchemaError(f"{where}: words must be a non-empty list")
    for word in words:
        if not isinstance(word, str) or not word:
            raise SchemaError(f"{where}: every word must be a non-empty string")
    label = record.get("label")
    if label is not None and label not in (0, 1):
        raise SchemaError(f"{where}: label must be 0 or 1, got {label!r}")
    word_labels = record.get("word_labels")
    if word_labels is not None:
        if (not isinstance(word_labels, list)
                or len(word_labels) != len(words)
                or any(wl not in (0, 1) for wl in word_labels)):
            raise SchemaError(
                f"{where}: word_labels must be one 0/1 entry per word")
        word_labels = tuple(word_labels)
    return Document(doc_id=doc_id, words=tuple(words), label=label,
                    word_labels=word_labels)


def read_corpus_jsonl(path: str | os.PathLike) -> tuple[Document, ...]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise IoError(f"cannot read corpus {os.fspath(path)!r}: {exc}") from exc
    docs: list[Document] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        where = f"{os.fspath(path)}:{lineno}"
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{where}: invalid JSON: {exc}") from None
        doc = _document_from_record(record, where)
        if doc.doc_id in seen:
            raise SchemaError(f"{where}: duplicate doc_id {doc.doc_id!r}")
        seen.add(doc.doc_id)
        docs.append(doc)
    if not docs:
        raise SchemaError(f"{os.fspath(path)}: corpus holds no documents")
    return tuple(docs)
