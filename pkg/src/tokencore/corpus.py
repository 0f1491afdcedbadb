"""In-memory corpus model: documents, word tokens, subword alignment, labels.

Words are whitespace-delimited; punctuation stays attached to its word.
Labels are optional binary flags (0 normal, 1 anomalous) so the same model
carries unlabeled inference corpora and labeled evaluation corpora. The
types are deliberately permissive: all invariant checking is centralized
in :func:`validate_corpus`, which reports violations instead of raising.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .errors import IoError, SchemaError


@dataclass(frozen=True)
class WordToken:
    """One whitespace-delimited word with an optional anomaly label."""

    text: str
    label: int | None = None


@dataclass(frozen=True)
class Document:
    """An ordered word sequence with an optional document-level label."""

    doc_id: str
    words: tuple[WordToken, ...]
    label: int | None = None

    @property
    def word_texts(self) -> list[str]:
        return [w.text for w in self.words]


@dataclass(frozen=True)
class Corpus:
    """An ordered collection of documents."""

    documents: tuple[Document, ...]
    name: str = ""

    def __len__(self) -> int:
        return len(self.documents)


@dataclass(frozen=True)
class SubwordSpan:
    """Half-open row range [start, end) of one word's subwords.

    Row indices are document-local: row 0 is the document's first subword.
    """

    word_index: int
    start: int
    end: int


@dataclass(frozen=True)
class Violation:
    code: str
    doc_id: str | None
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, code: str, doc_id: str | None, message: str) -> None:
        self.violations.append(Violation(code, doc_id, message))

    def summary(self) -> str:
        if self.ok:
            return "valid"
        return "; ".join(f"[{v.code}] {v.message}" for v in self.violations)


_VALID_LABELS = (0, 1, None)


def validate_corpus(corpus: Corpus) -> ValidationReport:
    """Check every corpus invariant and report each violation found.

    Never raises: an empty report means the corpus is valid. Checked
    invariants: unique doc_ids, non-empty whitespace-free word text,
    labels in {0, 1}, and the rule that a document containing an
    anomalous word must itself be labeled anomalous.
    """
    report = ValidationReport()
    seen_ids: set[str] = set()
    for doc in corpus.documents:
        if doc.doc_id in seen_ids:
            report.add("duplicate-doc-id", doc.doc_id,
                       f"doc_id {doc.doc_id!r} occurs more than once")
        seen_ids.add(doc.doc_id)

        if doc.label not in _VALID_LABELS:
            report.add("bad-label", doc.doc_id,
                       f"document label {doc.label!r} is not 0/1")
        any_anomalous_word = False
        for i, word in enumerate(doc.words):
            if word.text == "":
                report.add("empty-word", doc.doc_id,
                           f"word {i} has empty text")
            elif any(ch.isspace() for ch in word.text):
                report.add("whitespace-in-word", doc.doc_id,
                           f"word {i} ({word.text!r}) contains whitespace")
            if word.label not in _VALID_LABELS:
                report.add("bad-label", doc.doc_id,
                           f"word {i} label {word.label!r} is not 0/1")
            if word.label == 1:
                any_anomalous_word = True
        if any_anomalous_word and doc.label == 0:
            report.add("label-inconsistency", doc.doc_id,
                       "document labeled normal but contains an anomalous word")
    return report


def _label_from_json(value, where: str) -> int | None:
    if value is None:
        return None
    if value in (0, 1):
        return int(value)
    raise SchemaError(f"{where}: label must be 0 or 1, got {value!r}")


def document_from_record(record: dict, where: str = "document") -> Document:
    """Build a Document from one corpus-JSONL record."""
    try:
        doc_id = record["doc_id"]
        words = record["words"]
    except KeyError as exc:
        raise SchemaError(f"{where}: missing required key {exc}") from None
    if not isinstance(words, list) or not all(isinstance(w, str) for w in words):
        raise SchemaError(f"{where}: 'words' must be a list of strings")
    word_labels = record.get("word_labels")
    if word_labels is None:
        tokens = tuple(WordToken(w) for w in words)
    else:
        if len(word_labels) != len(words):
            raise SchemaError(
                f"{where}: word_labels length {len(word_labels)} != "
                f"words length {len(words)}")
        tokens = tuple(
            WordToken(w, _label_from_json(lab, where))
            for w, lab in zip(words, word_labels))
    return Document(doc_id=str(doc_id), words=tokens,
                    label=_label_from_json(record.get("label"), where))


def document_to_record(doc: Document) -> dict:
    record: dict = {"doc_id": doc.doc_id, "words": [w.text for w in doc.words]}
    if doc.label is not None:
        record["label"] = doc.label
    if any(w.label is not None for w in doc.words):
        record["word_labels"] = [0 if w.label is None else w.label
                                 for w in doc.words]
    return record


def read_corpus_jsonl(path: str | os.PathLike) -> Corpus:
    """Read the corpus interchange format: one JSON document per line."""
    docs = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise SchemaError(
                        f"{path}:{lineno}: invalid JSON: {exc}") from None
                docs.append(document_from_record(record,
                                                 where=f"{path}:{lineno}"))
    except OSError as exc:
        raise IoError(f"cannot read corpus from {path}: {exc}") from exc
    name = os.path.splitext(os.path.basename(os.fspath(path)))[0]
    return Corpus(documents=tuple(docs), name=name)


def write_corpus_jsonl(corpus: Corpus, path: str | os.PathLike) -> None:
    """Write corpus JSONL atomically (temp file + rename)."""
    path = os.fspath(path)
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            for doc in corpus.documents:
                fh.write(json.dumps(document_to_record(doc),
                                    ensure_ascii=False,
                                    separators=(",", ":")))
                fh.write("\n")
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write corpus to {path}: {exc}") from exc
