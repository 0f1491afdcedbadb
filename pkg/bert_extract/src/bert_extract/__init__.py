"""Transformer corpus encoder emitting word-aligned embedding archives."""

from .archive import write_archive, write_warnings
from .corpus import Document, read_corpus_jsonl
from .errors import (BertExtractError, DataError, FormatError, IoError,
                     ModelError, ParamError, SchemaError)
from .extract import DEFAULT_MODEL, ExtractConfig, extract_corpus

__all__ = [
    "BertExtractError",
    "DataError",
    "DEFAULT_MODEL",
    "Document",
    "ExtractConfig",
    "FormatError",
    "IoError",
    "ModelError",
    "ParamError",
    "SchemaError",
    "extract_corpus",
    "read_corpus_jsonl",
    "write_archive",
    "write_warnings",
]

__version__ = "0.1.0"
