"""Exception hierarchy shared by all bert_extract modules.

Exit-code mapping at the CLI boundary: IoError, FormatError and
ModelError exit 1; every other BertExtractError exits 2.
"""


class BertExtractError(Exception):
    """Base class for all errors raised by this package."""


class IoError(BertExtractError):
    """Filesystem-level failure while reading or writing."""


class FormatError(BertExtractError):
    """A file exists but its framing or header is not ours."""


class SchemaError(BertExtractError):
    """Structurally invalid content (corpus records, spans, shapes)."""


class DataError(BertExtractError):
    """Non-finite or otherwise unusable numeric payload."""


class ParamError(BertExtractError):
    """A configuration value is outside its documented range."""


class ModelError(BertExtractError):
    """The encoder model or tokenizer could not be loaded."""
