"""Exception taxonomy shared by every tokencore module.

The CLI maps these onto its exit-code contract: OS-level file problems
exit 1, validation failures exit 2, degenerate metric inputs exit 3.
"""


class TokencoreError(Exception):
    """Base class for all tokencore errors."""


class FormatError(TokencoreError):
    """A file does not look like the expected format (magic, version, dtype)."""


class SchemaError(TokencoreError):
    """Structurally inconsistent data: sizes, spans, dimensions, labels."""


class DataError(TokencoreError):
    """Values violate data invariants (NaN/Inf where finiteness is required)."""


class IoError(TokencoreError):
    """An OS-level read or write failed."""


class EmptyInputError(TokencoreError):
    """An operation that needs at least one element received none."""


class ContaminationError(TokencoreError):
    """Anomaly-labeled data reached a normal-only training path."""


class RecallError(TokencoreError):
    """An approximate index failed its recall@1 self-check."""


class ParamError(TokencoreError):
    """A parameter value is outside its documented range."""


class DegenerateError(TokencoreError):
    """Metric input collapses to a single class; the metric is undefined."""
