"""Exception types shared across the package.

``DataError`` marks problems with input data (bad files, schema violations,
corrupt indexes); the CLI maps it to exit code 2. Everything else that
escapes is treated as an internal error (exit code 3).
"""


class DataError(Exception):
    """Input data violates a documented contract."""


class CorruptIndexError(DataError):
    """An abstract inverted index maps one position to several words."""


class StageError(DataError):
    """A pipeline stage is missing its upstream artifact or config."""
