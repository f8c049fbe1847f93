"""Exception hierarchy shared by all qaplon modules.

The CLI maps these onto process exit codes, so new error types should
subclass one of the categories below rather than raising bare ValueError.
"""


class QaplonError(Exception):
    """Base class for all package errors."""


class ContractError(QaplonError, ValueError):
    """An argument violates a documented precondition."""


class ParseError(QaplonError, ValueError):
    """A file could not be parsed.

    ``offset`` is the byte offset of the offending token (or of end-of-file
    when input ends prematurely); it is embedded in the message.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ResourceLimitError(QaplonError):
    """A request exceeds a hard resource ceiling (memory or search-space size)."""


class ModularityUndefinedError(QaplonError, ValueError):
    """Modularity requested for a graph with no edges (total weight zero)."""
