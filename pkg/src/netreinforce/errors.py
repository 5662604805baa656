"""Exception types raised across the package."""

from __future__ import annotations


class NetReinforceError(Exception):
    """Base class for all errors raised by netreinforce."""


class GraphFormatError(NetReinforceError, ValueError):
    """Input document could not be parsed as a graph."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip() if where else message)


class DanglingReferenceError(GraphFormatError):
    """An edge refers to a node that was never declared."""


class SizeLimitError(NetReinforceError, ValueError):
    """Instance is too large for an exhaustive method."""
