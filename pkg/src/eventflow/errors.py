"""Exception hierarchy shared by every eventflow module."""

from __future__ import annotations


class EventFlowError(Exception):
    """Base class for all eventflow errors."""


class NotFound(EventFlowError, KeyError):
    """A node id was looked up in a graph that does not contain it."""

    def __str__(self) -> str:
        return Exception.__str__(self)


class MalformedGraph(EventFlowError):
    """A graph violates a structural invariant (single entry/exit, reachability...)."""

    def __init__(self, code: str, message: str) -> None:
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class TransformNotApplicable(EventFlowError):
    """A reduction was requested on a node whose precondition does not hold."""


class OracleTooLarge(EventFlowError):
    """A brute-force oracle would exceed its configured enumeration ceiling."""


class SpecMismatch(EventFlowError):
    """An event spec does not fit the graph it is checked against."""


class ConfigError(EventFlowError, ValueError):
    """A generator configuration cannot be satisfied."""


class IngestError(EventFlowError):
    """A graph document could not be turned into a well-formed graph.

    ``code`` is a stable diagnostic identifier; ``line``/``column`` are
    1-based and only set for syntax errors.
    """

    def __init__(
        self,
        code: str,
        message: str,
        *,
        line: int | None = None,
        column: int | None = None,
        source: str | None = None,
    ) -> None:
        self.code = code
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(self.render())

    def render(self) -> str:
        where = self.source or "<input>"
        if self.line is not None:
            where = f"{where}:{self.line}:{self.column}"
        return f"{where}: error[{self.code}]: {self.message}"
