"""Exception types shared by the StartFlow toolchain.

Every failure the library raises carries a short error code (``E-...``) so the
CLI can print it and tests can assert on it without matching message text.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, slots=True)
class SourceSpan:
    """Location in a source document (1-based line and column)."""

    line: int
    column: int
    length: int = 1

    def __post_init__(self) -> None:
        if self.line < 1 or self.column < 1:
            raise ValueError(f"span out of range: {self.line}:{self.column}")

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class StartflowError(Exception):
    """Base exception for all StartFlow errors."""

    code = "E-STARTFLOW"

    def __init__(self, message: str, code: str | None = None) -> None:
        if code is not None:
            self.code = code
        self.message = message
        super().__init__(f"{self.code}: {message}")


class ParseError(StartflowError):
    """One diagnostic produced while reading a `.sfw` document."""

    code = "E-SYNTAX"

    def __init__(self, span: SourceSpan, message: str, code: str | None = None) -> None:
        if not message:
            raise ValueError("parse diagnostics need a message")
        self.span = span
        super().__init__(message, code)

    def __str__(self) -> str:
        return f"{self.span} {self.code} {self.message}"


class ParseFailed(StartflowError):
    """Raised by :func:`startflow.dsl.parse` with every diagnostic collected."""

    code = "E-PARSE"

    def __init__(self, errors: list[ParseError]) -> None:
        self.errors = list(errors)
        super().__init__(f"{len(self.errors)} parse error(s)")


class GraphError(StartflowError):
    code = "E-NO-SCREENS"


class BrokenPathError(StartflowError):
    code = "E-BROKEN-PATH"


class UnknownScreenError(StartflowError):
    code = "E-UNKNOWN-SCREEN"


class UnknownFeatureError(StartflowError):
    code = "E-UNKNOWN-FEATURE"


class UnknownTaskError(StartflowError):
    code = "E-UNKNOWN-TASK"


class EvalError(StartflowError):
    """Bad evaluation input; the code says which check failed."""

    code = "E-BAD-ROW"


class ConfigError(StartflowError):
    code = "E-CONFIG"


class UsageError(StartflowError):
    code = "E-USAGE"


class SourceEncodingError(StartflowError):
    """Input file is not valid UTF-8."""

    code = "E-ENCODING"
