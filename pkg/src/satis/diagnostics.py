from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int

    def __post_init__(self):
        if self.line < 1 or self.column < 1:
            raise ValueError(f"invalid span {self.line}:{self.column}")

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class ParseDiagnostic:
    span: SourceSpan
    message: str
    severity: str = ERROR
    source: str | None = None

    @property
    def is_error(self) -> bool:
        return self.severity == ERROR

    def with_source(self, source: str) -> ParseDiagnostic:
        return ParseDiagnostic(self.span, self.message, self.severity, source)

    def __str__(self) -> str:
        where = f"{self.source}:{self.span}" if self.source else str(self.span)
        return f"{where}: {self.severity}: {self.message}"


class ParseError(ValueError):
    """Raised when a document has at least one error diagnostic."""

    def __init__(self, diagnostics: Iterable[ParseDiagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))

    @classmethod
    def at(cls, line: int, column: int, message: str) -> ParseError:
        return cls([ParseDiagnostic(SourceSpan(line, column), message)])


def has_errors(diagnostics: Iterable[ParseDiagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)
