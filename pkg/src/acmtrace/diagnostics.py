"""Source locations and diagnostics shared by the parser, builder and validator."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True, order=True)
class SourceLocation:
    """1-based line and UTF-8 byte column of a token start."""

    file: str
    line: int = 1
    column: int = 1

    def __post_init__(self) -> None:
        if self.line < 1 or self.column < 1:
            raise ValueError(f"invalid location {self.line}:{self.column}")

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    rule_id: str
    severity: Severity
    message: str
    loc: SourceLocation
    related: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.message:
            raise ValueError("diagnostic message must be non-empty")

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def sort_key(self) -> tuple:
        return (self.rule_id, self.loc, self.related, self.message)

    def format_text(self) -> str:
        return f"{self.loc}: {self.severity.value}[{self.rule_id}]: {self.message}"

    def to_dict(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "severity": self.severity.value,
            "message": self.message,
            "loc": {"file": self.loc.file, "line": self.loc.line, "column": self.loc.column},
            "related": list(self.related),
        }


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)


def sort_diagnostics(diagnostics: list[Diagnostic]) -> list[Diagnostic]:
    return sorted(diagnostics, key=Diagnostic.sort_key)


def format_diagnostics(diagnostics: list[Diagnostic], fmt: str = "text") -> str:
    """Render diagnostics as text lines or a JSON array."""
    if fmt == "json":
        return json.dumps([d.to_dict() for d in diagnostics], indent=2, ensure_ascii=False) + "\n"
    return "".join(d.format_text() + "\n" for d in diagnostics)
