"""Diagnostic records shared by every compiler stage.

Diagnostics are plain data: a severity, a source span, a stable machine code,
and a human message.  They serialize to line-oriented JSON so other tools can
consume them without scraping prose.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Span:
    """1-based source range.  end_col is exclusive."""

    line: int
    col: int
    end_line: int
    end_col: int

    @staticmethod
    def point(line: int, col: int) -> "Span":
        return Span(line, col, line, col + 1)


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    span: Span
    code: str
    message: str

    def to_record(self) -> dict:
        return {
            "severity": self.severity.value,
            "code": self.code,
            "line": self.span.line,
            "col": self.span.col,
            "end_line": self.span.end_line,
            "end_col": self.span.end_col,
            "message": self.message,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)


def has_errors(diags: list[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diags)


def only_errors(diags: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.severity is Severity.ERROR]


def diagnostics_json(diags: list[Diagnostic]) -> str:
    """One JSON object per line, parse order preserved."""
    return "\n".join(d.to_json() for d in diags)
