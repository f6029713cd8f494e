"""Exception hierarchy shared by every stage of the compiler.

Each error carries a short machine-readable ``code`` (the class name by
default) and an optional source span so the CLI can report diagnostics as
JSON lines.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class Span:
    file: str = "<input>"
    line: int = 0
    col: int = 0
    end_line: int = 0
    end_col: int = 0

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


class GAMacroError(Exception):
    """Base class; ``code`` identifies the diagnostic kind."""

    def __init__(self, message: str, span: Optional[Span] = None):
        super().__init__(message)
        self.message = message
        self.span = span

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict:
        span = self.span or Span()
        return {
            "file": span.file,
            "span": [span.line, span.col, span.end_line, span.end_col],
            "code": self.code,
            "message": self.message,
        }

    def __str__(self) -> str:
        if self.span is not None:
            return f"{self.span}: {self.code}: {self.message}"
        return f"{self.code}: {self.message}"


# blades / frames
class NonSymmetricIPM(GAMacroError):
    pass


class DegenerateMetric(GAMacroError):
    pass


# symbolic
class DivisionByZeroConstant(GAMacroError):
    pass


class UnsupportedFunction(GAMacroError):
    pass


class UnboundVariable(GAMacroError):
    pass


class DomainError(GAMacroError):
    pass


class ScalarSyntaxError(GAMacroError):
    pass


# multivectors
class FrameMismatch(GAMacroError):
    pass


class BladeOutsideClass(GAMacroError):
    pass


class NullVersor(GAMacroError):
    pass


# DSL
class DSLSyntaxError(GAMacroError):
    @property
    def code(self) -> str:
        return "SyntaxError"


class DuplicateName(GAMacroError):
    pass


class UnknownDefinitionForm(GAMacroError):
    pass


class UnknownOperator(GAMacroError):
    pass


class MalformedOutputBlock(GAMacroError):
    pass


# compiler
class UnknownFrame(GAMacroError):
    pass


class UnknownClass(GAMacroError):
    pass


class UnknownTransform(GAMacroError):
    pass


class UnknownSubspace(GAMacroError):
    pass


class UnknownName(GAMacroError):
    pass


class UnknownBlade(GAMacroError):
    pass


class SingularTransform(GAMacroError):
    pass


class CyclicMacroCall(GAMacroError):
    pass


class TransformDomainMismatch(GAMacroError):
    pass


class UnboundCalleeInput(GAMacroError):
    pass


class ClassMismatch(GAMacroError):
    pass


class UnassignedOutput(GAMacroError):
    pass


# codegen
class MalformedBinding(GAMacroError):
    pass


class UnknownMacroName(GAMacroError):
    pass


class UnboundInputCoefficient(GAMacroError):
    pass


class UnmappedFunction(GAMacroError):
    pass


class OverlappingRegions(GAMacroError):
    pass


class ConfigError(GAMacroError):
    pass


class DiagnosticsError(GAMacroError):
    """Several diagnostics collected in one pass."""

    def __init__(self, errors: list):
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors) or "errors")
