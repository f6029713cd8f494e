"""Declaration and statement nodes produced by the parser.

Scalar expressions are kept as their source text; the compiler parses
them once names can be resolved.  Spans are excluded from equality so
that re-parsed printouts compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

from ..errors import Span

Pairs = Tuple[Tuple[str, str], ...]
Matrix = Tuple[Tuple[str, ...], ...]

ROLES = ("frames", "transforms", "subspaces", "multivectors", "constants", "bindings", "macros")

BINARY_OPS = ("gp", "op", "sp", "lcp", "rcp", "fdp", "hip", "cp", "acp", "+", "-")
UNARY_OPS = (
    "grade_inv",
    "cliff_conj",
    "reverse",
    "scale",
    "div_by_scalar",
    "norm",
    "norm2",
    "quasi_norm",
    "quasi_norm2",
    "diff",
    "cast_to_grades",
    "cast_to_subspace",
    "cast_to_class",
)
UNARY_WITH_OPERAND = ("scale", "div_by_scalar", "diff", "cast_to_grades", "cast_to_subspace", "cast_to_class")


def _span():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class FrameDecl:
    name: str
    basis: Tuple[str, ...]
    form: str  # euclidean | signature | ipm | subspace | orthogonalize | bcm
    source: Optional[str] = None
    matrix: Optional[Matrix] = None
    signature: Optional[Tuple[str, ...]] = None
    span: Span = _span()


@dataclass(frozen=True)
class TransformDecl:
    name: str
    source: str
    dest: str
    form: str  # identity | alias | inverse | transpose | inverse_transpose | bcm | matrix
    ref: Optional[str] = None
    matrix: Optional[Matrix] = None
    span: Span = _span()


@dataclass(frozen=True)
class SubspaceDecl:
    frame: str
    name: str
    form: str  # basis | span
    items: Tuple[str, ...]
    span: Span = _span()


@dataclass(frozen=True)
class ClassDecl:
    frame: str
    name: str
    parts: Tuple[str, ...]
    constants: Pairs = ()
    span: Span = _span()


@dataclass(frozen=True)
class ConstantDecl:
    frame: str
    name: str
    coeffs: Pairs
    span: Span = _span()


@dataclass(frozen=True)
class BindingDecl:
    name: str
    frame: str
    binds: Pairs
    mins: Pairs = ()
    maxs: Pairs = ()
    span: Span = _span()


# statements ------------------------------------------------------------------


@dataclass(frozen=True)
class CtorStmt:
    dst: str
    frame: str
    coeffs: Pairs
    span: Span = _span()


@dataclass(frozen=True)
class BinaryStmt:
    dst: str
    op: str
    lhs: str
    rhs: str
    span: Span = _span()


@dataclass(frozen=True)
class TransformStmt:
    dst: str
    transform: str
    src: str
    span: Span = _span()


@dataclass(frozen=True)
class UnaryStmt:
    """Unary operator; ``op`` is also ``copy`` or ``neg`` for the two
    operator-free forms."""

    dst: str
    op: str
    src: str
    operand: Optional[str] = None
    span: Span = _span()


@dataclass(frozen=True)
class CallStmt:
    macro: str
    bindings: Pairs
    span: Span = _span()


@dataclass(frozen=True)
class OutputStmt:
    text: str
    span: Span = _span()


@dataclass(frozen=True)
class JoinStmt:
    on: bool
    span: Span = _span()


Statement = Union[CtorStmt, BinaryStmt, TransformStmt, UnaryStmt, CallStmt, OutputStmt, JoinStmt]


@dataclass(frozen=True)
class MacroDecl:
    name: str
    inputs: Pairs
    outputs: Pairs
    body: Tuple[Statement, ...]
    span: Span = _span()


@dataclass(frozen=True)
class ProjectAst:
    frames: Tuple[FrameDecl, ...] = ()
    transforms: Tuple[TransformDecl, ...] = ()
    subspaces: Tuple[SubspaceDecl, ...] = ()
    classes: Tuple[ClassDecl, ...] = ()
    constants: Tuple[ConstantDecl, ...] = ()
    bindings: Tuple[BindingDecl, ...] = ()
    macros: Tuple[MacroDecl, ...] = ()

    def merged(self, other: "ProjectAst") -> "ProjectAst":
        return ProjectAst(
            *(getattr(self, f) + getattr(other, f) for f in self.__dataclass_fields__)
        )
