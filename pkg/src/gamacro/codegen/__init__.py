"""Binding-point code generation: evaluate, optimize, emit and splice."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..compiler import CompiledProject
from ..symbolic import SymbolicCache
from .binding import BEGIN_SENTINEL, END_SENTINEL, BindingPoint, ClassBind, CoefficientBind, scan_source
from .emit import DIALECTS, Dialect, emit, get_dialect
from .evaluate import Evaluation, evaluate_macro, resolve_bindings
from .interpret import interpret, parse_block, run_text
from .optimize import optimize, rename_internal
from .sequence import Assignment, ExprSequence, Verbatim, is_atomic
from .splice import splice, splice_all
from .verify import VerifyReport, extract_block, verify_block


@dataclass
class GeneratedCode:
    bp: BindingPoint
    evaluation: Evaluation
    raw: ExprSequence  # renamed, unoptimized
    sequence: ExprSequence  # renamed, optimized
    text: str

    @property
    def op_reduction(self) -> float:
        before = self.raw.op_count()
        return self.sequence.op_count() / before if before else 1.0


def generate(
    project: CompiledProject,
    bp: BindingPoint,
    dialect="neutral",
    strict: bool = False,
    emit_zeros: bool = False,
    cache: Optional[SymbolicCache] = None,
    optimized: bool = True,
) -> GeneratedCode:
    """Full pipeline for one binding point."""
    d = get_dialect(dialect) if isinstance(dialect, str) else dialect
    ev = evaluate_macro(project, bp.macro, bp, strict, emit_zeros, cache)
    raw = rename_internal(ev.sequence)
    seq = rename_internal(optimize(ev.sequence, ev.bindings.assumptions, ev.cache)) if optimized else raw
    return GeneratedCode(bp, ev, raw, seq, emit(seq, d, bp.indent))


def generate_macro(project: CompiledProject, macro: str, binds, **kw) -> GeneratedCode:
    """Generate from ``(target, expr)`` pairs without a source file."""
    bp = BindingPoint(macro)
    for target, expr in binds:
        mv, _, blade = target.partition(".")
        bp.binds.append(CoefficientBind(mv, blade, expr))
    return generate(project, bp, **kw)


__all__ = [
    "BEGIN_SENTINEL", "END_SENTINEL", "BindingPoint", "ClassBind", "CoefficientBind",
    "DIALECTS", "Dialect", "Evaluation", "ExprSequence", "Assignment", "Verbatim",
    "GeneratedCode", "emit", "evaluate_macro", "generate", "generate_macro", "get_dialect",
    "interpret", "is_atomic", "optimize", "parse_block", "rename_internal", "resolve_bindings",
    "run_text", "scan_source", "splice", "splice_all", "VerifyReport", "extract_block",
    "verify_block",
]
