"""Self-contained symbolic scalar engine."""

from .calculus import differentiate
from .evaluate import eval_numeric
from .expr import (
    FUNCTIONS,
    MINUS_ONE,
    ONE,
    PI,
    ZERO,
    Add,
    Const,
    Expr,
    Func,
    Mul,
    Sym,
    add,
    as_expr,
    cos,
    div,
    free_symbols,
    func,
    iter_nodes,
    mul,
    neg,
    power,
    sin,
    sqrt,
    sub,
    substitute,
    symbols,
)
from .parse import parse_expr
from .printer import NEUTRAL, Style, op_count, to_text
from .simplify import EMPTY, AssumptionSet, SymbolicCache, is_nonnegative, simplify


def canonical_key(e: Expr):
    """Structural key; equal canonical trees have equal keys."""
    return e.key


__all__ = [
    "FUNCTIONS", "MINUS_ONE", "ONE", "PI", "ZERO", "Add", "Const", "Expr", "Func", "Mul",
    "Sym", "add", "as_expr", "cos", "div", "free_symbols", "func", "iter_nodes", "mul",
    "neg", "power", "sin", "sqrt", "sub", "substitute", "symbols", "parse_expr", "NEUTRAL",
    "Style", "op_count", "to_text", "EMPTY", "AssumptionSet", "SymbolicCache",
    "is_nonnegative", "simplify", "canonical_key", "differentiate", "eval_numeric",
]
