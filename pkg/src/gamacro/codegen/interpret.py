"""Straight-line execution of sequences and of generated target text."""

from __future__ import annotations

import re
from typing import Dict, Optional

from ..errors import GAMacroError
from ..symbolic import eval_numeric, parse_expr
from .emit import Dialect, get_dialect
from .sequence import Assignment, ExprSequence

_ASSIGN = re.compile(
    r"^\s*(?:double\s+|float\s+|var\s+)?(?P<name>[A-Za-z_][A-Za-z0-9_.]*(?:\[[0-9]+\][A-Za-z0-9_.]*)*)"
    r"\s*=\s*(?P<expr>[^=].*?)\s*;?\s*$"
)
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*")


def interpret(seq: ExprSequence, env: Dict[str, object]) -> Dict[str, object]:
    """Run the assignments in order; returns every assigned value.

    Values may be floats or numpy arrays (one lane per sample).
    """
    state = dict(env)
    out = {}
    for it in seq.assignments():
        v = eval_numeric(it.expr, state)
        state[it.name] = v
        out[it.name] = v
    return out


def parse_block(text: str, dialect="neutral") -> ExprSequence:
    """Read emitted assignment lines back into a sequence.

    Lines that are not assignments (comments, verbatim output) are skipped.
    """
    d: Dialect = get_dialect(dialect) if isinstance(dialect, str) else dialect
    reverse = {v: k for k, v in (d.functions or {}).items() if v != k}
    reverse[d.pi] = "pi"
    items = []
    for line in text.split("\n"):
        if line.strip().startswith("//"):
            continue
        m = _ASSIGN.match(line)
        if not m:
            continue
        src = _WORD.sub(lambda w: reverse.get(w.group(), w.group()), m.group("expr"))
        try:
            e = parse_expr(src)
        except GAMacroError:
            continue
        items.append(Assignment(m.group("name"), e, "output"))
    return ExprSequence(items)


def run_text(text: str, env: Dict[str, object], dialect="neutral") -> Dict[str, object]:
    return interpret(parse_block(text, dialect), env)
