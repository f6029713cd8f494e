"""Target-language text for assignment sequences."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, Optional

from ..errors import ConfigError
from ..symbolic import FUNCTIONS, Style, to_text
from .sequence import Assignment, ExprSequence, Verbatim, is_internal

_CSHARP_FUNCS = {
    "sin": "Math.Sin", "cos": "Math.Cos", "tan": "Math.Tan", "sqrt": "Math.Sqrt",
    "exp": "Math.Exp", "ln": "Math.Log", "atan": "Math.Atan", "cosh": "Math.Cosh",
    "sinh": "Math.Sinh", "abs": "Math.Abs",
}
_C_FUNCS = {
    "sin": "sin", "cos": "cos", "tan": "tan", "sqrt": "sqrt", "exp": "exp", "ln": "log",
    "atan": "atan", "cosh": "cosh", "sinh": "sinh", "abs": "fabs",
}


@dataclass(frozen=True)
class Dialect:
    name: str
    c_like: bool = False
    functions: Optional[Dict[str, str]] = None
    pi: str = "pi"
    declare: str = ""
    terminator: str = ""
    pow_function: Optional[str] = None

    def style(self) -> Style:
        pi = self.pi
        return Style(
            functions=self.functions,
            pow_function=self.pow_function,
            c_like=self.c_like,
            symbol=lambda n: pi if n == "pi" else n,
        )

    def with_functions(self, overrides: Dict[str, str]) -> "Dialect":
        unknown = set(overrides) - set(FUNCTIONS)
        if unknown:
            raise ConfigError(f"unknown functions in dialect map: {', '.join(sorted(unknown))}")
        base = dict(self.functions or {f: f for f in FUNCTIONS})
        base.update(overrides)
        return replace(self, functions=base)


DIALECTS: Dict[str, Dialect] = {
    "neutral": Dialect("neutral"),
    "csharp": Dialect("csharp", True, _CSHARP_FUNCS, "Math.PI", "double ", ";"),
    "c": Dialect("c", True, _C_FUNCS, "M_PI", "double ", ";"),
}


def get_dialect(name: str, functions: Optional[Dict[str, str]] = None) -> Dialect:
    try:
        d = DIALECTS[name]
    except KeyError:
        raise ConfigError(f"unknown dialect {name!r}; known: {', '.join(sorted(DIALECTS))}") from None
    return d.with_functions(functions) if functions else d


def emit(seq: ExprSequence, dialect="neutral", indent: str = "") -> str:
    """One line per assignment; verbatim output blocks are copied."""
    d = get_dialect(dialect) if isinstance(dialect, str) else dialect
    st = d.style()
    lines = []
    for it in seq.items:
        if isinstance(it, Verbatim):
            text = it.text
            for ph, e in it.refs:
                text = text.replace(ph, to_text(e, st))
            lines.extend(indent + ln for ln in text.split("\n"))
            continue
        if is_internal(it.name):
            raise ValueError(f"internal name {it.name!r} reached the emitter; rename first")
        decl = d.declare if (it.kind != "output" or it.declare) else ""
        lines.append(f"{indent}{decl}{it.name} = {to_text(it.expr, st)}{d.terminator}")
    return "\n".join(lines) + ("\n" if lines else "")
