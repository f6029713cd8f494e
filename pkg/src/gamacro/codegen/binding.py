"""Binding regions inside target-language source files.

A region looks like::

    // GMac : MacroName
    // GMac.Bind("u.e1", "<u.x>")
    // GMac.Bind("p", "ClassBinding", "obj")
    // GMac.AssumeMin("x", "0")
    // GMac end

The C# dialect also accepts ``#region GMac : MacroName`` ... ``#endregion``.
Generated code sits between the sentinel comments below, just before the
closing marker.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from ..errors import DiagnosticsError, GAMacroError, MalformedBinding, OverlappingRegions, Span

BEGIN_SENTINEL = "// <auto-generated by gamacro>"
END_SENTINEL = "// </auto-generated>"

_OPEN = re.compile(r"^(?P<indent>[ \t]*)//\s*GMac\s*:\s*(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*$")
_OPEN_CS = re.compile(
    r"^(?P<indent>[ \t]*)#region\s+GMac\s*:\s*(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*$"
)
_CLOSE = re.compile(r"^[ \t]*//\s*GMac\s+end\s*$")
_CLOSE_CS = re.compile(r"^[ \t]*#endregion\b.*$")
_DIRECTIVE = re.compile(r"^[ \t]*//\s*GMac\.(?P<verb>[A-Za-z]+)\s*\((?P<args>.*)\)\s*;?\s*$")
_LOOSE_DIRECTIVE = re.compile(r"^[ \t]*//\s*GMac\.")


@dataclass(frozen=True)
class CoefficientBind:
    mv: str
    blade: str
    expr: str
    line: int = 0


@dataclass(frozen=True)
class ClassBind:
    mv: str
    binding: str
    obj: str
    line: int = 0


@dataclass
class BindingPoint:
    macro: str
    binds: List[object] = field(default_factory=list)
    mins: List[Tuple[str, str]] = field(default_factory=list)
    maxs: List[Tuple[str, str]] = field(default_factory=list)
    file: str = "<input>"
    open_line: int = 0  # 0-based line indices
    close_line: int = 0
    indent: str = ""
    block: Optional[Tuple[int, int]] = None  # existing generated block (inclusive lines)
    warnings: List[str] = field(default_factory=list)

    @property
    def span(self) -> Span:
        return Span(self.file, self.open_line + 1, 1, self.close_line + 1, 1)


def split_args(text: str) -> List[str]:
    """Comma separated arguments; each is a quoted string or bare text."""
    args, i, n = [], 0, len(text)
    while True:
        while i < n and text[i].isspace():
            i += 1
        if i >= n:
            if args:
                raise ValueError("trailing comma")
            return args
        if text[i] == '"':
            j, buf = i + 1, []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    j += 1
                buf.append(text[j])
                j += 1
            if j >= n:
                raise ValueError("unterminated string")
            args.append("".join(buf))
            i = j + 1
        else:
            depth, j = 0, i
            while j < n and not (text[j] == "," and depth == 0):
                if text[j] in "([<":
                    depth += 1
                elif text[j] in ")]>":
                    depth -= 1
                j += 1
            args.append(text[i:j].strip())
            i = j
        while i < n and text[i].isspace():
            i += 1
        if i >= n:
            return args
        if text[i] != ",":
            raise ValueError(f"unexpected {text[i]!r}")
        i += 1


def _strip_var(v: str) -> str:
    v = v.strip()
    if v.startswith("<") and v.endswith(">"):
        v = v[1:-1].strip()
    return v


def scan_source(text: str, dialect: str = "neutral", file: str = "<input>") -> List[BindingPoint]:
    """Find every binding region; raises DiagnosticsError on malformed ones."""
    lines = text.split("\n")
    points: List[BindingPoint] = []
    errors: List[GAMacroError] = []
    cs = dialect == "csharp"
    i = 0
    while i < len(lines):
        line = lines[i]
        m = _OPEN.match(line) or (_OPEN_CS.match(line) if cs else None)
        if not m:
            if _CLOSE.match(line) or (cs and _CLOSE_CS.match(line) and "GMac" in line):
                errors.append(MalformedBinding("region end without a start", Span(file, i + 1, 1, i + 1, 1)))
            i += 1
            continue
        bp = BindingPoint(m.group("name"), file=file, open_line=i, indent=m.group("indent"))
        closer = _CLOSE_CS if m.re is _OPEN_CS else _CLOSE
        j = i + 1
        bad = False
        block_start = None
        while j < len(lines):
            ln = lines[j]
            sp = Span(file, j + 1, 1, j + 1, len(ln) + 1)
            if closer.match(ln):
                break
            if _OPEN.match(ln) or (cs and _OPEN_CS.match(ln)):
                errors.append(OverlappingRegions("binding region opened inside another region", sp))
                bad = True
                break
            stripped = ln.strip()
            if stripped == BEGIN_SENTINEL:
                block_start = j
            elif stripped == END_SENTINEL:
                if block_start is None:
                    errors.append(MalformedBinding("generated block end without a start", sp))
                    bad = True
                else:
                    bp.block = (block_start, j)
                    block_start = None
            elif block_start is None and _LOOSE_DIRECTIVE.match(ln):
                try:
                    _directive(bp, ln, j)
                except (ValueError, MalformedBinding) as e:
                    errors.append(MalformedBinding(f"malformed directive: {e}", sp))
                    bad = True
            j += 1
        else:
            errors.append(MalformedBinding(f"region for {bp.macro!r} is never closed", bp.span))
            bad = True
        if block_start is not None:
            errors.append(MalformedBinding("generated block is never closed", bp.span))
            bad = True
        bp.close_line = j
        if not bad:
            if not bp.binds:
                bp.warnings.append(f"binding point for {bp.macro!r} has no Bind directives")
            points.append(bp)
        nested = j < len(lines) and not closer.match(lines[j])
        i = j if nested else j + 1
    if errors:
        raise DiagnosticsError(errors)
    return points


def _directive(bp: BindingPoint, line: str, j: int):
    m = _DIRECTIVE.match(line)
    if not m:
        raise ValueError("expected GMac.<Verb>(...)")
    verb, args = m.group("verb"), split_args(m.group("args"))
    if verb == "Bind":
        if len(args) == 2:
            target, expr = args
            mv, dot, blade = target.strip().partition(".")
            if not dot or not mv or not blade:
                raise ValueError(f"expected \"<multivector>.<blade>\", got {target!r}")
            if not expr.strip():
                raise ValueError("empty scalar function")
            bp.binds.append(CoefficientBind(mv.strip(), blade.strip(), expr.strip(), j + 1))
        elif len(args) == 3:
            bp.binds.append(ClassBind(args[0].strip(), args[1].strip(), args[2].strip(), j + 1))
        else:
            raise ValueError("Bind takes two or three arguments")
    elif verb in ("AssumeMin", "AssumeMax"):
        if len(args) != 2:
            raise ValueError(f"{verb} takes two arguments")
        var, val = _strip_var(args[0]), args[1].strip()
        try:
            float(val)
        except ValueError:
            from ..compiler import constant_number

            try:
                constant_number(val)
            except GAMacroError:
                raise ValueError(f"{verb} value {val!r} is not a constant") from None
        (bp.mins if verb == "AssumeMin" else bp.maxs).append((var, val))
    else:
        raise ValueError(f"unknown directive GMac.{verb}")
