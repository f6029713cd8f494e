"""Recursive-descent parser for the seven DSL file roles.

The parser works directly on the source text with a cursor instead of a
separate token stream, because scalar expressions and ``output`` blocks
are captured verbatim up to a delimiter.
"""

from __future__ import annotations

import bisect
import re
from typing import Dict, List, Optional, Tuple

from ..errors import (
    DiagnosticsError,
    DSLSyntaxError,
    DuplicateName,
    GAMacroError,
    MalformedOutputBlock,
    Span,
    UnknownDefinitionForm,
    UnknownOperator,
)
from ..symbolic import parse_expr
from . import ast as A

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER = re.compile(r"[0-9]+")
_OPENERS = {"(": ")", "[": "]", "{": "}"}


class Scanner:
    def __init__(self, text: str, file: str = "<input>"):
        self.text = text
        self.file = file
        self.pos = 0
        self._lines = [0] + [m.end() for m in re.finditer("\n", text)]

    # positions -----------------------------------------------------------
    def where(self, pos: Optional[int] = None) -> Tuple[int, int]:
        pos = self.pos if pos is None else pos
        line = bisect.bisect_right(self._lines, pos) - 1
        return line + 1, pos - self._lines[line] + 1

    def span(self, start: int, end: Optional[int] = None) -> Span:
        l0, c0 = self.where(start)
        l1, c1 = self.where(self.pos if end is None else end)
        return Span(self.file, l0, c0, l1, c1)

    def error(self, msg: str, cls=DSLSyntaxError, start: Optional[int] = None):
        start = self.pos if start is None else start
        raise cls(msg, self.span(start, max(start, self.pos)))

    # lexing ----------------------------------------------------------------
    def skip(self):
        t = self.text
        while self.pos < len(t):
            c = t[self.pos]
            if c.isspace():
                self.pos += 1
            elif t.startswith("//", self.pos):
                nl = t.find("\n", self.pos)
                self.pos = len(t) if nl < 0 else nl + 1
            else:
                break

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def peek_char(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def peek_word(self) -> Optional[str]:
        self.skip()
        m = _IDENT.match(self.text, self.pos)
        return m.group() if m else None

    def word(self, what: str = "identifier") -> str:
        self.skip()
        m = _IDENT.match(self.text, self.pos)
        if not m:
            self.error(f"expected {what} but found {self._found()}")
        self.pos = m.end()
        return m.group()

    def keyword(self, kw: str):
        start = self.pos
        w = self.peek_word()
        if w is None or w.lower() != kw.lower():
            self.error(f"expected {kw!r} but found {self._found()}", start=start)
        self.word()

    def accept_keyword(self, kw: str) -> bool:
        w = self.peek_word()
        if w is not None and w.lower() == kw.lower():
            self.word()
            return True
        return False

    def qualified(self, what: str = "name") -> str:
        parts = [self.word(what)]
        while self.text.startswith(".", self.pos) and _IDENT.match(self.text, self.pos + 1):
            self.pos += 1
            parts.append(self.word(what))
        return ".".join(parts)

    def expect(self, lit: str):
        self.skip()
        if not self.text.startswith(lit, self.pos):
            self.error(f"expected {lit!r} but found {self._found()}")
        self.pos += len(lit)

    def accept(self, lit: str) -> bool:
        self.skip()
        if self.text.startswith(lit, self.pos):
            self.pos += len(lit)
            return True
        return False

    def _found(self) -> str:
        if self.pos >= len(self.text):
            return "end of file"
        return repr(self.text[self.pos : self.pos + 12].split("\n")[0])

    def raw_until(self, stops: str, what: str = "expression") -> str:
        """Text up to the first stop character outside brackets."""
        self.skip()
        t = self.text
        start = self.pos
        depth: List[str] = []
        i = start
        while i < len(t):
            c = t[i]
            if not depth and c in stops:
                break
            if c in _OPENERS:
                depth.append(_OPENERS[c])
            elif c in ")]}":
                if not depth or depth[-1] != c:
                    break
                depth.pop()
            elif c == "\n" and t.startswith("define", i + 1):
                break
            i += 1
        self.pos = i
        raw = " ".join(t[start:i].split())
        if not raw:
            self.error(f"expected {what} but found {self._found()}", start=start)
        return raw

    def blade(self) -> str:
        self.skip()
        m = _NUMBER.match(self.text, self.pos)
        if m and m.group() == "1":
            self.pos = m.end()
            return "1"
        parts = [self.word("basis blade")]
        while self.accept("^"):
            parts.append(self.word("basis vector"))
        return "^".join(parts)

    def name_list(self) -> Tuple[str, ...]:
        """``{a; b, c}`` list of plain identifiers."""
        self.expect("{")
        out = []
        if self.accept("}"):
            return ()
        while True:
            out.append(self.word())
            if self.accept("}"):
                return tuple(out)
            if not (self.accept(";") or self.accept(",")):
                self.error(f"expected ';' or '}}' but found {self._found()}")
            if self.accept("}"):
                return tuple(out)


def _check_scalar(sc: Scanner, text: str, start: int):
    try:
        parse_expr(text, span=sc.span(start))
    except GAMacroError as e:
        if e.span is None:
            e.span = sc.span(start)
        raise


class Parser:
    def __init__(self, text: str, file: str = "<input>"):
        self.sc = Scanner(text, file)

    # shared pieces -------------------------------------------------------
    def scalar(self, stops: str) -> str:
        self.sc.skip()
        start = self.sc.pos
        raw = self.sc.raw_until(stops)
        _check_scalar(self.sc, raw, start)
        return raw

    def coeff_list(self, key=None) -> A.Pairs:
        """``{ key : scalar; ... }``."""
        sc = self.sc
        key = key or sc.blade
        sc.expect("{")
        out = []
        while not sc.accept("}"):
            k = key()
            sc.expect(":")
            out.append((k, self.scalar(";}")))
            if not sc.accept(";") and sc.peek_char() != "}":
                sc.error(f"expected ';' or '}}' but found {sc._found()}")
        return tuple(out)

    def matrix(self) -> A.Matrix:
        sc = self.sc
        sc.expect("{")
        rows = []
        while True:
            sc.expect("{")
            row = []
            while True:
                row.append(self.scalar(",;}"))
                if sc.accept("}"):
                    break
                if not (sc.accept(",") or sc.accept(";")):
                    sc.error(f"expected ',' or '}}' but found {sc._found()}")
            rows.append(tuple(row))
            if sc.accept("}"):
                break
            if not (sc.accept(",") or sc.accept(";")):
                sc.error(f"expected ',' or '}}' but found {sc._found()}")
        width = {len(r) for r in rows}
        if len(width) != 1 or width.pop() != len(rows):
            sc.error("matrix must be square")
        return tuple(rows)

    def end(self, *words):
        for w in words:
            self.sc.keyword(w)

    def split_qualified(self, start: int) -> Tuple[str, str]:
        q = self.sc.qualified()
        if "." not in q:
            self.sc.error(f"expected <frame>.<name> but found {q!r}", start=start)
        f, _, n = q.partition(".")
        if "." in n:
            self.sc.error(f"too many dots in {q!r}", start=start)
        return f, n

    # declarations ---------------------------------------------------------
    def frame(self, start) -> A.FrameDecl:
        sc = self.sc
        name = sc.word("frame name")
        sc.keyword("as")
        sc.keyword("basis")
        sc.expect(":")
        basis = sc.name_list()
        form_start = sc.pos
        w = sc.peek_word()
        lw = (w or "").lower()
        if lw == "euclidean":
            sc.word()
            decl = A.FrameDecl(name, basis, "euclidean")
        elif lw == "subspace":
            sc.word()
            sc.keyword("of")
            decl = A.FrameDecl(name, basis, "subspace", source=sc.word("frame name"))
        elif lw == "orthogonalize":
            sc.word()
            decl = A.FrameDecl(name, basis, "orthogonalize", source=sc.word("frame name"))
        elif lw == "ipm":
            sc.word()
            sc.expect("=")
            decl = A.FrameDecl(name, basis, "ipm", matrix=self.matrix())
        elif lw == "signature":
            sc.word()
            sc.expect("=")
            sc.expect("{")
            sig = []
            while True:
                sig.append(self.scalar(",;}"))
                if sc.accept("}"):
                    break
                if not (sc.accept(",") or sc.accept(";")):
                    sc.error(f"expected ',' or '}}' but found {sc._found()}")
            decl = A.FrameDecl(name, basis, "signature", signature=tuple(sig))
        elif lw == "transform":
            sc.word()
            src = sc.word("frame name")
            sc.keyword("by")
            sc.keyword("BCM")
            sc.expect("=")
            decl = A.FrameDecl(name, basis, "bcm", source=src, matrix=self.matrix())
        else:
            sc.error(
                f"unknown frame definition {sc._found()}", UnknownDefinitionForm, start=form_start
            )
        self.end("end", "frame")
        return _with_span(decl, sc.span(start))

    def transform(self, start) -> A.TransformDecl:
        sc = self.sc
        name = sc.word("transform name")
        sc.expect(":")
        src = sc.word("frame name")
        sc.expect("->")
        dst = sc.word("frame name")
        sc.keyword("as")
        form_start = sc.pos
        w = (sc.peek_word() or "").lower()
        if w == "identity":
            sc.word()
            decl = A.TransformDecl(name, src, dst, "identity")
        elif w in ("alias", "inverse", "transpose"):
            sc.word()
            form = w
            if w == "inverse" and sc.accept_keyword("transpose"):
                form = "inverse_transpose"
            sc.keyword("of")
            decl = A.TransformDecl(name, src, dst, form, ref=sc.word("transform name"))
        elif w == "outermorphism":
            sc.word()
            sc.keyword("using")
            if sc.peek_char() == "{":
                decl = A.TransformDecl(name, src, dst, "matrix", matrix=self.matrix())
            else:
                q = sc.qualified()
                f, _, tail = q.partition(".")
                if tail != "BCM":
                    sc.error(f"expected <frame>.BCM but found {q!r}", start=form_start)
                decl = A.TransformDecl(name, src, dst, "bcm", ref=f)
        else:
            sc.error(
                f"unknown transform definition {sc._found()}",
                UnknownDefinitionForm,
                start=form_start,
            )
        self.end("end", "transform")
        return _with_span(decl, sc.span(start))

    def subspace(self, start) -> A.SubspaceDecl:
        sc = self.sc
        frame, name = self.split_qualified(sc.pos)
        sc.keyword("as")
        form_start = sc.pos
        w = (sc.peek_word() or "").lower()
        if w == "basis":
            sc.word()
            sc.expect("{")
            items = []
            while not sc.accept("}"):
                items.append(sc.blade())
                if not (sc.accept(";") or sc.accept(",")) and sc.peek_char() != "}":
                    sc.error(f"expected ';' or '}}' but found {sc._found()}")
            decl = A.SubspaceDecl(frame, name, "basis", tuple(items))
        elif w == "ga_span":
            sc.word()
            decl = A.SubspaceDecl(frame, name, "span", sc.name_list())
        else:
            sc.error(
                f"unknown subspace definition {sc._found()}",
                UnknownDefinitionForm,
                start=form_start,
            )
        self.end("end", "subspace")
        return _with_span(decl, sc.span(start))

    def mv_class(self, start) -> A.ClassDecl:
        sc = self.sc
        sc.keyword("class")
        frame, name = self.split_qualified(sc.pos)
        sc.keyword("as")
        parts, consts = [], []
        while True:
            w = sc.peek_word()
            if w == "end":
                break
            if sc.at_end():
                sc.error("unexpected end of file in multivector class")
            item = sc.blade()
            if sc.accept(":"):
                consts.append((item, self.scalar(";")))
            else:
                parts.append(item)
            sc.accept(";")
        if not parts and not consts:
            sc.error("multivector class needs at least one subspace", start=start)
        self.end("end", "multivector", "class")
        return A.ClassDecl(frame, name, tuple(parts), tuple(consts), span=sc.span(start))

    def constant(self, start) -> A.ConstantDecl:
        sc = self.sc
        frame, name = self.split_qualified(sc.pos)
        sc.keyword("as")
        sc.keyword("multivector")
        coeffs = self.coeff_list()
        self.end("end", "constant")
        return A.ConstantDecl(frame, name, coeffs, span=sc.span(start))

    def binding(self, start) -> A.BindingDecl:
        sc = self.sc
        name = sc.word("binding name")
        sc.keyword("as")
        sc.keyword("use")
        sc.keyword("frame")
        frame = sc.word("frame name")
        sc.keyword("bind")
        binds = self.coeff_list()

        def var():
            v = sc.raw_until(":", "variable")
            return v[1:-1].strip() if v.startswith("<") and v.endswith(">") else v

        mins = maxs = ()
        if sc.accept_keyword("min"):
            mins = self.coeff_list(var)
        if sc.accept_keyword("max"):
            maxs = self.coeff_list(var)
        self.end("end", "binding")
        return A.BindingDecl(name, frame, binds, mins, maxs, span=sc.span(start))

    def mv_list(self) -> A.Pairs:
        sc = self.sc
        sc.expect("{")
        out = []
        while not sc.accept("}"):
            n = sc.word("multivector name")
            if not sc.accept(":"):
                sc.keyword("as")
            out.append((n, sc.qualified("class name")))
            if not sc.accept(";") and not sc.accept(",") and sc.peek_char() != "}":
                sc.error(f"expected ';' or '}}' but found {sc._found()}")
        return tuple(out)

    def macro(self, start) -> A.MacroDecl:
        sc = self.sc
        name = sc.word("macro name")
        sc.keyword("as")
        sc.keyword("inputs")
        sc.expect(":")
        inputs = self.mv_list()
        sc.keyword("outputs")
        sc.expect(":")
        outputs = self.mv_list()
        sc.keyword("performs")
        sc.expect(":")
        body = []
        while True:
            sc.skip()
            if sc.at_end():
                sc.error("unexpected end of file inside macro body")
            if sc.peek_word() == "end":
                save = sc.pos
                sc.word()
                if sc.peek_word() == "macro":
                    sc.word()
                    break
                sc.pos = save
            body.append(self.statement())
            while sc.accept(";"):
                pass
        return A.MacroDecl(name, inputs, outputs, tuple(body), span=sc.span(start))

    # statements -------------------------------------------------------------
    def statement(self) -> A.Statement:
        sc = self.sc
        sc.skip()
        start = sc.pos
        w = sc.peek_word()
        if w == "join":
            sc.word()
            mode = sc.word("'on' or 'off'")
            if mode not in ("on", "off"):
                sc.error(f"expected 'on' or 'off' after join, found {mode!r}", start=start)
            return A.JoinStmt(mode == "on", span=sc.span(start))
        if w == "output":
            save = sc.pos
            sc.word()
            if sc.peek_char() == "{":
                return A.OutputStmt(self.output_block(), span=sc.span(start))
            sc.pos = save
        if w == "call":
            save = sc.pos
            sc.word()
            if sc.peek_char() != "=":
                macro = sc.word("macro name")
                sc.expect("{")
                binds = []
                while not sc.accept("}"):
                    a = sc.word("multivector name")
                    sc.expect(":")
                    b = sc.qualified("multivector name")
                    binds.append((a, b))
                    if not sc.accept(";") and not sc.accept(",") and sc.peek_char() != "}":
                        sc.error(f"expected ';' or '}}' but found {sc._found()}")
                return A.CallStmt(macro, tuple(binds), span=sc.span(start))
            sc.pos = save
        dst = sc.word("statement")
        sc.expect("=")
        if sc.accept("-"):
            src = sc.qualified("multivector name")
            return A.UnaryStmt(dst, "neg", src, span=sc.span(start))
        op_start = sc.pos
        head = sc.qualified("multivector name")
        c = sc.peek_char()
        if c == "{" and head.endswith(".multivector"):
            frame = head[: -len(".multivector")]
            return A.CtorStmt(dst, frame, self.coeff_list(), span=sc.span(start))
        if c == "(":
            if head not in A.UNARY_OPS:
                sc.error(f"unknown unary operator {head!r}", UnknownOperator, start=op_start)
            sc.expect("(")
            src = sc.qualified("multivector name")
            operand = None
            if sc.accept(","):
                if head not in A.UNARY_WITH_OPERAND:
                    sc.error(f"operator {head!r} takes a single operand", start=op_start)
                operand = self.unary_operand(head)
            elif head in A.UNARY_WITH_OPERAND:
                sc.error(f"operator {head!r} needs a second operand", start=op_start)
            sc.expect(")")
            return A.UnaryStmt(dst, head, src, operand, span=sc.span(start))
        if c == "[":
            sc.expect("[")
            src = sc.qualified("multivector name")
            sc.expect("]")
            return A.TransformStmt(dst, head, src, span=sc.span(start))
        if c in ("+", "-"):
            sc.pos += 1
            rhs = sc.qualified("multivector name")
            return A.BinaryStmt(dst, c, head, rhs, span=sc.span(start))
        w = sc.peek_word()
        if c in ("", ";") or w in ("end", "join", "output", "call"):
            return A.UnaryStmt(dst, "copy", head, span=sc.span(start))
        if w is not None:
            save = sc.pos
            sc.word()
            follows = sc.peek_char()
            if follows == "=" and not sc.text.startswith("==", sc.pos):
                sc.pos = save
                return A.UnaryStmt(dst, "copy", head, span=sc.span(start))
            if w not in A.BINARY_OPS:
                sc.error(f"unknown binary operator {w!r}", UnknownOperator, start=save)
            rhs = sc.qualified("multivector name")
            return A.BinaryStmt(dst, w, head, rhs, span=sc.span(start))
        sc.error(f"unexpected {sc._found()} in statement", start=start)

    def unary_operand(self, op: str) -> str:
        sc = self.sc
        if op in ("scale", "div_by_scalar"):
            return self.scalar(")")
        if op == "cast_to_grades":
            sc.skip()
            start = sc.pos
            raw = sc.raw_until(")")
            nums = raw.strip("{} ").replace(",", ";").split(";")
            if not raw.strip() or not all(n.strip().isdigit() for n in nums):
                sc.error(f"expected a grade list like {{0; 2}}, found {raw!r}", start=start)
            return "{" + "; ".join(n.strip() for n in nums) + "}"
        return " ".join(sc.raw_until(")", "operand").split())

    def output_block(self) -> str:
        sc = self.sc
        sc.skip()
        start = sc.pos
        t = sc.text
        assert t[sc.pos] == "{"
        depth = 0
        i = sc.pos
        while i < len(t):
            if t[i] == "{":
                depth += 1
            elif t[i] == "}":
                depth -= 1
                if depth == 0:
                    sc.pos = i + 1
                    return t[start + 1 : i].strip()
            i += 1
        sc.pos = len(t)
        sc.error("unbalanced braces in output statement", MalformedOutputBlock, start=start)

    # file level -----------------------------------------------------------------
    _ROLE_KIND = {
        "frames": "frame",
        "transforms": "transform",
        "subspaces": "subspace",
        "multivectors": "multivector",
        "constants": "constant",
        "bindings": "binding",
        "macros": "macro",
    }

    def parse_file(self, role: Optional[str] = None):
        """Parse every declaration; returns (decls, errors)."""
        sc = self.sc
        decls, errors = [], []
        while not sc.at_end():
            start = sc.pos
            try:
                sc.keyword("define")
                kind = sc.word("declaration kind").lower()
                if role is not None and kind != self._ROLE_KIND[role]:
                    sc.error(
                        f"'{kind}' declarations do not belong in the {role} file",
                        UnknownDefinitionForm,
                        start=start,
                    )
                handler = {
                    "frame": self.frame,
                    "transform": self.transform,
                    "subspace": self.subspace,
                    "multivector": self.mv_class,
                    "constant": self.constant,
                    "binding": self.binding,
                    "macro": self.macro,
                }.get(kind)
                if handler is None:
                    sc.error(f"unknown declaration kind {kind!r}", UnknownDefinitionForm, start=start)
                decls.append(handler(start))
            except GAMacroError as e:
                errors.append(e)
                self._recover(start)
        return decls, errors

    def _recover(self, start: int):
        m = re.compile(r"^\s*define\b", re.M).search(self.sc.text, max(start + 1, self.sc.pos))
        self.sc.pos = m.start() if m else len(self.sc.text)


def _with_span(decl, span):
    object.__setattr__(decl, "span", span)
    return decl


def _dups(items, key, what, errors):
    seen = {}
    for d in items:
        k = key(d)
        if k in seen:
            errors.append(DuplicateName(f"duplicate {what} {'.'.join(k) if isinstance(k, tuple) else k!r}", d.span))
        else:
            seen[k] = d


def parse_project(files: Dict[str, str], file_names: Optional[Dict[str, str]] = None) -> A.ProjectAst:
    """Parse the seven file roles (missing roles count as empty files)."""
    file_names = file_names or {}
    errors: List[GAMacroError] = []
    out: Dict[str, list] = {}
    unknown = set(files) - set(A.ROLES)
    if unknown:
        raise ValueError(f"unknown file roles: {sorted(unknown)}")
    for role in A.ROLES:
        text = files.get(role, "")
        decls, errs = Parser(text, file_names.get(role, f"{role}.gmac")).parse_file(role)
        out[role] = decls
        errors.extend(errs)
    ast = A.ProjectAst(
        tuple(out["frames"]),
        tuple(out["transforms"]),
        tuple(out["subspaces"]),
        tuple(out["multivectors"]),
        tuple(out["constants"]),
        tuple(out["bindings"]),
        tuple(out["macros"]),
    )
    _dups(ast.frames, lambda d: d.name, "frame", errors)
    _dups(ast.transforms, lambda d: d.name, "transform", errors)
    _dups(ast.subspaces, lambda d: (d.frame, d.name), "subspace", errors)
    _dups(ast.classes, lambda d: (d.frame, d.name), "multivector class", errors)
    _dups(ast.constants, lambda d: (d.frame, d.name), "constant", errors)
    _dups(ast.bindings, lambda d: d.name, "binding", errors)
    _dups(ast.macros, lambda d: d.name, "macro", errors)
    if errors:
        raise DiagnosticsError(errors)
    return ast


def parse_text(text: str, file: str = "<input>") -> A.ProjectAst:
    """Parse one text holding declarations of any kind."""
    decls, errors = Parser(text, file).parse_file(None)
    if errors:
        raise DiagnosticsError(errors)
    buckets = {k: [] for k in A.ROLES}
    kinds = {
        A.FrameDecl: "frames",
        A.TransformDecl: "transforms",
        A.SubspaceDecl: "subspaces",
        A.ClassDecl: "multivectors",
        A.ConstantDecl: "constants",
        A.BindingDecl: "bindings",
        A.MacroDecl: "macros",
    }
    for d in decls:
        buckets[kinds[type(d)]].append(d)
    return A.ProjectAst(*(tuple(buckets[r]) for r in A.ROLES))


def parse_statement(text: str, file: str = "<input>") -> A.Statement:
    p = Parser(text, file)
    stmt = p.statement()
    while p.sc.accept(";"):
        pass
    if not p.sc.at_end():
        p.sc.error(f"unexpected {p.sc._found()} after statement")
    return stmt
