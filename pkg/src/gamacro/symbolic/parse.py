"""Surface syntax for scalar expressions.

Grammar: infix ``+ - * / ^`` (``^`` binds tightest and takes an integer
exponent), function calls ``f(x)``, dotted names, numeric literals and
``<...>`` placeholders for opaque target-language variables.  Decimal
literals are read as exact rationals.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Callable, List, Optional, Tuple

from ..errors import ScalarSyntaxError, Span, UnsupportedFunction
from .expr import FUNCTIONS, Const, Expr, Sym, add, div, func, mul, neg, power

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<place><[^<>]*>)
  | (?P<name>[A-Za-z_][A-Za-z0-9_.]*(?:\[[0-9]+\][A-Za-z0-9_.]*)*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)

Resolver = Callable[[str, bool], Expr]


def tokenize(text: str, span: Optional[Span] = None) -> List[Tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ScalarSyntaxError(f"unexpected character {text[pos]!r} in {text!r}", span)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", pos))
    return out


def _default_resolve(name: str, placeholder: bool) -> Expr:
    return Sym(name)


class _Parser:
    def __init__(self, text: str, resolve: Resolver, span: Optional[Span]):
        self.text = text
        self.toks = tokenize(text, span)
        self.i = 0
        self.resolve = resolve
        self.span = span

    def error(self, msg):
        raise ScalarSyntaxError(f"{msg} in {self.text!r}", self.span)

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            self.error(f"expected {value!r} but found {tok[1] or 'end of input'!r}")
        self.i += 1
        return tok

    def parse(self) -> Expr:
        e = self.sum()
        if self.peek()[0] != "end":
            self.error(f"unexpected {self.peek()[1]!r}")
        return e

    def sum(self) -> Expr:
        e = self.product()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.product()
            e = add(e, rhs) if op == "+" else add(e, neg(rhs))
        return e

    def product(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def unary(self) -> Expr:
        if self.peek()[1] == "-":
            self.take()
            return neg(self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.pow()

    def pow(self) -> Expr:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            if self.peek()[1] == "(":
                self.take()
                exp = self.sum()
                self.take(")")
            else:
                tok = self.take()
                if tok[0] != "num":
                    self.error("exponent must be an integer literal")
                exp = Const(Fraction(tok[1]))
            if not isinstance(exp, Const) or Fraction(exp.value).denominator != 1:
                self.error("exponent must be an integer")
            return power(base, sign * int(exp.value))
        return base

    def atom(self) -> Expr:
        kind, value, _ = self.take()
        if kind == "num":
            return Const(Fraction(value))
        if kind == "place":
            return self.resolve(value[1:-1].strip(), True)
        if kind == "name":
            if self.peek()[1] == "(":
                self.take()
                args = [self.sum()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.sum())
                self.take(")")
                if value == "pow" and len(args) == 2:
                    n = args[1]
                    if not isinstance(n, Const) or Fraction(n.value).denominator != 1:
                        self.error("pow exponent must be an integer")
                    return power(args[0], int(n.value))
                if value not in FUNCTIONS:
                    raise UnsupportedFunction(f"unknown function {value!r}", self.span)
                return func(value, *args)
            return self.resolve(value, False)
        if value == "(":
            e = self.sum()
            self.take(")")
            return e
        self.error(f"unexpected {value or 'end of input'!r}")


def parse_expr(text: str, resolve: Optional[Resolver] = None, span: Optional[Span] = None) -> Expr:
    """Parse ``text``; ``resolve(name, is_placeholder)`` maps names to trees."""
    return _Parser(text, resolve or _default_resolve, span).parse()
