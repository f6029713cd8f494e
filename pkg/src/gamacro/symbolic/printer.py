"""Text rendering and operation counting for scalar expressions."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, Optional

from ..errors import UnmappedFunction
from .expr import Add, Const, Expr, Func, Mul, Sym

# precedence levels
_SUM, _PROD, _UNARY, _POW, _ATOM = 1, 2, 3, 4, 5


class Style:
    """Rendering knobs shared by the neutral and C-like dialects.

    ``functions`` maps engine function names to target names; ``None``
    keeps the engine names.  ``pow_function`` renders integer powers as a
    call (``Math.Pow(x, 2)``); without it powers are written ``x^2`` in
    neutral style or expanded to repeated products in C-like style.
    """

    def __init__(
        self,
        functions: Optional[Dict[str, str]] = None,
        pow_function: Optional[str] = None,
        c_like: bool = False,
        symbol: Optional[Callable[[str], str]] = None,
    ):
        self.functions = functions
        self.pow_function = pow_function
        self.c_like = c_like
        self.symbol = symbol or (lambda n: n)

    def func_name(self, name: str) -> str:
        if self.functions is None:
            return name
        if name not in self.functions:
            raise UnmappedFunction(f"dialect has no mapping for function {name!r}")
        return self.functions[name]

    def number(self, v) -> str:
        if isinstance(v, Fraction):
            if self.c_like:
                return _float_text(float(v))
            if v.denominator == 1:
                return str(v.numerator)
            return f"{v.numerator}/{v.denominator}"
        return _float_text(v)


NEUTRAL = Style()


def _float_text(x: float) -> str:
    t = repr(float(x))
    if t in ("inf", "-inf", "nan"):
        raise ValueError(f"cannot render non-finite constant {t}")
    return t


def to_text(e: Expr, style: Style = NEUTRAL) -> str:
    return _render(e, style)[0]


def _wrap(text_prec, level):
    text, prec = text_prec
    return f"({text})" if prec < level else text


def _render(e: Expr, st: Style):
    if isinstance(e, Const):
        v = e.value
        text = st.number(abs(v) if v < 0 else v)
        if v < 0:
            return "-" + text, _UNARY
        if isinstance(v, Fraction) and v.denominator != 1 and not st.c_like:
            return text, _PROD
        return text, _ATOM
    if isinstance(e, Sym):
        return st.symbol(e.name), _ATOM
    if isinstance(e, Func):
        args = ", ".join(_render(a, st)[0] for a in e.args)
        return f"{st.func_name(e.name)}({args})", _ATOM
    if isinstance(e, Mul):
        return _render_mul(e.coef, e.factors, st)
    if isinstance(e, Add):
        return _render_add(e, st)
    raise TypeError(type(e))  # pragma: no cover


def _render_power(base: Expr, n: int, st: Style):
    """Render base**n for n >= 1."""
    if n == 1:
        return _render(base, st)
    if st.pow_function:
        return f"{st.pow_function}({_render(base, st)[0]}, {n})", _ATOM
    if st.c_like:
        b = _wrap(_render(base, st), _POW)
        return "*".join([b] * n), _PROD
    return f"{_wrap(_render(base, st), _ATOM)}^{n}", _POW


def _render_mul(coef, factors, st: Style):
    """Render ``coef * prod`` with the sign pulled out in front."""
    neg = coef < 0
    c = -coef if neg else coef
    num, den = [], []
    if isinstance(c, Fraction):
        if c.numerator != 1:
            num.append((st.number(Fraction(c.numerator)), _ATOM))
        if c.denominator != 1:
            den.append((st.number(Fraction(c.denominator)), _ATOM))
    elif c != 1:
        num.append((st.number(c), _ATOM))
    for b, x in factors:
        (num if x > 0 else den).append(_render_power(b, abs(x), st))
    if num:
        text = "*".join(_wrap(p, _POW if len(num) > 1 else _PROD) for p in num)
        if len(num) > 1:
            prec = _PROD
        else:
            prec = num[0][1] if num[0][1] >= _PROD else _ATOM
    else:
        text, prec = st.number(Fraction(1)), _ATOM
    if den:
        if len(den) == 1:
            dtext = _wrap(den[0], _POW)
        else:
            dtext = "(" + "*".join(_wrap(p, _POW) for p in den) + ")"
        text = f"{_wrap((text, prec), _PROD)}/{dtext}"
        prec = _PROD
    if neg:
        if prec <= _PROD and (len(num) + len(den)) > 1:
            return f"-({text})", _UNARY
        return "-" + _wrap((text, prec), _POW), _UNARY
    return text, prec


def _render_add(e: Add, st: Style):
    parts = []
    for t, c in e.terms:
        if isinstance(t, Mul):
            parts.append((c < 0, _render_mul(abs(c) * t.coef, t.factors, st)))
        else:
            parts.append((c < 0, _render_mul(abs(c), ((t, 1),), st)))
    if e.const != 0:
        parts.append((e.const < 0, _render(Const(abs(e.const)), st)))
    out = []
    for i, (negative, tp) in enumerate(parts):
        text, prec = tp
        if i == 0:
            if negative:
                if prec <= _PROD and prec != _ATOM and ("*" in text or "/" in text):
                    out.append(f"-({text})")
                else:
                    out.append("-" + _wrap(tp, _POW))
            else:
                out.append(text)
        else:
            out.append((" - " if negative else " + ") + _wrap(tp, _PROD if negative else _SUM))
    return "".join(out), _SUM


# --------------------------------------------------------------------------
# operation counting


def op_count(e: Expr, _memo=None) -> int:
    """Arithmetic operations (+, -, *, /, calls) needed to evaluate ``e``.

    Shared subtrees are counted every time they occur; the count mirrors
    the C-like rendering with repeated multiplication for powers.
    """
    if isinstance(e, (Const, Sym)):
        return 0
    if isinstance(e, Func):
        return 1 + sum(op_count(a) for a in e.args)
    if isinstance(e, Mul):
        return _mul_ops(e.coef, e.factors) + (1 if e.coef < 0 else 0)
    if isinstance(e, Add):
        n = len(e.terms) + (1 if e.const != 0 else 0)
        ops = n - 1
        for t, c in e.terms:
            if isinstance(t, Mul):
                ops += _mul_ops(abs(c) * t.coef, t.factors)
            else:
                ops += _mul_ops(abs(c), ((t, 1),))
        if e.terms and e.terms[0][1] < 0:
            ops += 1
        return ops
    raise TypeError(type(e))  # pragma: no cover


def _mul_ops(coef, factors) -> int:
    c = abs(coef)
    n_num = n_den = 0
    if isinstance(c, Fraction):
        n_num += c.numerator != 1
        n_den += c.denominator != 1
    elif c != 1:
        n_num += 1
    ops = 0
    for b, x in factors:
        ops += abs(x) * op_count(b) + abs(x) - 1
        if x > 0:
            n_num += 1
        else:
            n_den += 1
    ops += max(n_num - 1, 0) + n_den
    return ops
