"""Symbolic differentiation."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, Optional

from ..errors import UnsupportedFunction
from .expr import (
    ONE,
    ZERO,
    Add,
    Const,
    Expr,
    Func,
    Mul,
    Sym,
    add,
    cos,
    func,
    mul,
    power,
    sin,
)

_half = Fraction(1, 2)


def _dfunc(name: str, x: Expr) -> Expr:
    if name == "sin":
        return cos(x)
    if name == "cos":
        return -sin(x)
    if name == "tan":
        return add(ONE, power(func("tan", x), 2))
    if name == "sqrt":
        return mul(Const(_half), power(func("sqrt", x), -1))
    if name == "exp":
        return func("exp", x)
    if name == "ln":
        return power(x, -1)
    if name == "atan":
        return power(add(ONE, power(x, 2)), -1)
    if name == "sinh":
        return func("cosh", x)
    if name == "cosh":
        return func("sinh", x)
    raise UnsupportedFunction(f"cannot differentiate {name}")


def differentiate(
    e: Expr,
    var: str,
    chain: Optional[Callable[[str], Optional[Expr]]] = None,
    _memo: Optional[Dict[int, Expr]] = None,
) -> Expr:
    """Exact derivative of ``e`` with respect to the variable ``var``.

    ``chain(name)`` may return the derivative of another symbol with
    respect to ``var`` (total derivative through named intermediates);
    symbols it does not know are treated as independent.
    """
    memo = {} if _memo is None else _memo
    k = id(e)
    if k in memo:
        return memo[k][1]
    if isinstance(e, Const):
        out = ZERO
    elif isinstance(e, Sym):
        if e.name == var:
            out = ONE
        elif chain is not None:
            d = chain(e.name)
            out = ZERO if d is None else d
        else:
            out = ZERO
    elif isinstance(e, Func):
        (x,) = e.args
        if e.name == "abs":
            raise UnsupportedFunction("differentiation of abs is not supported")
        dx = differentiate(x, var, chain, memo)
        out = ZERO if dx == ZERO else mul(_dfunc(e.name, x), dx)
    elif isinstance(e, Mul):
        terms = []
        fs = e.factors
        for i, (b, n) in enumerate(fs):
            db = differentiate(b, var, chain, memo)
            if db == ZERO:
                continue
            rest = [power(bb, nn) for j, (bb, nn) in enumerate(fs) if j != i]
            terms.append(mul(Const(e.coef * n), power(b, n - 1), db, *rest))
        out = add(*terms)
    elif isinstance(e, Add):
        out = add(*(mul(Const(c), differentiate(t, var, chain, memo)) for t, c in e.terms))
    else:  # pragma: no cover
        raise TypeError(type(e))
    memo[k] = (e, out)
    return out
