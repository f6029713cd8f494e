"""Immutable scalar expression trees kept in a canonical form.

Every constructor (:func:`add`, :func:`mul`, :func:`power`, :func:`func`)
returns an already-canonical tree: sums and products are flattened, like
terms and like bases are merged, numeric constants are folded, and children
are sorted by a structural total order.  Negation is a product with
coefficient ``-1`` and division is a factor with a negative integer
exponent, so ``Neg``/``Div``/``Pow`` never appear as separate node kinds.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Iterable, Tuple, Union

from ..errors import DivisionByZeroConstant, UnsupportedFunction

Number = Union[Fraction, float]

FUNCTIONS = ("sin", "cos", "tan", "sqrt", "exp", "ln", "atan", "cosh", "sinh", "abs")
_ODD = {"sin", "tan", "atan", "sinh"}
_EVEN = {"cos", "cosh"}

RESERVED_CONSTANTS = {"pi": math.pi}


def as_number(x) -> Number:
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if x.is_integer() and abs(x) < 2**53:
            # integral floats are exact; keeps 1.0*x == x
            return Fraction(int(x))
        return x
    raise TypeError(f"not a number: {x!r}")


def as_expr(x) -> "Expr":
    if isinstance(x, Expr):
        return x
    return Const(as_number(x))


class Expr:
    __slots__ = ("key", "_hash")

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, Expr):
            if isinstance(other, (int, float, Fraction)) and not isinstance(other, bool):
                return isinstance(self, Const) and self.value == other
            return NotImplemented
        return self._hash == other._hash and self.key == other.key

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __lt__(self, other):
        return self.key < other.key

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer exponents are supported")
        return power(self, n)

    def __repr__(self):
        from .printer import to_text

        return f"Expr({to_text(self)!r})"

    def __str__(self):
        from .printer import to_text

        return to_text(self)

    # structural helpers -------------------------------------------------
    @property
    def is_const(self) -> bool:
        return isinstance(self, Const)

    def children(self) -> Tuple["Expr", ...]:
        return ()


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: Number):
        self.value = value
        self.key = (0, value)
        self._hash = hash(self.key)

    @property
    def is_exact(self) -> bool:
        return isinstance(self.value, Fraction)


class Sym(Expr):
    """A named scalar variable; ``pi`` is reserved for the constant."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self.key = (1, name)
        self._hash = hash(self.key)


class Func(Expr):
    __slots__ = ("name", "args")

    def __init__(self, name: str, args: Tuple[Expr, ...]):
        self.name = name
        self.args = args
        self.key = (2, name, tuple(a.key for a in args))
        self._hash = hash(self.key)

    def children(self):
        return self.args


class Mul(Expr):
    """``coef * prod(base**exp)``; bases are never Const or Mul."""

    __slots__ = ("coef", "factors")

    def __init__(self, coef: Number, factors: Tuple[Tuple[Expr, int], ...]):
        self.coef = coef
        self.factors = factors
        self.key = (3, tuple((b.key, e) for b, e in factors), coef)
        self._hash = hash(self.key)

    def children(self):
        return tuple(b for b, _ in self.factors)


class Add(Expr):
    """``const + sum(coef * term)``; terms are coefficient-free monomials."""

    __slots__ = ("const", "terms")

    def __init__(self, const: Number, terms: Tuple[Tuple[Expr, Number], ...]):
        self.const = const
        self.terms = terms
        self.key = (4, tuple((t.key, c) for t, c in terms), const)
        self._hash = hash(self.key)

    def children(self):
        return tuple(t for t, _ in self.terms)


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))
MINUS_ONE = Const(Fraction(-1))
PI = Sym("pi")


def _is_zero(c: Number) -> bool:
    return c == 0


def _split_coef(e: Expr) -> Tuple[Number, Expr]:
    """Split ``e`` into (numeric coefficient, coefficient-free monomial)."""
    if isinstance(e, Mul) and e.coef != 1:
        if len(e.factors) == 1 and e.factors[0][1] == 1:
            return e.coef, e.factors[0][0]
        return e.coef, Mul(Fraction(1), e.factors)
    return Fraction(1), e


def add(*args) -> Expr:
    const: Number = Fraction(0)
    acc: Dict[tuple, list] = {}

    def put(term: Expr, c: Number):
        slot = acc.get(term.key)
        if slot is None:
            acc[term.key] = [term, c]
        else:
            slot[1] = slot[1] + c

    for a in args:
        a = as_expr(a)
        if isinstance(a, Const):
            const = const + a.value
        elif isinstance(a, Add):
            const = const + a.const
            for t, c in a.terms:
                put(t, c)
        else:
            c, t = _split_coef(a)
            put(t, c)
    terms = [(t, as_number(c) if isinstance(c, float) else c) for t, c in acc.values() if not _is_zero(c)]
    if isinstance(const, float):
        const = as_number(const)
    if not terms:
        return Const(const)
    if len(terms) == 1 and _is_zero(const):
        t, c = terms[0]
        return mul(Const(c), t) if c != 1 else t
    terms.sort(key=lambda tc: tc[0].key)
    return Add(const, tuple(terms))


def mul(*args) -> Expr:
    coef: Number = Fraction(1)
    acc: Dict[tuple, list] = {}
    for a in args:
        a = as_expr(a)
        if isinstance(a, Const):
            coef = coef * a.value
        elif isinstance(a, Mul):
            coef = coef * a.coef
            for b, e in a.factors:
                slot = acc.get(b.key)
                if slot is None:
                    acc[b.key] = [b, e]
                else:
                    slot[1] += e
        else:
            slot = acc.get(a.key)
            if slot is None:
                acc[a.key] = [a, 1]
            else:
                slot[1] += 1
    if isinstance(coef, float):
        coef = as_number(coef)
    if _is_zero(coef):
        return ZERO
    factors = [(b, e) for b, e in acc.values() if e != 0]
    if not factors:
        return Const(coef)
    if len(factors) == 1:
        b, e = factors[0]
        if e == 1:
            if coef == 1:
                return b
            if isinstance(b, Add):
                # numeric coefficients distribute over sums
                return add(Const(coef * b.const), *(mul(Const(coef * c), t) for t, c in b.terms))
    factors.sort(key=lambda be: be[0].key)
    return Mul(coef, tuple(factors))


def power(b, n: int) -> Expr:
    b = as_expr(b)
    if n == 0:
        return ONE
    if n == 1:
        return b
    if isinstance(b, Const):
        v = b.value
        if v == 0 and n < 0:
            raise DivisionByZeroConstant("constant zero raised to a negative power")
        return Const(as_number(v**n))
    if isinstance(b, Mul):
        coef = b.coef
        if coef == 0 and n < 0:
            raise DivisionByZeroConstant("constant zero raised to a negative power")
        return mul(Const(as_number(coef**n)), Mul(Fraction(1), tuple((x, e * n) for x, e in b.factors)))
    return Mul(Fraction(1), ((b, n),))


def neg(a) -> Expr:
    return mul(MINUS_ONE, a)


def sub(a, b) -> Expr:
    return add(a, neg(b))


def div(a, b) -> Expr:
    b = as_expr(b)
    if isinstance(b, Const) and b.value == 0:
        raise DivisionByZeroConstant("division by the constant zero")
    return mul(a, power(b, -1))


def _perfect_square(q: Fraction):
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


_EXACT = {
    ("sin", 0): 0,
    ("cos", 0): 1,
    ("tan", 0): 0,
    ("exp", 0): 1,
    ("ln", 1): 0,
    ("atan", 0): 0,
    ("sinh", 0): 0,
    ("cosh", 0): 1,
}

_FLOAT_IMPL = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "sqrt": math.sqrt,
    "exp": math.exp,
    "ln": math.log,
    "atan": math.atan,
    "cosh": math.cosh,
    "sinh": math.sinh,
    "abs": abs,
}


def _negation_is_smaller(e: Expr) -> bool:
    """True when ``-e`` sorts before ``e``; picks one sign representative."""
    if isinstance(e, Mul):
        return e.coef < 0
    if isinstance(e, Add):
        return neg(e).key < e.key
    if isinstance(e, Const):
        return e.value < 0
    return False


def func(name: str, *args) -> Expr:
    if name not in FUNCTIONS:
        raise UnsupportedFunction(f"unknown function {name!r}")
    args = tuple(as_expr(a) for a in args)
    if len(args) != 1:
        raise UnsupportedFunction(f"{name} takes exactly one argument")
    (x,) = args
    if isinstance(x, Const):
        v = x.value
        if isinstance(v, Fraction):
            hit = _EXACT.get((name, v))
            if hit is not None:
                return Const(Fraction(hit))
            if name == "abs":
                return Const(abs(v))
            if name == "sqrt":
                r = _perfect_square(v)
                if r is not None:
                    return Const(r)
        else:
            try:
                return Const(as_number(_FLOAT_IMPL[name](v)))
            except (ValueError, OverflowError):
                pass
    if name in _ODD and _negation_is_smaller(x):
        return neg(Func(name, (neg(x),)))
    if name in _EVEN and _negation_is_smaller(x):
        return Func(name, (neg(x),))
    if name == "abs":
        if _negation_is_smaller(x):
            x = neg(x)
        if isinstance(x, Func) and x.name in ("abs", "sqrt", "exp", "cosh"):
            return x
        if isinstance(x, Mul) and x.coef > 0 and all(e % 2 == 0 for _, e in x.factors):
            return x
    return Func(name, (x,))


# convenience wrappers -------------------------------------------------------
def sin(x):
    return func("sin", x)


def cos(x):
    return func("cos", x)


def sqrt(x):
    return func("sqrt", x)


def symbols(names: str):
    out = tuple(Sym(n) for n in names.replace(",", " ").split())
    return out[0] if len(out) == 1 else out


def rebuild(e: Expr, leaf, memo=None) -> Expr:
    """Rebuild ``e`` bottom-up through the canonical constructors.

    ``leaf(sym)`` maps each Sym to its replacement expression.
    """
    if memo is None:
        memo = {}
    k = id(e)
    hit = memo.get(k)
    if hit is not None:
        return hit[1]
    if isinstance(e, Const):
        out = e
    elif isinstance(e, Sym):
        out = leaf(e)
    elif isinstance(e, Func):
        out = func(e.name, *(rebuild(a, leaf, memo) for a in e.args))
    elif isinstance(e, Mul):
        out = mul(Const(e.coef), *(power(rebuild(b, leaf, memo), x) for b, x in e.factors))
    elif isinstance(e, Add):
        out = add(Const(e.const), *(mul(Const(c), rebuild(t, leaf, memo)) for t, c in e.terms))
    else:  # pragma: no cover
        raise TypeError(type(e))
    memo[k] = (e, out)
    return out


def free_symbols(e: Expr) -> set:
    out = set()
    seen = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if id(x) in seen:
            continue
        seen.add(id(x))
        if isinstance(x, Sym):
            if x.name not in RESERVED_CONSTANTS:
                out.add(x.name)
        else:
            stack.extend(x.children())
    return out


def substitute(e: Expr, bindings: Dict[str, Expr]) -> Expr:
    """Simultaneous substitution of named symbols, result canonical."""
    bindings = {k: as_expr(v) for k, v in bindings.items()}
    return rebuild(e, lambda s: bindings.get(s.name, s))


def iter_nodes(e: Expr) -> Iterable[Expr]:
    stack = [e]
    while stack:
        x = stack.pop()
        yield x
        stack.extend(x.children())
