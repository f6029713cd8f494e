"""Rule-based simplification on top of the canonical constructors."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Tuple

from .expr import (
    Add,
    Const,
    Expr,
    Func,
    Mul,
    Sym,
    _perfect_square,
    add,
    func,
    mul,
    neg,
    power,
)


@dataclass(frozen=True)
class AssumptionSet:
    """Optional lower/upper bounds per variable name."""

    bounds: Tuple[Tuple[str, Optional[Fraction], Optional[Fraction]], ...] = ()

    def __post_init__(self):
        for name, lo, hi in self.bounds:
            if lo is not None and hi is not None and lo > hi:
                raise ValueError(f"assumption for {name!r}: lower bound exceeds upper bound")

    @classmethod
    def from_dict(cls, d: Dict[str, Tuple[Optional[float], Optional[float]]]) -> "AssumptionSet":
        items = []
        for name in sorted(d):
            lo, hi = d[name]
            items.append(
                (
                    name,
                    None if lo is None else Fraction(lo),
                    None if hi is None else Fraction(hi),
                )
            )
        return cls(tuple(items))

    def as_dict(self):
        return {n: (lo, hi) for n, lo, hi in self.bounds}

    def lower(self, name: str):
        for n, lo, _ in self.bounds:
            if n == name:
                return lo
        return None

    def upper(self, name: str):
        for n, _, hi in self.bounds:
            if n == name:
                return hi
        return None

    def rename(self, mapping: Dict[str, str]) -> "AssumptionSet":
        return AssumptionSet(tuple((mapping.get(n, n), lo, hi) for n, lo, hi in self.bounds))

    def merged(self, other: "AssumptionSet") -> "AssumptionSet":
        d = self.as_dict()
        d.update(other.as_dict())
        return AssumptionSet(tuple((n, lo, hi) for n, (lo, hi) in sorted(d.items())))


EMPTY = AssumptionSet()


def is_nonnegative(e: Expr, a: AssumptionSet = EMPTY) -> bool:
    """Conservative test: True only if ``e >= 0`` is certain."""
    if isinstance(e, Const):
        return e.value >= 0
    if isinstance(e, Sym):
        if e.name == "pi":
            return True
        lo = a.lower(e.name)
        return lo is not None and lo >= 0
    if isinstance(e, Func):
        if e.name in ("sqrt", "abs", "exp", "cosh"):
            return True
        if e.name in ("sinh", "atan", "ln"):
            # monotone, sign follows the argument (ln: argument >= 1)
            if e.name == "ln":
                return _at_least_one(e.args[0], a)
            return is_nonnegative(e.args[0], a)
        return False
    if isinstance(e, Mul):
        if e.coef < 0:
            return False
        return all(x % 2 == 0 or is_nonnegative(b, a) for b, x in e.factors)
    if isinstance(e, Add):
        return e.const >= 0 and all(c > 0 and is_nonnegative(t, a) for t, c in e.terms)
    return False


def _at_least_one(e: Expr, a: AssumptionSet) -> bool:
    if isinstance(e, Const):
        return e.value >= 1
    if isinstance(e, Sym):
        lo = a.lower(e.name)
        return lo is not None and lo >= 1
    return False


class SymbolicCache:
    """Memo table for :func:`simplify` with hit/miss accounting.

    Safe to share between threads (a lock guards insertion), although
    each generation worker normally owns its own instance.
    """

    def __init__(self):
        self._table: Dict[tuple, Expr] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key):
        hit = self._table.get(key)
        if hit is not None:
            self.hits += 1
        else:
            self.misses += 1
        return hit

    def put(self, key, value: Expr):
        with self._lock:
            self._table[key] = value

    @property
    def hit_rate(self) -> float:
        total = self.hits + self.misses
        return self.hits / total if total else 0.0

    def __len__(self):
        return len(self._table)


def simplify(e: Expr, assumptions: AssumptionSet = EMPTY, cache: Optional[SymbolicCache] = None) -> Expr:
    if assumptions is None:
        assumptions = EMPTY
    if isinstance(e, (Const, Sym)):
        return e
    key = (e, assumptions)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    out = _simplify(e, assumptions, {})
    if cache is not None:
        cache.put(key, out)
    return out


def _simplify(e: Expr, a: AssumptionSet, memo) -> Expr:
    k = id(e)
    if k in memo:
        return memo[k][1]
    if isinstance(e, (Const, Sym)):
        out = e
    elif isinstance(e, Func):
        out = _func_rules(func(e.name, *(_simplify(x, a, memo) for x in e.args)), a)
    elif isinstance(e, Mul):
        out = mul(Const(e.coef), *(power(_simplify(b, a, memo), x) for b, x in e.factors))
        if isinstance(out, Add):
            out = _pythagoras(out)
    elif isinstance(e, Add):
        out = add(Const(e.const), *(mul(Const(c), _simplify(t, a, memo)) for t, c in e.terms))
        if isinstance(out, Add):
            out = _pythagoras(out)
    else:  # pragma: no cover
        raise TypeError(type(e))
    memo[k] = (e, out)
    return out


def _func_rules(e: Expr, a: AssumptionSet) -> Expr:
    if not isinstance(e, Func):
        return e
    (x,) = e.args
    if e.name == "abs":
        if is_nonnegative(x, a):
            return x
        if is_nonnegative(neg(x), a):
            return neg(x)
    if e.name == "sqrt":
        if isinstance(x, Mul) and x.coef > 0 and all(n % 2 == 0 for _, n in x.factors):
            root = _perfect_square(x.coef) if isinstance(x.coef, Fraction) else None
            if root is not None and all(is_nonnegative(b, a) for b, _ in x.factors):
                return mul(Const(root), *(power(b, n // 2) for b, n in x.factors))
    return e


def _square_of(t: Expr, name: str):
    """Yield (argument, rest) for each ``name(arg)^k`` (k >= 2) factor of t."""
    if isinstance(t, Mul):
        for b, n in t.factors:
            if isinstance(b, Func) and b.name == name and n >= 2:
                yield b.args[0], mul(t, power(b, -2))


def _pythagoras(e: Add) -> Expr:
    """Replace ``c*r*sin(a)^2 + c*r*cos(a)^2`` by ``c*r``."""
    changed = True
    while changed and isinstance(e, Add):
        changed = False
        coefs = {t.key: c for t, c in e.terms}
        for t, c in e.terms:
            for arg, rest in _square_of(t, "sin"):
                partner = mul(rest, power(func("cos", arg), 2))
                pc = coefs.get(partner.key)
                if pc is not None and pc == c:
                    e = add(e, mul(Const(-c), t), mul(Const(-c), partner), mul(Const(c), rest))
                    changed = True
                    break
            if changed:
                break
    return e
