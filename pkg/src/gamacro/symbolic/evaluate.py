"""Numeric evaluation of expression trees.

Scalar environments use :mod:`math` and raise :class:`DomainError` outside
a function's real domain.  When any bound value is a numpy array or a
complex number the numpy backend is used instead; it broadcasts over
arrays and supports complex arguments (used for complex-step derivatives).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Optional, Set

import numpy as np

from ..errors import DomainError, UnboundVariable
from .expr import RESERVED_CONSTANTS, Add, Const, Expr, Func, Mul, Sym


def _sdiv(a, b, flags):
    try:
        return a / b
    except ZeroDivisionError:
        if flags is not None:
            flags.add("division_by_zero")
        if a == 0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)


def _spow(b, n, flags):
    if n >= 0:
        return b**n
    return _sdiv(1.0, b ** (-n), flags)


def _sfunc(name, x):
    try:
        if name == "sqrt":
            if x < 0:
                raise DomainError(f"sqrt of negative value {x!r}")
            return math.sqrt(x)
        if name == "ln":
            if x <= 0:
                raise DomainError(f"ln of non-positive value {x!r}")
            return math.log(x)
        if name == "abs":
            return abs(x)
        return getattr(math, name)(x)
    except OverflowError:
        return math.inf


def _vabs(x):
    if np.iscomplexobj(x):
        # analytic continuation that keeps complex-step derivatives valid
        return np.where(np.real(x) < 0, -x, x)
    return np.abs(x)


_VFUNC = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sqrt": np.sqrt,
    "exp": np.exp,
    "ln": np.log,
    "atan": np.arctan,
    "cosh": np.cosh,
    "sinh": np.sinh,
    "abs": _vabs,
}


def _is_vector(v) -> bool:
    return isinstance(v, (np.ndarray, complex, np.complexfloating))


def eval_numeric(e: Expr, env: Dict[str, object], flags: Optional[Set[str]] = None):
    """Evaluate ``e`` with variables taken from ``env``.

    ``flags`` (if given) collects non-fatal events such as
    ``"division_by_zero"``.
    """
    vector = any(_is_vector(v) for v in env.values())
    memo: Dict[int, object] = {}
    if vector:
        with np.errstate(all="ignore"):
            return _veval(e, env, memo)
    return _seval(e, env, memo, flags)


def _lookup(name, env):
    try:
        return env[name]
    except KeyError:
        if name in RESERVED_CONSTANTS:
            return RESERVED_CONSTANTS[name]
        raise UnboundVariable(f"variable {name!r} has no value") from None


def _seval(e, env, memo, flags):
    k = id(e)
    if k in memo:
        return memo[k]
    if isinstance(e, Const):
        out = float(e.value)
    elif isinstance(e, Sym):
        out = float(_lookup(e.name, env))
    elif isinstance(e, Func):
        out = _sfunc(e.name, _seval(e.args[0], env, memo, flags))
    elif isinstance(e, Mul):
        out = float(e.coef)
        for b, x in e.factors:
            out = out * _spow(_seval(b, env, memo, flags), x, flags)
    elif isinstance(e, Add):
        out = None
        for t, c in e.terms:
            v = float(c) * _seval(t, env, memo, flags)
            out = v if out is None else out + v
        if e.const != 0:
            out = out + float(e.const)
    else:  # pragma: no cover
        raise TypeError(type(e))
    memo[k] = out
    return out


def _veval(e, env, memo):
    k = id(e)
    if k in memo:
        return memo[k]
    if isinstance(e, Const):
        out = float(e.value)
    elif isinstance(e, Sym):
        out = _lookup(e.name, env)
    elif isinstance(e, Func):
        out = _VFUNC[e.name](_veval(e.args[0], env, memo))
    elif isinstance(e, Mul):
        out = float(e.coef)
        for b, x in e.factors:
            v = _veval(b, env, memo)
            if not isinstance(v, np.ndarray):
                v = np.asarray(v, dtype=complex if isinstance(v, complex) else float)
            out = out * (v**x if x > 0 else 1.0 / v ** (-x))
    elif isinstance(e, Add):
        out = None
        for t, c in e.terms:
            v = float(c) * _veval(t, env, memo)
            out = v if out is None else out + v
        if e.const != 0:
            out = out + float(e.const)
    else:  # pragma: no cover
        raise TypeError(type(e))
    memo[k] = out
    return out


def to_float(v) -> float:
    if isinstance(v, Fraction):
        return float(v)
    return float(v)
