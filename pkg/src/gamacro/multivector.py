"""Sparse symbolic multivectors and the operations defined on them."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .blades import Frame, grade, reorder_sign
from .errors import DivisionByZeroConstant, FrameMismatch, NullVersor
from .symbolic import (
    EMPTY,
    ONE,
    ZERO,
    AssumptionSet,
    Const,
    Expr,
    SymbolicCache,
    add,
    as_expr,
    differentiate,
    div,
    func,
    mul,
    neg,
    simplify,
    to_text,
)


class SymMultivector:
    """Map from blade to non-zero coefficient expression over one frame."""

    __slots__ = ("frame", "coeffs")

    def __init__(self, frame: Frame, coeffs: Optional[Mapping[int, object]] = None):
        self.frame = frame
        clean = {}
        for b, c in (coeffs or {}).items():
            if not 0 <= b < frame.size:
                raise ValueError(f"blade {b} outside frame {frame.name!r}")
            c = as_expr(c)
            if not (isinstance(c, Const) and c.value == 0):
                clean[b] = c
        self.coeffs = dict(sorted(clean.items()))

    # construction ------------------------------------------------------
    @classmethod
    def zero(cls, frame: Frame) -> "SymMultivector":
        return cls(frame)

    @classmethod
    def scalar(cls, frame: Frame, value) -> "SymMultivector":
        return cls(frame, {0: value})

    @classmethod
    def from_names(cls, frame: Frame, items: Mapping[str, object]) -> "SymMultivector":
        return cls(frame, {frame.parse_blade(k): v for k, v in items.items()})

    # access ------------------------------------------------------------
    def __getitem__(self, blade: int) -> Expr:
        return self.coeffs.get(blade, ZERO)

    def __iter__(self):
        return iter(self.coeffs.items())

    def __len__(self):
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def grades(self) -> List[int]:
        return sorted({grade(b) for b in self.coeffs})

    def __eq__(self, other):
        if not isinstance(other, SymMultivector):
            return NotImplemented
        return _same_frame(self.frame, other.frame) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.frame.name, tuple(self.coeffs.items())))

    def __repr__(self):
        return f"SymMultivector({self.frame.name}, {self.to_text()})"

    def to_text(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for b, c in self.coeffs.items():
            name = self.frame.blade_name(b)
            parts.append(f"({to_text(c)})" + ("" if b == 0 else f"*{name}"))
        return " + ".join(parts)

    def map(self, fn: Callable[[int, Expr], object]) -> "SymMultivector":
        return SymMultivector(self.frame, {b: fn(b, c) for b, c in self.coeffs.items()})

    # arithmetic ----------------------------------------------------------
    def __add__(self, other):
        return add_mv(self, other)

    def __sub__(self, other):
        return sub_mv(self, other)

    def __neg__(self):
        return negate(self)

    def __mul__(self, other):
        if isinstance(other, SymMultivector):
            return product("gp", self, other)
        return scale(self, other)

    __rmul__ = lambda self, s: scale(self, s)  # noqa: E731

    def __xor__(self, other):
        return product("op", self, other)

    def __invert__(self):
        return reverse(self)


def _same_frame(a: Frame, b: Frame) -> bool:
    return a is b or (a.name == b.name and a.basis_names == b.basis_names and a.ipm == b.ipm)


def _check(a: SymMultivector, b: SymMultivector):
    if not _same_frame(a.frame, b.frame):
        raise FrameMismatch(f"operands live in frames {a.frame.name!r} and {b.frame.name!r}")


def product(
    kind: str,
    a: SymMultivector,
    b: SymMultivector,
    cache: Optional[SymbolicCache] = None,
    assumptions: AssumptionSet = EMPTY,
) -> SymMultivector:
    """Bilinear product of ``kind`` computed through the frame's table."""
    _check(a, b)
    table = a.frame.tables[kind]
    acc: Dict[int, List[Expr]] = {}
    for x, cx in a.coeffs.items():
        for y, cy in b.coeffs.items():
            for c, v in table[(x, y)]:
                acc.setdefault(c, []).append(mul(Const(v), cx, cy))
    return SymMultivector(a.frame, {c: simplify(add(*ts), assumptions, cache) for c, ts in acc.items()})


def add_mv(a: SymMultivector, b: SymMultivector) -> SymMultivector:
    _check(a, b)
    keys = set(a.coeffs) | set(b.coeffs)
    return SymMultivector(a.frame, {k: add(a[k], b[k]) for k in keys})


def sub_mv(a: SymMultivector, b: SymMultivector) -> SymMultivector:
    _check(a, b)
    keys = set(a.coeffs) | set(b.coeffs)
    return SymMultivector(a.frame, {k: add(a[k], neg(b[k])) for k in keys})


def negate(a: SymMultivector) -> SymMultivector:
    return a.map(lambda _, c: neg(c))


def scale(a: SymMultivector, s) -> SymMultivector:
    s = as_expr(s)
    return a.map(lambda _, c: mul(s, c))


def div_by_scalar(a: SymMultivector, s) -> SymMultivector:
    s = as_expr(s)
    if isinstance(s, Const) and s.value == 0:
        raise DivisionByZeroConstant("multivector divided by the constant zero")
    return a.map(lambda _, c: div(c, s))


def _grade_sign(a: SymMultivector, sign_of_grade: Callable[[int], int]) -> SymMultivector:
    return a.map(lambda b, c: c if sign_of_grade(grade(b)) > 0 else neg(c))


def reverse(a: SymMultivector) -> SymMultivector:
    return _grade_sign(a, lambda k: -1 if k % 4 in (2, 3) else 1)


def grade_involution(a: SymMultivector) -> SymMultivector:
    return _grade_sign(a, lambda k: -1 if k % 2 else 1)


def clifford_conjugate(a: SymMultivector) -> SymMultivector:
    return _grade_sign(a, lambda k: -1 if k % 4 in (1, 2) else 1)


def grade_part(a: SymMultivector, k: int) -> SymMultivector:
    return SymMultivector(a.frame, {b: c for b, c in a.coeffs.items() if grade(b) == k})


def cast_to_grades(a: SymMultivector, grades: Iterable[int]) -> SymMultivector:
    gs = set(grades)
    return SymMultivector(a.frame, {b: c for b, c in a.coeffs.items() if grade(b) in gs})


def cast_to_subspace(a: SymMultivector, blades: Iterable[int]) -> SymMultivector:
    keep = set(blades)
    return SymMultivector(a.frame, {b: c for b, c in a.coeffs.items() if b in keep})


def scalar_part(a: SymMultivector) -> Expr:
    return a[0]


def quasi_norm2(a: SymMultivector, cache=None, assumptions: AssumptionSet = EMPTY) -> Expr:
    return product("sp", a, reverse(a), cache, assumptions)[0]


def norm2(a: SymMultivector, cache=None, assumptions: AssumptionSet = EMPTY) -> Expr:
    parts = []
    for k in a.grades():
        parts.append(func("abs", quasi_norm2(grade_part(a, k), cache, assumptions)))
    return simplify(add(*parts), assumptions, cache)


def norm(a: SymMultivector, cache=None, assumptions: AssumptionSet = EMPTY) -> Expr:
    return simplify(func("sqrt", norm2(a, cache, assumptions)), assumptions, cache)


def quasi_norm(a: SymMultivector, cache=None, assumptions: AssumptionSet = EMPTY) -> Expr:
    q = quasi_norm2(a, cache, assumptions)
    return simplify(func("sqrt", func("abs", q)), assumptions, cache)


def versor_inverse(v: SymMultivector, cache=None, assumptions: AssumptionSet = EMPTY) -> SymMultivector:
    q = quasi_norm2(v, cache, assumptions)
    if isinstance(q, Const) and q.value == 0:
        raise NullVersor("versor has zero quasi-norm and no inverse")
    return div_by_scalar(reverse(v), q)


def dual(a: SymMultivector, b: SymMultivector, cache=None, assumptions=EMPTY) -> SymMultivector:
    return product("lcp", a, versor_inverse(b, cache, assumptions), cache, assumptions)


def undual(a: SymMultivector, b: SymMultivector, cache=None, assumptions=EMPTY) -> SymMultivector:
    return product("lcp", a, b, cache, assumptions)


def project(a: SymMultivector, b: SymMultivector, cache=None, assumptions=EMPTY) -> SymMultivector:
    """Projection of blade ``a`` onto the non-null blade ``b``: undual of the dual."""
    return undual(dual(a, b, cache, assumptions), b, cache, assumptions)


def differentiate_mv(a: SymMultivector, var: str, chain=None) -> SymMultivector:
    memo: dict = {}
    return a.map(lambda _, c: differentiate(c, var, chain, memo))


def simplify_mv(a: SymMultivector, assumptions=EMPTY, cache=None) -> SymMultivector:
    return a.map(lambda _, c: simplify(c, assumptions, cache))


class Outermorphism:
    """Linear map on vectors extended to blades by preserving the outer product.

    ``matrix[i][j]`` is the component on destination basis vector ``i`` of
    the image of source basis vector ``j``.
    """

    def __init__(self, source: Frame, dest: Frame, matrix: Sequence[Sequence]):
        if source.dim != dest.dim:
            raise ValueError("outermorphisms need frames of equal dimension")
        n = source.dim
        if len(matrix) != n or any(len(r) != n for r in matrix):
            raise ValueError("transform matrix has the wrong shape")
        self.source = source
        self.dest = dest
        self.matrix = tuple(tuple(_exact(v) for v in row) for row in matrix)
        self._images: Dict[int, Dict[int, object]] = {0: {0: Fraction(1)}}

    def vector_image(self, j: int) -> Dict[int, object]:
        return {1 << i: self.matrix[i][j] for i in range(self.source.dim) if self.matrix[i][j] != 0}

    def blade_image(self, b: int) -> Dict[int, object]:
        hit = self._images.get(b)
        if hit is not None:
            return hit
        top = b.bit_length() - 1
        rest = self.blade_image(b & ~(1 << top))
        vec = self.vector_image(top)
        out: Dict[int, object] = {}
        for c, x in rest.items():
            for v, y in vec.items():
                if c & v:
                    continue
                k = c | v
                out[k] = out.get(k, 0) + reorder_sign(c, v) * x * y
        out = {k: v for k, v in out.items() if v != 0}
        self._images[b] = out
        return out

    def apply(self, a: SymMultivector) -> SymMultivector:
        if not _same_frame(a.frame, self.source):
            raise FrameMismatch(
                f"transform expects frame {self.source.name!r}, got {a.frame.name!r}"
            )
        acc: Dict[int, List[Expr]] = {}
        for b, c in a.coeffs.items():
            for k, v in self.blade_image(b).items():
                acc.setdefault(k, []).append(mul(Const(v), c))
        return SymMultivector(self.dest, {k: add(*ts) for k, ts in acc.items()})

    __call__ = apply


def _exact(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        q = Fraction(v).limit_denominator(1 << 20)
        return q if abs(float(q) - v) <= 1e-12 else v
    raise TypeError(f"matrix entries must be numbers, got {v!r}")


def apply_outermorphism(L: Outermorphism, a: SymMultivector) -> SymMultivector:
    return L.apply(a)
