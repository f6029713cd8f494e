"""Independent numeric geometric-algebra engine used as ground truth.

Multivectors are dense coefficient arrays over the declared blade basis
(wedge products of the declared basis vectors, ascending order).  Products
are computed straight from the bilinear form by expanding one vector at a
time; nothing here reuses the symbolic product tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from .errors import FrameMismatch, NullVersor
from .symbolic import Expr, Sym, eval_numeric, free_symbols

MAX_ORACLE_DIM = 8
NULL_TOL = 1e-14
STEP = 1e-20  # complex-step size
KINDS = ("gp", "op", "sp", "lcp", "rcp", "fdp", "hip", "cp", "acp")


def _bits(x: int) -> int:
    return bin(x).count("1")


class _Algebra:
    """Dense product tensors for one bilinear form."""

    def __init__(self, ipm):
        g = np.array([[float(v) for v in row] for row in ipm])
        self.g = g
        self.n = len(g)
        if self.n > MAX_ORACLE_DIM:
            raise ValueError(f"oracle supports at most {MAX_ORACLE_DIM} dimensions")
        self.size = 1 << self.n
        self.grades = np.array([_bits(b) for b in range(self.size)])
        self._memo: Dict[Tuple[int, int], Dict[int, float]] = {}
        self.tensors: Dict[str, np.ndarray] = {}
        gp = np.zeros((self.size, self.size, self.size))
        for a in range(self.size):
            for b in range(self.size):
                for c, v in self._blade_times_blade(a, b).items():
                    gp[a, b, c] = v
        self.tensors["gp"] = gp

    # expansion --------------------------------------------------------
    def _vector_times(self, i: int, x: Dict[int, float]) -> Dict[int, float]:
        out: Dict[int, float] = {}
        for blade, coef in x.items():
            # contraction part: alternate signs over the factors of the blade
            k = 0
            for j in range(self.n):
                if blade >> j & 1:
                    w = self.g[i, j]
                    if w != 0:
                        r = blade & ~(1 << j)
                        out[r] = out.get(r, 0.0) + (-1) ** k * w * coef
                    k += 1
            if not blade >> i & 1:
                below = _bits(blade & ((1 << i) - 1))
                r = blade | (1 << i)
                out[r] = out.get(r, 0.0) + (-1) ** below * coef
        return out

    def _contract_vector(self, i: int, blade: int) -> Dict[int, float]:
        out: Dict[int, float] = {}
        k = 0
        for j in range(self.n):
            if blade >> j & 1:
                w = self.g[i, j]
                if w != 0:
                    r = blade & ~(1 << j)
                    out[r] = out.get(r, 0.0) + (-1) ** k * w
                k += 1
        return out

    def _blade_times_blade(self, a: int, b: int) -> Dict[int, float]:
        key = (a, b)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if a == 0:
            out = {b: 1.0}
        else:
            i = (a & -a).bit_length() - 1
            rest = a & ~(1 << i)
            # e_i ^ R = e_i R - e_i . R
            out = self._vector_times(i, self._blade_times_blade(rest, b))
            for r, w in self._contract_vector(i, rest).items():
                for c, v in self._blade_times_blade(r, b).items():
                    out[c] = out.get(c, 0.0) - w * v
        out = {c: v for c, v in out.items() if v != 0}
        self._memo[key] = out
        return out

    # product kinds -----------------------------------------------------
    def tensor(self, kind: str) -> np.ndarray:
        t = self.tensors.get(kind)
        if t is not None:
            return t
        gp = self.tensors["gp"]
        ga = self.grades[:, None, None]
        gb = self.grades[None, :, None]
        gc = self.grades[None, None, :]
        if kind == "op":
            mask = gc == ga + gb
        elif kind == "lcp":
            mask = gc == gb - ga
        elif kind == "rcp":
            mask = gc == ga - gb
        elif kind == "sp":
            mask = gc == 0
        elif kind == "fdp":
            mask = gc == np.abs(ga - gb)
        elif kind == "hip":
            mask = (gc == np.abs(ga - gb)) & (ga > 0) & (gb > 0)
        elif kind == "cp":
            t = 0.5 * (gp - gp.transpose(1, 0, 2))
        elif kind == "acp":
            t = 0.5 * (gp + gp.transpose(1, 0, 2))
        else:
            raise ValueError(f"unknown product {kind!r}")
        if t is None:
            t = gp * mask
        self.tensors[kind] = t
        return t


@lru_cache(maxsize=None)
def _algebra(ipm) -> _Algebra:
    return _Algebra(ipm)


def algebra_for(frame) -> _Algebra:
    return _algebra(tuple(tuple(float(v) for v in row) for row in frame.ipm))


@dataclass
class NumMultivector:
    """Dense coefficients; shape ``(2**n,)`` or ``(2**n, batch)``."""

    frame: object
    data: np.ndarray

    @classmethod
    def zeros(cls, frame, batch: Optional[int] = None, dtype=float):
        shape = (1 << frame.dim,) if batch is None else (1 << frame.dim, batch)
        return cls(frame, np.zeros(shape, dtype=dtype))

    @classmethod
    def from_coeffs(cls, frame, coeffs: Mapping[int, object], batch: Optional[int] = None):
        dtype = complex if any(np.iscomplexobj(v) for v in coeffs.values()) else float
        mv = cls.zeros(frame, batch, dtype)
        for b, v in coeffs.items():
            mv.data[b] = v
        return mv

    def __getitem__(self, blade: int):
        return self.data[blade]

    def __add__(self, other):
        _check(self, other)
        x, y = _aligned(self.data, other.data)
        return NumMultivector(self.frame, x + y)

    def __sub__(self, other):
        _check(self, other)
        x, y = _aligned(self.data, other.data)
        return NumMultivector(self.frame, x - y)

    def __neg__(self):
        return NumMultivector(self.frame, -self.data)

    def __mul__(self, other):
        return num_product("gp", self, other)


def _aligned(x: np.ndarray, y: np.ndarray):
    """Let an unbatched operand broadcast against a batched one."""
    if x.ndim < y.ndim:
        x = x[:, None]
    elif y.ndim < x.ndim:
        y = y[:, None]
    return x, y


def _times(data: np.ndarray, s):
    if data.ndim == 1 and np.ndim(s) == 1:
        data = data[:, None]
    return data * s


def _check(a: NumMultivector, b: NumMultivector):
    if a.frame is not b.frame and a.frame.ipm != b.frame.ipm:
        raise FrameMismatch(f"frames {a.frame.name!r} and {b.frame.name!r} differ")


def num_product(kind: str, a: NumMultivector, b: NumMultivector) -> NumMultivector:
    _check(a, b)
    t = algebra_for(a.frame).tensor(kind)
    return NumMultivector(a.frame, np.einsum("abc,a...,b...->c...", t, a.data, b.data))


def _grade_signs(frame, fn) -> np.ndarray:
    return np.array([fn(_bits(b)) for b in range(1 << frame.dim)], dtype=float)


def _scaled(a: NumMultivector, signs: np.ndarray) -> NumMultivector:
    s = signs.reshape((-1,) + (1,) * (a.data.ndim - 1))
    return NumMultivector(a.frame, a.data * s)


def num_reverse(a):
    return _scaled(a, _grade_signs(a.frame, lambda k: (-1) ** (k * (k - 1) // 2)))


def num_grade_involution(a):
    return _scaled(a, _grade_signs(a.frame, lambda k: (-1) ** k))


def num_clifford_conjugate(a):
    return _scaled(a, _grade_signs(a.frame, lambda k: (-1) ** (k * (k + 1) // 2)))


def num_grade_part(a, k: int):
    return _scaled(a, _grade_signs(a.frame, lambda g: float(g == k)))


def _abs(x):
    if np.iscomplexobj(x):
        return np.where(np.real(x) < 0, -x, x)
    return np.abs(x)


def num_quasi_norm2(a):
    return num_product("gp", a, num_reverse(a)).data[0]


def num_norm2(a):
    total = 0.0
    for k in range(a.frame.dim + 1):
        ak = num_grade_part(a, k)
        total = total + _abs(num_product("gp", ak, num_reverse(ak)).data[0])
    return total


def num_versor_inverse(v):
    q = num_quasi_norm2(v)
    if np.any(np.abs(q) < NULL_TOL):
        raise NullVersor("versor has a vanishing quasi-norm")
    return NumMultivector(v.frame, num_reverse(v).data / q)


def blade_image_matrix(L) -> np.ndarray:
    """Dense matrix of an outermorphism acting on all blades."""
    src, dst = L.source, L.dest
    n = src.dim
    size = 1 << n
    m = np.zeros((1 << dst.dim, size))
    vec = []
    for j in range(n):
        v = NumMultivector.zeros(dst)
        for i in range(dst.dim):
            v.data[1 << i] = float(L.matrix[i][j])
        vec.append(v)
    for b in range(size):
        img = NumMultivector.zeros(dst)
        img.data[0] = 1.0
        for j in range(n):
            if b >> j & 1:
                img = num_product("op", img, vec[j])
        m[:, b] = img.data
    return m


def _eval(e: Expr, env: Dict[str, object]):
    return eval_numeric(e, env)


def _mask(frame, blades) -> np.ndarray:
    m = np.zeros(1 << frame.dim)
    for b in blades:
        m[b] = 1.0
    return m


def cast_to_class(a: NumMultivector, cls, env=None) -> NumMultivector:
    out = _scaled(a, _mask(a.frame, cls.blades))
    for b, e in cls.constants:
        out.data[b] = _eval(e, env or {})
    return out


class _Runner:
    def __init__(self, ir, perturb: Optional[Tuple[str, int]] = None):
        self.ir = ir
        self.perturb = perturb
        self.regs: Dict[str, NumMultivector] = {}

    def env(self, e: Expr) -> Dict[str, object]:
        out = {}
        for n in free_symbols(e):
            if n.startswith("@"):
                reg, _, b = n[1:].rpartition(":")
                out[n] = self.regs[reg].data[int(b)]
        return out

    def value(self, e: Expr):
        return _eval(e, self.env(e))

    def set(self, reg: str, mv: NumMultivector):
        if self.perturb is not None and self.perturb[0] == reg:
            data = mv.data.astype(complex)
            data[self.perturb[1]] = data[self.perturb[1]] + 1j * STEP
            mv = NumMultivector(mv.frame, data)
        self.regs[reg] = mv

    def run(self, inputs: Mapping[str, NumMultivector], stop: Optional[int] = None, only=None):
        for name, cls in self.ir.inputs:
            mv = inputs[name]
            if mv.frame is not cls.frame and mv.frame.ipm != cls.frame.ipm:
                raise FrameMismatch(f"input {name!r} is in the wrong frame")
            self.set(name, cast_to_class(mv, cls))
        ops = self.ir.ops if stop is None else self.ir.ops[:stop]
        for k, op in enumerate(ops):
            if only is None or k in only:
                self.step(op, k, inputs)
        return self

    def step(self, op, index, inputs):
        k, a = op.kind, op.args
        if k in ("join", "output"):
            return
        if k == "const":
            c = a[0]
            val = NumMultivector.from_coeffs(c.frame, {b: _eval(e, {}) for b, e in c.coeffs.items()})
        elif k == "ctor":
            frame, items = a
            vals = {b: self.value(t) for b, t in items}
            batch = self._batch()
            val = NumMultivector.zeros(frame, batch, complex if self._complex() else float)
            for b, v in vals.items():
                val.data[b] = v
        elif k == "binary":
            x, y = self.regs[a[1]], self.regs[a[2]]
            if a[0] == "+":
                val = x + y
            elif a[0] == "-":
                val = x - y
            else:
                val = num_product(a[0], x, y)
        elif k == "transform":
            L, src = a
            x = self.regs[src]
            val = NumMultivector(L.dest, np.einsum("cb,b...->c...", blade_image_matrix(L), x.data))
        elif k == "copy":
            val = self.regs[a[0]]
        elif k == "neg":
            val = -self.regs[a[0]]
        elif k == "cast":
            val = cast_to_class(self.regs[a[1]], a[0])
        elif k == "unary":
            val = self.unary(a, index, inputs)
        else:  # pragma: no cover
            raise ValueError(k)
        self.set(op.dst, val)

    def _batch(self):
        for r in self.regs.values():
            if r.data.ndim > 1:
                return r.data.shape[1]
        return None

    def _complex(self):
        return any(np.iscomplexobj(r.data) for r in self.regs.values())

    def unary(self, a, index, inputs):
        name, src, extra = a
        x = self.regs[src]

        def scalar(v):
            mv = NumMultivector.zeros(x.frame, self._batch(), complex if np.iscomplexobj(v) else float)
            mv.data[0] = v
            return mv

        if name == "reverse":
            return num_reverse(x)
        if name == "grade_inv":
            return num_grade_involution(x)
        if name == "cliff_conj":
            return num_clifford_conjugate(x)
        if name == "scale":
            return NumMultivector(x.frame, _times(x.data, self.value(extra)))
        if name == "div_by_scalar":
            s = self.value(extra)
            if np.any(np.abs(s) < NULL_TOL):
                raise NullVersor("division by a vanishing scalar")
            return NumMultivector(x.frame, _times(x.data, 1 / s))
        if name == "quasi_norm2":
            return scalar(num_quasi_norm2(x))
        if name == "quasi_norm":
            return scalar(np.sqrt(_abs(num_quasi_norm2(x))))
        if name == "norm2":
            return scalar(num_norm2(x))
        if name == "norm":
            return scalar(np.sqrt(num_norm2(x)))
        if name == "cast_to_grades":
            return _scaled(x, _grade_signs(x.frame, lambda g: float(g in extra)))
        if name == "cast_to_subspace":
            return _scaled(x, _mask(x.frame, extra))
        if name == "cast_to_class":
            return cast_to_class(x, extra)
        if name == "diff":
            return self.derivative(src, extra, index, inputs)
        raise ValueError(name)

    def derivative(self, src: str, var: Expr, index: int, inputs) -> NumMultivector:
        assert isinstance(var, Sym)
        reg, _, b = var.name[1:].rpartition(":")
        if self.perturb is not None:
            raise ValueError("nested derivatives are not supported by the oracle")
        only = _slice(self.ir.ops[:index], src)
        sub = _Runner(self.ir, (reg, int(b))).run(inputs, stop=index, only=only)
        d = np.imag(sub.regs[src].data) / STEP
        return NumMultivector(self.regs[src].frame, d)


def _reads(op) -> set:
    k, a = op.kind, op.args
    regs = set()

    def refs(e):
        if isinstance(e, Expr):
            for n in free_symbols(e):
                if n.startswith("@"):
                    regs.add(n[1:].rpartition(":")[0])

    if k == "ctor":
        for _, t in a[1]:
            refs(t)
    elif k == "binary":
        regs.update(a[1:3])
    elif k in ("transform", "cast"):
        regs.add(a[1])
    elif k in ("copy", "neg"):
        regs.add(a[0])
    elif k == "unary":
        regs.add(a[1])
        refs(a[2])
    return regs


def _slice(ops, target: str) -> set:
    """Indices of the ops that ``target`` depends on."""
    need, keep = {target}, set()
    for k in range(len(ops) - 1, -1, -1):
        if ops[k].dst in need:
            keep.add(k)
            need |= _reads(ops[k])
    return keep


def run_macro(ir, inputs: Mapping[str, NumMultivector]) -> Dict[str, NumMultivector]:
    """Execute a compiled macro numerically; outputs are cast to their classes."""
    r = _Runner(ir).run(inputs)
    return {name: cast_to_class(r.regs[reg], cls) for name, cls, reg in ir.outputs}


def run_named(ir, inputs: Mapping[str, object]) -> Dict[str, Dict[str, object]]:
    """``run_macro`` with blade names: each input is a number (scalar part)
    or a ``{blade_name: value}`` mapping; values may be numpy arrays."""
    mvs = {}
    batch = None
    for v in inputs.values():
        for x in (v.values() if isinstance(v, Mapping) else [v]):
            if np.ndim(x):
                batch = len(x)
    for name, cls in ir.inputs:
        v = inputs[name]
        coeffs = v if isinstance(v, Mapping) else {"1": v}
        mvs[name] = NumMultivector.from_coeffs(
            cls.frame, {cls.frame.parse_blade(b): x for b, x in coeffs.items()}, batch
        )
    out = {}
    for name, mv in run_macro(ir, mvs).items():
        f = mv.frame
        out[name] = {f.blade_name(b): mv.data[b] for b in range(1 << f.dim)}
    return out
