"""Resolve a parsed project into frames, tables, classes and macro IR."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Tuple


from .blades import Frame, grade, matrix_inverse, orthogonalize
from .dsl import ast as A
from .errors import (
    ClassMismatch,
    CyclicMacroCall,
    DiagnosticsError,
    FrameMismatch,
    GAMacroError,
    SingularTransform,
    Span,
    TransformDomainMismatch,
    UnassignedOutput,
    UnboundCalleeInput,
    UnknownBlade,
    UnknownClass,
    UnknownFrame,
    UnknownName,
    UnknownSubspace,
    UnknownTransform,
)
from .multivector import Outermorphism, SymMultivector
from .symbolic import Const, Expr, Sym, eval_numeric, free_symbols, parse_expr, substitute

BUILTIN_CLASSES = {
    "Multivector": "all",
    "Scalar": "scalars",
    "Vector": "vectors",
    "Bivector": "bivectors",
    "Trivector": "trivectors",
    "Even": "even",
    "Odd": "odd",
}


@dataclass(frozen=True)
class MVClass:
    frame: Frame
    name: str
    blades: FrozenSet[int]
    constants: Tuple[Tuple[int, Expr], ...] = ()

    @property
    def qualified(self) -> str:
        return f"{self.frame.name}.{self.name}"

    @property
    def constant_map(self) -> Dict[int, Expr]:
        return dict(self.constants)

    @property
    def free_blades(self) -> List[int]:
        pinned = {b for b, _ in self.constants}
        return sorted(b for b in self.blades if b not in pinned)


@dataclass(frozen=True)
class ClassBinding:
    name: str
    frame: Frame
    binds: Tuple[Tuple[int, str], ...]
    mins: Tuple[Tuple[str, str], ...] = ()
    maxs: Tuple[Tuple[str, str], ...] = ()


@dataclass
class Op:
    """One IR instruction.

    kinds and ``args``:
      const      (SymMultivector,)
      ctor       (frame, ((blade, template), ...))
      binary     (operator, lhs, rhs)
      transform  (Outermorphism, src)
      unary      (operator, src, extra)
      copy/neg   (src,)
      cast       (MVClass, src)             -- implicit casts at call sites
      output     (text, ((placeholder, reg, blade), ...))
      join       (on,)
    Templates are scalar expressions whose symbols named ``@reg:blade``
    stand for coefficients of earlier registers.
    """

    kind: str
    dst: Optional[str]
    args: tuple
    span: Optional[Span] = None


@dataclass
class MacroIR:
    name: str
    inputs: List[Tuple[str, MVClass]]
    outputs: List[Tuple[str, MVClass, str]]
    ops: List[Op]
    frames: Dict[str, Frame] = field(default_factory=dict)
    span: Optional[Span] = None

    def input_class(self, name: str) -> MVClass:
        for n, c in self.inputs:
            if n == name:
                return c
        raise KeyError(name)

    def output_class(self, name: str) -> MVClass:
        for n, c, _ in self.outputs:
            if n == name:
                return c
        raise KeyError(name)


def ref_symbol(reg: str, blade: int) -> Sym:
    return Sym(f"@{reg}:{blade}")


def parse_ref(name: str) -> Optional[Tuple[str, int]]:
    if not name.startswith("@"):
        return None
    reg, _, b = name[1:].rpartition(":")
    return reg, int(b)


@dataclass
class CompiledProject:
    frames: Dict[str, Frame] = field(default_factory=dict)
    frame_bcm: Dict[str, Tuple[str, tuple]] = field(default_factory=dict)
    transforms: Dict[str, Outermorphism] = field(default_factory=dict)
    subspaces: Dict[Tuple[str, str], FrozenSet[int]] = field(default_factory=dict)
    classes: Dict[Tuple[str, str], MVClass] = field(default_factory=dict)
    constants: Dict[Tuple[str, str], SymMultivector] = field(default_factory=dict)
    bindings: Dict[str, ClassBinding] = field(default_factory=dict)
    macros: Dict[str, MacroIR] = field(default_factory=dict)
    ast: Optional[A.ProjectAst] = None

    # lookups -----------------------------------------------------------
    def frame(self, name: str, span=None) -> Frame:
        try:
            return self.frames[name]
        except KeyError:
            raise UnknownFrame(f"unknown frame {name!r}", span) from None

    def subspace(self, frame: Frame, name: str, span=None) -> FrozenSet[int]:
        if "." in name:
            fname, _, name = name.partition(".")
            if fname != frame.name:
                raise UnknownSubspace(f"subspace {fname}.{name} is not in frame {frame.name!r}", span)
        hit = self.subspaces.get((frame.name, name))
        if hit is not None:
            return hit
        b = builtin_subspace(frame, name)
        if b is None:
            raise UnknownSubspace(f"unknown subspace {name!r} of frame {frame.name!r}", span)
        return b

    def mv_class(self, qualified: str, span=None) -> MVClass:
        fname, _, cname = qualified.partition(".")
        if not cname:
            raise UnknownClass(f"class {qualified!r} must be written <frame>.<class>", span)
        frame = self.frame(fname, span)
        hit = self.classes.get((fname, cname))
        if hit is not None:
            return hit
        if cname in BUILTIN_CLASSES:
            return MVClass(frame, cname, builtin_subspace(frame, BUILTIN_CLASSES[cname]))
        raise UnknownClass(f"unknown multivector class {qualified!r}", span)

    def constant(self, qualified: str) -> Optional[SymMultivector]:
        fname, _, cname = qualified.partition(".")
        return self.constants.get((fname, cname))


def builtin_subspace(frame: Frame, name: str) -> Optional[FrozenSet[int]]:
    allb = range(frame.size)
    if name == "all":
        return frozenset(allb)
    named = {"scalars": 0, "vectors": 1, "bivectors": 2, "trivectors": 3}
    if name in named:
        return frozenset(b for b in allb if grade(b) == named[name])
    if name.startswith("grade") and name[5:].isdigit():
        k = int(name[5:])
        return frozenset(b for b in allb if grade(b) == k)
    if name == "even":
        return frozenset(b for b in allb if grade(b) % 2 == 0)
    if name == "odd":
        return frozenset(b for b in allb if grade(b) % 2 == 1)
    if name == "pseudoscalar":
        return frozenset([frame.pseudoscalar])
    return None


def constant_value(text: str, span=None) -> Expr:
    """A scalar constant: only numbers, ``pi`` and functions are allowed."""

    def resolve(name, placeholder):
        if name == "pi" and not placeholder:
            return Sym("pi")
        raise UnknownName(f"constant expression may not reference {name!r}", span)

    return parse_expr(text, resolve, span)


def constant_number(text: str, span=None):
    e = constant_value(text, span)
    if isinstance(e, Const):
        return e.value
    return float(eval_numeric(e, {}))


class _Compiler:
    def __init__(self, ast: A.ProjectAst):
        self.ast = ast
        self.p = CompiledProject(ast=ast)
        self.errors: List[GAMacroError] = []

    def run(self) -> CompiledProject:
        for d in self.ast.frames:
            self._guard(self.frame, d)
        for d in self.ast.transforms:
            self._guard(self.transform, d)
        for d in self.ast.subspaces:
            self._guard(self.subspace, d)
        for d in self.ast.classes:
            self._guard(self.mv_class, d)
        for d in self.ast.constants:
            self._guard(self.constant, d)
        for d in self.ast.bindings:
            self._guard(self.binding, d)
        self.macro_decls = {m.name: m for m in self.ast.macros}
        self.compiling: List[str] = []
        for d in self.ast.macros:
            if d.name not in self.p.macros:
                self._guard(self.macro, d)
        if self.errors:
            raise DiagnosticsError(self.errors)
        return self.p

    def _guard(self, fn, d):
        try:
            fn(d)
        except DiagnosticsError as e:
            self.errors.extend(e.errors)
        except GAMacroError as e:
            if e.span is None:
                e.span = d.span
            self.errors.append(e)
        except ValueError as e:
            err = GAMacroError(str(e), d.span)
            self.errors.append(err)

    # frames ---------------------------------------------------------------
    def frame(self, d: A.FrameDecl):
        p = self.p
        n = len(d.basis)
        bcm = None
        if d.form == "euclidean":
            f = Frame.euclidean(d.name, d.basis)
        elif d.form == "signature":
            if len(d.signature) != n:
                raise GAMacroError("signature length differs from basis size", d.span)
            f = Frame.diagonal(d.name, d.basis, [constant_number(s, d.span) for s in d.signature])
        elif d.form == "ipm":
            m = self._matrix(d.matrix, n, d.span)
            f = Frame.from_ipm(d.name, d.basis, m)
        elif d.form == "subspace":
            src = p.frame(d.source, d.span)
            idx = []
            for b in d.basis:
                if b not in src.basis_names:
                    raise UnknownBlade(f"{b!r} is not a basis vector of frame {src.name!r}", d.span)
                idx.append(src.basis_names.index(b))
            m = [[src.ipm[i][j] for j in idx] for i in idx]
            f = Frame.from_ipm(d.name, d.basis, m, kind="subspace", source=src.name)
        elif d.form == "orthogonalize":
            src = p.frame(d.source, d.span)
            if src.dim != n:
                raise TransformDomainMismatch("orthogonalized frame must keep the dimension", d.span)
            sig, b = orthogonalize(src.ipm)
            f = Frame.diagonal(d.name, d.basis, sig)
            f = Frame(d.name, f.basis_names, f.ipm, kind="derived", source=src.name)
            bcm = (src.name, tuple(tuple(_snap(v) for v in row) for row in b))
        elif d.form == "bcm":
            src = p.frame(d.source, d.span)
            m = self._matrix(d.matrix, n, d.span)
            if src.dim != n:
                raise TransformDomainMismatch("basis change matrix must match the source dimension", d.span)
            g = [[sum(m[k][i] * src.ipm[k][l] * m[l][j] for k in range(n) for l in range(n)) for j in range(n)] for i in range(n)]
            f = Frame.from_ipm(d.name, d.basis, g, kind="derived", source=src.name)
            bcm = (src.name, tuple(tuple(r) for r in m))
        else:  # pragma: no cover
            raise ValueError(d.form)
        p.frames[d.name] = f
        if bcm is not None:
            p.frame_bcm[d.name] = bcm

    def _matrix(self, rows, n, span):
        if len(rows) != n:
            raise GAMacroError(f"matrix must be {n}x{n}", span)
        return [[constant_number(v, span) for v in r] for r in rows]

    # transforms ---------------------------------------------------------------
    def transform(self, d: A.TransformDecl):
        p = self.p
        src, dst = p.frame(d.source, d.span), p.frame(d.dest, d.span)
        if src.dim != dst.dim:
            raise TransformDomainMismatch(
                f"transform {d.name!r} joins frames of different dimension", d.span
            )
        n = src.dim
        if d.form == "identity":
            m = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        elif d.form == "matrix":
            m = self._matrix(d.matrix, n, d.span)
        elif d.form == "bcm":
            if d.ref not in p.frames:
                raise UnknownFrame(f"unknown frame {d.ref!r}", d.span)
            hit = p.frame_bcm.get(d.ref)
            m = [list(r) for r in hit[1]] if hit else [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
            if len(m) != n:
                raise TransformDomainMismatch("BCM dimension does not match the transform frames", d.span)
        else:
            ref = p.transforms.get(d.ref)
            if ref is None:
                raise UnknownTransform(f"unknown transform {d.ref!r}", d.span)
            base = [list(r) for r in ref.matrix]
            if len(base) != n:
                raise TransformDomainMismatch("referenced transform has another dimension", d.span)
            if d.form == "alias":
                m = base
            elif d.form == "transpose":
                m = [list(r) for r in zip(*base)]
            else:
                inv = matrix_inverse(base)
                if inv is None:
                    raise SingularTransform(f"transform {d.ref!r} is singular", d.span)
                m = inv if d.form == "inverse" else [list(r) for r in zip(*inv)]
        p.transforms[d.name] = Outermorphism(src, dst, m)

    # subspaces and classes ---------------------------------------------------
    def subspace(self, d: A.SubspaceDecl):
        f = self.p.frame(d.frame, d.span)
        if d.form == "basis":
            blades = frozenset(f.parse_blade(b) for b in d.items)
        else:
            idx = [f.parse_blade(v) for v in d.items]
            for b in idx:
                if grade(b) != 1:
                    raise UnknownBlade("ga_span takes basis vectors", d.span)
            blades = frozenset(
                sum(c) for k in range(len(idx) + 1) for c in itertools.combinations(idx, k)
            )
        self.p.subspaces[(d.frame, d.name)] = blades

    def mv_class(self, d: A.ClassDecl):
        f = self.p.frame(d.frame, d.span)
        blades = set()
        for part in d.parts:
            try:
                blades |= self.p.subspace(f, part, d.span)
            except UnknownSubspace:
                try:
                    blades.add(f.parse_blade(part))
                except UnknownBlade:
                    raise UnknownSubspace(
                        f"{part!r} is neither a subspace nor a blade of frame {f.name!r}", d.span
                    ) from None
        consts = []
        for b, v in d.constants:
            blade = f.parse_blade(b)
            blades.add(blade)
            consts.append((blade, constant_value(v, d.span)))
        self.p.classes[(d.frame, d.name)] = MVClass(f, d.name, frozenset(blades), tuple(sorted(consts)))

    def constant(self, d: A.ConstantDecl):
        f = self.p.frame(d.frame, d.span)
        coeffs = {}
        for b, v in d.coeffs:
            coeffs[f.parse_blade(b)] = constant_value(v, d.span)
        self.p.constants[(d.frame, d.name)] = SymMultivector(f, coeffs)

    def binding(self, d: A.BindingDecl):
        f = self.p.frame(d.frame, d.span)
        binds = tuple((f.parse_blade(b), v) for b, v in d.binds)
        for _, v in d.mins + d.maxs:
            constant_number(v, d.span)
        self.p.bindings[d.name] = ClassBinding(d.name, f, binds, d.mins, d.maxs)

    # macros ------------------------------------------------------------------
    def macro(self, d: A.MacroDecl):
        if d.name in self.compiling:
            cycle = " -> ".join(self.compiling[self.compiling.index(d.name):] + [d.name])
            raise CyclicMacroCall(f"macro calls form a cycle: {cycle}", d.span)
        self.compiling.append(d.name)
        try:
            ir = _MacroBuilder(self, d).build()
        finally:
            self.compiling.pop()
        self.p.macros[d.name] = ir
        return ir

    def callee(self, name: str, span) -> MacroIR:
        hit = self.p.macros.get(name)
        if hit is not None:
            return hit
        d = self.macro_decls.get(name)
        if d is None:
            raise UnknownName(f"unknown macro {name!r}", span)
        if name in self.compiling:
            cycle = " -> ".join(self.compiling[self.compiling.index(name):] + [name])
            raise CyclicMacroCall(f"macro calls form a cycle: {cycle}", span)
        return self.macro(d)


def _snap(v: float):
    q = Fraction(float(v)).limit_denominator(1 << 20)
    return q if abs(float(q) - v) <= 1e-12 else float(v)


class _MacroBuilder:
    def __init__(self, comp: _Compiler, d: A.MacroDecl):
        self.c = comp
        self.p = comp.p
        self.d = d
        self.ops: List[Op] = []
        self.current: Dict[str, str] = {}  # variable -> register
        self.frame_of: Dict[str, Frame] = {}
        self.versions: Dict[str, int] = {}
        self.join = False
        self.calls = 0

    def new_reg(self, name: str) -> str:
        v = self.versions.get(name, 0) + 1
        self.versions[name] = v
        reg = name if v == 1 else f"{name}'{v}"
        self.current[name] = reg
        return reg

    def operand(self, name: str, span) -> str:
        reg = self.current.get(name)
        if reg is not None:
            return reg
        const = self.p.constant(name) if "." in name else None
        if const is not None:
            reg = f"={name}"
            if reg not in self.frame_of:
                self.ops.append(Op("const", reg, (const,), span))
                self.frame_of[reg] = const.frame
            return reg
        raise UnknownName(f"multivector {name!r} is used before it is assigned", span)

    def assign(self, name: str, frame: Frame) -> str:
        reg = self.new_reg(name)
        self.frame_of[reg] = frame
        return reg

    def template(self, text: str, span) -> Expr:
        def resolve(name: str, placeholder: bool) -> Expr:
            if name == "pi" and not placeholder:
                return Sym("pi")
            if self.is_mv(name):
                return self.coefficient(name, 0, span)
            for i in range(len(name) - 1, 0, -1):
                if name[i] == "." and self.is_mv(name[:i]):
                    head, tail = name[:i], name[i + 1:]
                    return self.coefficient(head, self.mv_frame(head).parse_blade(tail), span)
            raise UnknownName(f"unknown name {name!r} in scalar expression", span)

        return parse_expr(text, resolve, span)

    def is_mv(self, name: str) -> bool:
        return name in self.current or ("." in name and self.p.constant(name) is not None)

    def mv_frame(self, name: str) -> Frame:
        if name in self.current:
            return self.frame_of[self.current[name]]
        return self.p.constant(name).frame

    def coefficient(self, name: str, blade: int, span) -> Expr:
        if name in self.current:
            return ref_symbol(self.current[name], blade)
        return self.p.constant(name)[blade]

    def check_same(self, a: str, b: str, span):
        fa, fb = self.frame_of[a], self.frame_of[b]
        if fa is not fb:
            raise FrameMismatch(f"operands are in frames {fa.name!r} and {fb.name!r}", span)

    def build(self) -> MacroIR:
        d, p = self.d, self.p
        inputs, outputs = [], []
        for n, cq in d.inputs:
            cls = p.mv_class(cq, d.span)
            inputs.append((n, cls))
            self.assign(n, cls.frame)
        out_classes = [(n, p.mv_class(cq, d.span)) for n, cq in d.outputs]
        seen = set()
        for n, _ in list(d.inputs) + list(d.outputs):
            if n in seen:
                raise GAMacroError(f"macro {d.name!r} declares {n!r} twice", d.span)
            seen.add(n)
        for s in d.body:
            try:
                self.statement(s)
            except GAMacroError as e:
                if e.span is None:
                    e.span = s.span
                raise
        for n, cls in out_classes:
            reg = self.current.get(n)
            if reg is None:
                raise UnassignedOutput(f"output {n!r} of macro {d.name!r} is never assigned", d.span)
            if self.frame_of[reg] is not cls.frame:
                raise FrameMismatch(
                    f"output {n!r} is computed in frame {self.frame_of[reg].name!r} "
                    f"but its class is in {cls.frame.name!r}",
                    d.span,
                )
            outputs.append((n, cls, reg))
        return MacroIR(d.name, inputs, outputs, self.ops, dict(self.frame_of), d.span)

    def statement(self, s):
        sp = s.span
        if isinstance(s, A.JoinStmt):
            self.join = s.on
            self.ops.append(Op("join", None, (s.on,), sp))
        elif isinstance(s, A.OutputStmt):
            self.ops.append(Op("output", None, (s.text, self.output_refs(s.text, sp)), sp))
        elif isinstance(s, A.CtorStmt):
            f = self.p.frame(s.frame, sp)
            items = []
            for b, t in s.coeffs:
                items.append((f.parse_blade(b), self.template(t, sp)))
            self.ops.append(Op("ctor", self.assign(s.dst, f), (f, tuple(items)), sp))
        elif isinstance(s, A.BinaryStmt):
            a, b = self.operand(s.lhs, sp), self.operand(s.rhs, sp)
            self.check_same(a, b, sp)
            self.ops.append(Op("binary", self.assign(s.dst, self.frame_of[a]), (s.op, a, b), sp))
        elif isinstance(s, A.TransformStmt):
            t = self.p.transforms.get(s.transform)
            if t is None:
                raise UnknownTransform(f"unknown transform {s.transform!r}", sp)
            a = self.operand(s.src, sp)
            if self.frame_of[a] is not t.source:
                raise TransformDomainMismatch(
                    f"transform {s.transform!r} expects frame {t.source.name!r}, "
                    f"operand is in {self.frame_of[a].name!r}",
                    sp,
                )
            self.ops.append(Op("transform", self.assign(s.dst, t.dest), (t, a), sp))
        elif isinstance(s, A.UnaryStmt):
            self.unary(s)
        elif isinstance(s, A.CallStmt):
            self.call(s)
        else:  # pragma: no cover
            raise TypeError(type(s))

    def unary(self, s: A.UnaryStmt):
        sp = s.span
        a = self.operand(s.src, sp)
        f = self.frame_of[a]
        if s.op in ("copy", "neg"):
            self.ops.append(Op(s.op, self.assign(s.dst, f), (a,), sp))
            return
        extra = None
        dst_frame = f
        if s.op in ("scale", "div_by_scalar"):
            extra = self.template(s.operand, sp)
        elif s.op == "diff":
            extra = self.template(s.operand, sp)
            if parse_ref(getattr(extra, "name", "")) is None:
                raise UnknownName(f"diff needs a multivector coefficient, got {s.operand!r}", sp)
        elif s.op == "cast_to_grades":
            extra = frozenset(int(x) for x in s.operand.strip("{}").split(";"))
        elif s.op == "cast_to_subspace":
            extra = self.p.subspace(f, s.operand, sp)
        elif s.op == "cast_to_class":
            cls = self.p.mv_class(s.operand, sp)
            if cls.frame is not f:
                raise ClassMismatch(
                    f"class {cls.qualified} is not in frame {f.name!r}", sp
                )
            extra = cls
        self.ops.append(Op("unary", self.assign(s.dst, dst_frame), (s.op, a, extra), sp))

    def output_refs(self, text: str, sp):
        refs = []
        for m in re.finditer(r"<([^<>]+)>", text):
            name = m.group(1).strip()
            e = self.template(f"<{name}>", sp)
            r = parse_ref(getattr(e, "name", ""))
            if r is None:
                raise UnknownName(f"output placeholder <{name}> is not a multivector coefficient", sp)
            refs.append((m.group(0), r[0], r[1]))
        return tuple(refs)

    def call(self, s: A.CallStmt):
        sp = s.span
        callee = self.c.callee(s.macro, sp)
        self.calls += 1
        prefix = f"{callee.name}#{self.calls}/"
        binds = dict(s.bindings)
        known = {n for n, _ in callee.inputs} | {n for n, _, _ in callee.outputs}
        for k in binds:
            if k not in known:
                raise UnknownName(f"macro {callee.name!r} has no input or output {k!r}", sp)
        rename = {}
        for n, cls in callee.inputs:
            if n not in binds:
                raise UnboundCalleeInput(f"input {n!r} of macro {callee.name!r} is not bound", sp)
            src = self.operand(binds[n], sp)
            if self.frame_of[src] is not cls.frame:
                raise ClassMismatch(
                    f"{binds[n]!r} is in frame {self.frame_of[src].name!r} but input {n!r} "
                    f"of {callee.name!r} needs class {cls.qualified}",
                    sp,
                )
            reg = prefix + n
            self.ops.append(Op("cast", reg, (cls, src), sp))
            self.frame_of[reg] = cls.frame
            rename[n] = reg

        def r(reg):
            if reg in rename:
                return rename[reg]
            if reg.startswith("="):
                return reg
            return prefix + reg

        for op in callee.ops:
            self.ops.append(_rename_op(op, r, sp))
            if op.dst is not None:
                self.frame_of[r(op.dst)] = callee.frames.get(op.dst)
        self.ops.append(Op("join", None, (self.join,), sp))
        for n, cls, reg in callee.outputs:
            if n not in binds:
                continue
            target = binds[n]
            if "." in target:
                raise UnknownName(f"call output must bind a plain variable, got {target!r}", sp)
            for on, ocls in [(x, c) for x, c in self.d.outputs]:
                if on == target and self.p.mv_class(ocls, sp).frame is not cls.frame:
                    raise ClassMismatch(f"output {target!r} cannot hold class {cls.qualified}", sp)
            self.ops.append(Op("copy", self.assign(target, cls.frame), (r(reg),), sp))


def _rename_expr(e, r):
    names = {n for n in free_symbols(e) if n.startswith("@")}
    if not names:
        return e
    m = {}
    for n in names:
        reg, b = parse_ref(n)
        m[n] = ref_symbol(r(reg), b)
    return substitute(e, m)


def _rename_op(op: Op, r, span) -> Op:
    k, a = op.kind, op.args
    dst = r(op.dst) if op.dst is not None else None
    if k == "const" or k == "join":
        args = a
    elif k == "ctor":
        args = (a[0], tuple((b, _rename_expr(t, r)) for b, t in a[1]))
    elif k == "binary":
        args = (a[0], r(a[1]), r(a[2]))
    elif k == "transform":
        args = (a[0], r(a[1]))
    elif k == "unary":
        extra = a[2]
        if isinstance(extra, Expr):
            extra = _rename_expr(extra, r)
        args = (a[0], r(a[1]), extra)
    elif k in ("copy", "neg"):
        args = (r(a[0]),)
    elif k == "cast":
        args = (a[0], r(a[1]))
    elif k == "output":
        args = (a[0], tuple((ph, r(reg), b) for ph, reg, b in a[1]))
    else:  # pragma: no cover
        raise ValueError(k)
    return Op(k, dst, args, op.span or span)


def compile_project(ast: A.ProjectAst) -> CompiledProject:
    return _Compiler(ast).run()
