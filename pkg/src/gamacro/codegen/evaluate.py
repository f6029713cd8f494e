"""Symbolic execution of a macro under the bindings of one binding point."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .. import multivector as M
from ..compiler import ClassBinding, CompiledProject, MacroIR, MVClass, constant_number, parse_ref
from ..errors import (
    BladeOutsideClass,
    ClassMismatch,
    DomainError,
    GAMacroError,
    MalformedBinding,
    UnboundInputCoefficient,
    UnknownBlade,
    UnknownMacroName,
)
from ..symbolic import (
    EMPTY,
    ZERO,
    AssumptionSet,
    Const,
    Expr,
    Sym,
    SymbolicCache,
    differentiate,
    free_symbols,
    func,
    parse_expr,
    simplify,
    substitute,
)
from .binding import BindingPoint, ClassBind, CoefficientBind
from .optimize import fix_output_hazards
from .sequence import Assignment, ExprSequence, Verbatim, is_atomic


@dataclass
class ResolvedBindings:
    inputs: Dict[str, Dict[int, Expr]] = field(default_factory=dict)
    outputs: Dict[str, Dict[int, str]] = field(default_factory=dict)
    assumptions: AssumptionSet = EMPTY


def target_expr(text: str, span=None) -> Expr:
    """Scalar function over target-language variables."""

    def resolve(name, placeholder):
        if name == "pi" and not placeholder:
            return Sym("pi")
        return Sym(name)

    return parse_expr(text, resolve, span)


def _lvalue(text: str) -> Optional[str]:
    t = text.strip()
    if t.startswith("<") and t.endswith(">"):
        return t[1:-1].strip() or None
    e = None
    try:
        e = target_expr(t)
    except GAMacroError:
        return None
    return e.name if isinstance(e, Sym) and e.name != "pi" else None


def resolve_bindings(project: CompiledProject, macro: MacroIR, bp: BindingPoint) -> ResolvedBindings:
    span = bp.span
    ins = {n: c for n, c in macro.inputs}
    outs = {n: c for n, c, _ in macro.outputs}
    res = ResolvedBindings({n: {} for n in ins}, {n: {} for n in outs})

    entries: List[Tuple[str, int, str, MVClass]] = []
    mins: List[Tuple[str, str]] = []
    maxs: List[Tuple[str, str]] = []
    for b in bp.binds:
        cls = ins.get(b.mv) or outs.get(b.mv)
        if cls is None:
            raise MalformedBinding(f"macro {macro.name!r} has no multivector {b.mv!r}", span)
        if isinstance(b, CoefficientBind):
            try:
                blade = cls.frame.parse_blade(b.blade)
            except UnknownBlade as e:
                raise MalformedBinding(str(e), span) from None
            entries.append((b.mv, blade, b.expr, cls))
        else:
            cb: Optional[ClassBinding] = project.bindings.get(b.binding)
            if cb is None:
                raise MalformedBinding(f"unknown class binding {b.binding!r}", span)
            if cb.frame is not cls.frame:
                raise ClassMismatch(
                    f"binding {cb.name!r} is for frame {cb.frame.name!r}, "
                    f"{b.mv!r} lives in {cls.frame.name!r}",
                    span,
                )
            for blade, text in cb.binds:
                entries.append((b.mv, blade, text.replace("#", b.obj), cls))
            mins += [(var.replace("#", b.obj), v) for var, v in cb.mins]
            maxs += [(var.replace("#", b.obj), v) for var, v in cb.maxs]

    for mv, blade, text, cls in entries:
        if blade not in cls.blades:
            raise BladeOutsideClass(
                f"{mv}.{cls.frame.blade_name(blade)} is not part of class {cls.qualified}", span
            )
        if mv in ins:
            if blade in cls.constant_map:
                raise MalformedBinding(
                    f"{mv}.{cls.frame.blade_name(blade)} is fixed by class {cls.qualified}", span
                )
            res.inputs[mv][blade] = target_expr(text, span)
        else:
            lv = _lvalue(text)
            if lv is None:
                raise MalformedBinding(f"output {mv}.{cls.frame.blade_name(blade)} must bind a variable, got {text!r}", span)
            res.outputs[mv][blade] = lv

    bounds: Dict[str, list] = {}
    for var, v in mins + list(bp.mins):
        bounds.setdefault(var, [None, None])[0] = Fraction(constant_number(v))
    for var, v in maxs + list(bp.maxs):
        bounds.setdefault(var, [None, None])[1] = Fraction(constant_number(v))
    try:
        res.assumptions = AssumptionSet.from_dict({k: tuple(v) for k, v in bounds.items()})
    except ValueError as e:
        raise MalformedBinding(str(e), span) from None
    return res


def zero_output_name(mv: str, frame, blade: int) -> str:
    """Declared variable for an output coefficient that has no binding."""
    return f"{mv}_{frame.blade_name(blade).replace('^', '_')}"


@dataclass
class Evaluation:
    outputs: Dict[Tuple[str, int], Expr]
    sequence: ExprSequence
    bindings: ResolvedBindings
    warnings: List[str] = field(default_factory=list)
    cache: Optional[SymbolicCache] = None


class _Executor:
    def __init__(self, macro: MacroIR, rb: ResolvedBindings, strict: bool, cache: SymbolicCache):
        self.macro = macro
        self.rb = rb
        self.strict = strict
        self.cache = cache
        self.a = rb.assumptions
        self.items: List = []
        self.defs: Dict[str, Expr] = {}
        self.env: Dict[str, M.SymMultivector] = {}
        self.join = False
        self.ntemp = 0
        self.warnings: List[str] = []
        self.dmemo: Dict[Tuple[str, str], Expr] = {}

    def temp_name(self) -> str:
        self.ntemp += 1
        return f"%t{self.ntemp}"

    def temp(self, e: Expr, kind: str = "temp", name: Optional[str] = None) -> Sym:
        if name is None:
            name = self.temp_name()
        self.items.append(Assignment(name, e, kind))
        self.defs[name] = e
        return Sym(name)

    def atomize(self, mv: M.SymMultivector) -> M.SymMultivector:
        if self.join:
            return mv
        return mv.map(lambda _, c: c if is_atomic(c) else self.temp(c))

    def simp(self, mv: M.SymMultivector) -> M.SymMultivector:
        return M.simplify_mv(mv, self.a, self.cache)

    def coef(self, reg: str, blade: int) -> Expr:
        return self.env[reg][blade]

    def fill(self, template: Expr) -> Expr:
        refs = {n for n in free_symbols(template) if n.startswith("@")}
        if not refs:
            return template
        m = {}
        for n in refs:
            reg, b = parse_ref(n)
            m[n] = self.coef(reg, b)
        return simplify(substitute(template, m), self.a, self.cache)

    def derivative(self, name: str, var: str) -> Optional[Expr]:
        """Derivative of an intermediate with respect to ``var``."""
        if name not in self.defs or self.defs[name] is None:
            return None
        key = (name, var)
        if key not in self.dmemo:
            self.dmemo[key] = simplify(
                differentiate(self.defs[name], var, lambda n: self.derivative(n, var)),
                self.a,
                self.cache,
            )
        return self.dmemo[key]

    def inputs(self):
        for name, cls in self.macro.inputs:
            bound = self.rb.inputs.get(name, {})
            coeffs = {}
            for b in sorted(cls.blades):
                if b in cls.constant_map:
                    coeffs[b] = cls.constant_map[b]
                elif b in bound:
                    e = bound[b]
                    if is_atomic(e):
                        coeffs[b] = e
                    else:
                        label = f"%in:{name}.{cls.frame.blade_name(b)}"
                        coeffs[b] = self.temp(e, "input", label)
                        # input aliases are leaves for differentiation
                        self.defs[label] = None
                elif self.strict:
                    raise UnboundInputCoefficient(
                        f"input coefficient {name}.{cls.frame.blade_name(b)} is not bound",
                        self.macro.span,
                    )
            self.env[name] = M.SymMultivector(cls.frame, coeffs)

    def cast(self, mv: M.SymMultivector, cls: MVClass, span, what: str) -> M.SymMultivector:
        outside = [b for b in mv.coeffs if b not in cls.blades]
        if outside:
            names = ", ".join(cls.frame.blade_name(b) for b in outside)
            if self.strict:
                raise BladeOutsideClass(f"{what} has coefficients outside class {cls.qualified}: {names}", span)
            self.warnings.append(f"{what}: dropped coefficients outside class {cls.qualified}: {names}")
        coeffs = {b: c for b, c in mv.coeffs.items() if b in cls.blades}
        coeffs.update(cls.constant_map)
        return M.SymMultivector(cls.frame, coeffs)

    def run(self):
        self.inputs()
        for op in self.macro.ops:
            try:
                self.step(op)
            except GAMacroError as e:
                if e.span is None:
                    e.span = op.span
                raise

    def step(self, op):
        k, a = op.kind, op.args
        c, asm = self.cache, self.a
        if k == "join":
            self.join = a[0]
            return
        if k == "output":
            text, refs = a
            out = []
            for ph, reg, b in refs:
                e = self.coef(reg, b)
                if not is_atomic(e):
                    e = self.temp(e)
                out.append((ph, e))
            self.items.append(Verbatim(text, tuple(out)))
            return
        if k == "const":
            self.env[op.dst] = a[0]
            return
        if k == "ctor":
            frame, items = a
            val = M.SymMultivector(frame, {b: self.fill(t) for b, t in items})
        elif k == "binary":
            x, y = self.env[a[1]], self.env[a[2]]
            if a[0] == "+":
                val = self.simp(M.add_mv(x, y))
            elif a[0] == "-":
                val = self.simp(M.sub_mv(x, y))
            else:
                val = M.product(a[0], x, y, c, asm)
        elif k == "transform":
            val = self.simp(a[0].apply(self.env[a[1]]))
        elif k == "copy":
            val = self.env[a[0]]
        elif k == "neg":
            val = M.negate(self.env[a[0]])
        elif k == "cast":
            val = self.cast(self.env[a[1]], a[0], op.span, f"call argument {a[1]!r}")
        elif k == "unary":
            val = self.unary(a, op)
        else:  # pragma: no cover
            raise ValueError(k)
        self.env[op.dst] = self.atomize(val)

    def unary(self, a, op) -> M.SymMultivector:
        name, src, extra = a
        x = self.env[src]
        c, asm = self.cache, self.a
        if name == "grade_inv":
            return M.grade_involution(x)
        if name == "cliff_conj":
            return M.clifford_conjugate(x)
        if name == "reverse":
            return M.reverse(x)
        if name == "scale":
            return self.simp(M.scale(x, self.fill(extra)))
        if name == "div_by_scalar":
            return self.simp(M.div_by_scalar(x, self.fill(extra)))
        if name == "norm":
            return M.SymMultivector.scalar(x.frame, M.norm(x, c, asm))
        if name == "norm2":
            return M.SymMultivector.scalar(x.frame, M.norm2(x, c, asm))
        if name == "quasi_norm":
            return M.SymMultivector.scalar(x.frame, M.quasi_norm(x, c, asm))
        if name == "quasi_norm2":
            return M.SymMultivector.scalar(x.frame, M.quasi_norm2(x, c, asm))
        if name == "diff":
            v = self.fill(extra)
            if isinstance(v, Const):
                return M.SymMultivector.zero(x.frame)
            if not isinstance(v, Sym):
                raise DomainError("diff variable must be an input coefficient", op.span)
            var = v.name
            memo: dict = {}
            return self.simp(
                x.map(lambda _, e: differentiate(e, var, lambda n: self.derivative(n, var), memo))
            )
        if name == "cast_to_grades":
            return M.cast_to_grades(x, extra)
        if name == "cast_to_subspace":
            return M.cast_to_subspace(x, extra)
        if name == "cast_to_class":
            return self.cast(x, extra, op.span, f"cast of {src!r}")
        raise ValueError(name)  # pragma: no cover


def evaluate_macro(
    project: CompiledProject,
    macro,
    bp: BindingPoint,
    strict: bool = False,
    emit_zeros: bool = False,
    cache: Optional[SymbolicCache] = None,
) -> Evaluation:
    if isinstance(macro, str):
        if macro not in project.macros:
            raise UnknownMacroName(f"unknown macro {macro!r}", bp.span)
        macro = project.macros[macro]
    cache = cache if cache is not None else SymbolicCache()
    rb = resolve_bindings(project, macro, bp)
    ex = _Executor(macro, rb, strict, cache)
    ex.run()
    outputs: Dict[Tuple[str, int], Expr] = {}
    out_items = []
    for name, cls, reg in sorted(macro.outputs, key=lambda t: t[0]):
        val = ex.cast(ex.env[reg], cls, macro.span, f"output {name!r}")
        bound = rb.outputs.get(name, {})
        for b in sorted(cls.blades):
            e = val[b]
            outputs[(name, b)] = e
            if b in bound:
                out_items.append(Assignment(bound[b], e, "output", (name, b)))
            elif emit_zeros:
                label = zero_output_name(name, cls.frame, b)
                out_items.append(Assignment(label, e, "output", (name, b), declare=True))
    items = ex.items + out_items
    fix_output_hazards(items, lambda: ex.temp_name())
    seq = ExprSequence(items)
    return Evaluation(outputs, seq, rb, ex.warnings + list(bp.warnings), cache)
