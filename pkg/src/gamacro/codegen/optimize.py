"""Straight-line optimizer for generated scalar assignment sequences."""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ..symbolic import (
    EMPTY,
    Add,
    AssumptionSet,
    Const,
    Expr,
    Func,
    Mul,
    Sym,
    SymbolicCache,
    add,
    func,
    iter_nodes,
    mul,
    op_count,
    power,
    simplify,
    substitute,
    to_text,
)
from .sequence import Assignment, ExprSequence, Verbatim, is_atomic, is_internal

MAX_ROUNDS = 50


def occurrences(e: Expr) -> Counter:
    """Symbol occurrence counts, shared subtrees counted per path."""
    return Counter(n.name for n in iter_nodes(e) if isinstance(n, Sym))


def _item_exprs(it) -> List[Expr]:
    if isinstance(it, Assignment):
        return [it.expr]
    return [e for _, e in it.refs]


def _map_item(it, fn):
    if isinstance(it, Assignment):
        return it.with_expr(fn(it.expr))
    return Verbatim(it.text, tuple((ph, fn(e)) for ph, e in it.refs))


def _use_counts(items) -> Counter:
    c = Counter()
    for it in items:
        for e in _item_exprs(it):
            c.update(occurrences(e))
    return c


def normalize(e: Expr) -> Tuple[Fraction, Expr]:
    """Split ``e`` into ``scale * base`` with a sign and scale free base."""
    if isinstance(e, Mul) and isinstance(e.coef, Fraction):
        if e.coef == 1:
            return Fraction(1), e
        return e.coef, mul(*(power(b, x) for b, x in e.factors))
    if isinstance(e, Add) and e.terms:
        s = e.terms[0][1]
        if isinstance(s, Fraction) and all(isinstance(c, Fraction) for _, c in e.terms) and isinstance(e.const, Fraction):
            if s == 1:
                return Fraction(1), e
            return s, Add(e.const / s, tuple((t, c / s) for t, c in e.terms))
    return Fraction(1), e


def _candidates(items) -> Counter:
    c = Counter()
    for it in items:
        for e in _item_exprs(it):
            for node in iter_nodes(e):
                if isinstance(node, (Add, Mul, Func)):
                    _, base = normalize(node)
                    if op_count(base) >= 1:
                        c[base] += 1
    return c


def replace_subtree(e: Expr, target: Expr, sym: Sym, memo=None) -> Expr:
    """Replace every scaled occurrence of ``target`` inside ``e`` by ``sym``."""
    memo = {} if memo is None else memo
    hit = memo.get(id(e))
    if hit is not None:
        return hit[1]
    if isinstance(e, (Const, Sym)):
        out = e
    else:
        s, base = normalize(e)
        if base == target:
            out = mul(Const(s), sym)
        elif isinstance(e, Func):
            out = func(e.name, *(replace_subtree(a, target, sym, memo) for a in e.args))
        elif isinstance(e, Mul):
            out = mul(Const(e.coef), *(power(replace_subtree(b, target, sym, memo), x) for b, x in e.factors))
        else:
            out = add(Const(e.const), *(mul(Const(c), replace_subtree(t, target, sym, memo)) for t, c in e.terms))
    memo[id(e)] = (e, out)
    return out


class _Optimizer:
    def __init__(self, seq: ExprSequence, assumptions: AssumptionSet, cache: Optional[SymbolicCache]):
        self.items = list(seq.items)
        self.a = assumptions
        self.cache = cache
        self.fresh = 0
        taken = {it.name for it in seq.assignments()}
        self.taken = taken

    def new_name(self) -> str:
        while True:
            self.fresh += 1
            name = f"%c{self.fresh}"
            if name not in self.taken:
                self.taken.add(name)
                return name

    def simp(self, e: Expr) -> Expr:
        return simplify(e, self.a, self.cache)

    def simplify_all(self):
        self.items = [_map_item(it, self.simp) for it in self.items]

    def propagate(self) -> bool:
        """Inline atomic internal values and single-use internal values."""
        changed = False
        i = 0
        while i < len(self.items):
            it = self.items[i]
            if not (isinstance(it, Assignment) and is_internal(it.name)):
                i += 1
                continue
            later = self.items[i + 1:]
            uses = _use_counts(later)[it.name]
            if uses == 0:
                del self.items[i]
                changed = True
                continue
            if is_atomic(it.expr):
                self._inline(i, it)
                changed = True
                continue
            if uses == 1:
                j = next(k for k in range(i + 1, len(self.items)) if it.name in _use_names(self.items[k]))
                user = self.items[j]
                if isinstance(user, Assignment):
                    new = self.simp(substitute(user.expr, {it.name: it.expr}))
                    if op_count(new) <= op_count(user.expr) + op_count(it.expr):
                        self.items[j] = user.with_expr(new)
                        del self.items[i]
                        changed = True
                        continue
            i += 1
        return changed

    def _inline(self, i: int, it: Assignment):
        m = {it.name: it.expr}
        self.items = self.items[:i] + [
            _map_item(x, lambda e: substitute(e, m) if it.name in occurrences(e) else e)
            for x in self.items[i + 1:]
        ]

    def dedupe(self) -> bool:
        """Later assignments with an already computed right-hand side read it."""
        changed = False
        seen: Dict[Expr, Tuple[str, Fraction]] = {}
        for k, it in enumerate(self.items):
            if not isinstance(it, Assignment) or is_atomic(it.expr):
                continue
            s, base = normalize(it.expr)
            hit = seen.get(base)
            if hit is not None:
                name, s0 = hit
                self.items[k] = it.with_expr(mul(Const(s / s0), Sym(name)))
                changed = True
            elif is_internal(it.name):
                seen[base] = (it.name, s)
        return changed

    def cse(self) -> bool:
        cands = _candidates(self.items)
        best, gain = None, 0
        for base, n in sorted(cands.items(), key=lambda kv: to_text(kv[0])):
            if n < 2:
                continue
            g = (n - 1) * op_count(base)
            if g > gain:
                best, gain = base, g
        if best is None:
            return False
        name = self.new_name()
        sym = Sym(name)
        first = None
        for k, it in enumerate(self.items):
            new = _map_item(it, lambda e: replace_subtree(e, best, sym))
            if first is None and _item_exprs(new) != _item_exprs(it):
                first = k
            self.items[k] = new
        self.items.insert(first, Assignment(name, best, "temp"))
        return True

    def run(self) -> ExprSequence:
        self.simplify_all()
        for _ in range(MAX_ROUNDS):
            changed = self.propagate()
            changed |= self.dedupe()
            if not changed and not self.cse():
                break
        fix_output_hazards(self.items, self.new_name)
        return ExprSequence(self.items)


def _use_names(it) -> set:
    out = set()
    for e in _item_exprs(it):
        out |= {n.name for n in iter_nodes(e) if isinstance(n, Sym)}
    return out


def fix_output_hazards(items: List, new_name):
    """Outputs may overwrite target variables that later outputs still read.

    Conflicting right-hand sides are computed into temporaries ahead of the
    first output write.
    """
    first = next((k for k, it in enumerate(items) if isinstance(it, Assignment) and it.kind == "output"), None)
    if first is None:
        return
    written = set()
    hoisted = []
    for k in range(first, len(items)):
        it = items[k]
        if isinstance(it, Assignment) and it.kind == "output":
            if _use_names(it) & written:
                name = new_name()
                hoisted.append(Assignment(name, it.expr, "temp"))
                items[k] = it.with_expr(Sym(name))
            written.add(it.name)
    items[first:first] = hoisted


def optimize(
    seq: ExprSequence,
    assumptions: AssumptionSet = EMPTY,
    cache: Optional[SymbolicCache] = None,
) -> ExprSequence:
    """Simplify, propagate, share common subexpressions and drop dead code.

    The result never has more arithmetic operations than the input.
    """
    out = _Optimizer(seq, assumptions, cache).run()
    if out.op_count() > seq.op_count():
        return ExprSequence(list(seq.items))
    return out


def rename_internal(seq: ExprSequence, prefix: str = "var", width: int = 4) -> ExprSequence:
    """Give internal names target-friendly ``varNNNN`` spellings."""
    used = set(seq.free_inputs()) | {a.name for a in seq.assignments() if not is_internal(a.name)}
    mapping: Dict[str, Sym] = {}
    k = 0
    for a in seq.assignments():
        if is_internal(a.name):
            while True:
                k += 1
                name = f"{prefix}{k:0{width}d}"
                if name not in used:
                    break
            mapping[a.name] = Sym(name)
    if not mapping:
        return ExprSequence(list(seq.items))
    names = {k: v for k, v in mapping.items()}

    def fn(e):
        return substitute(e, names) if any(n in names for n in occurrences(e)) else e

    items = []
    for it in seq.items:
        it = _map_item(it, fn)
        if isinstance(it, Assignment) and it.name in mapping:
            it = Assignment(mapping[it.name].name, it.expr, it.kind, it.target, it.declare)
        items.append(it)
    return ExprSequence(items)
