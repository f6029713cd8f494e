"""Straight-line scalar code: the generator's intermediate product."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple, Union

from ..symbolic import Const, Expr, Mul, Sym, free_symbols, op_count

INTERNAL_PREFIX = "%"


@dataclass(frozen=True)
class Assignment:
    """``name <- expr``.

    ``kind`` is ``input`` (alias of a bound input coefficient), ``temp`` or
    ``output``.  ``target`` names the (multivector, blade) an output holds;
    ``declare`` asks the emitter to declare the variable (outputs that have
    no bound target variable).
    """

    name: str
    expr: Expr
    kind: str = "temp"
    target: Optional[Tuple[str, int]] = None
    declare: bool = False

    def with_expr(self, expr: Expr) -> "Assignment":
        return Assignment(self.name, expr, self.kind, self.target, self.declare)


@dataclass(frozen=True)
class Verbatim:
    """Text copied to the output; ``refs`` maps placeholders to symbols."""

    text: str
    refs: Tuple[Tuple[str, Expr], ...] = ()


Item = Union[Assignment, Verbatim]


def is_internal(name: str) -> bool:
    return name.startswith(INTERNAL_PREFIX)


def is_atomic(e: Expr) -> bool:
    """Constants, symbols and negated symbols never get their own temporary."""
    if isinstance(e, (Const, Sym)):
        return True
    return (
        isinstance(e, Mul)
        and e.coef == -1
        and len(e.factors) == 1
        and e.factors[0][1] == 1
        and isinstance(e.factors[0][0], Sym)
    )


@dataclass
class ExprSequence:
    items: List[Item] = field(default_factory=list)

    def assignments(self) -> Iterator[Assignment]:
        return (i for i in self.items if isinstance(i, Assignment))

    @property
    def outputs(self) -> List[Assignment]:
        return [a for a in self.assignments() if a.kind == "output"]

    @property
    def temporaries(self) -> List[Assignment]:
        return [a for a in self.assignments() if a.kind != "output"]

    def __len__(self):
        return sum(1 for _ in self.assignments())

    def op_count(self) -> int:
        return sum(op_count(a.expr) for a in self.assignments())

    def free_inputs(self) -> List[str]:
        """Symbols read but never assigned (target-language inputs)."""
        assigned, free = set(), set()
        for it in self.items:
            exprs = [it.expr] if isinstance(it, Assignment) else [e for _, e in it.refs]
            for e in exprs:
                free |= {n for n in free_symbols(e) if n not in assigned}
            if isinstance(it, Assignment):
                assigned.add(it.name)
        return sorted(free)

    def validate(self):
        """Every read follows its write and no name is assigned twice."""
        assigned = set()
        free = set(self.free_inputs())
        for it in self.items:
            if isinstance(it, Assignment):
                if it.name in assigned:
                    raise ValueError(f"{it.name!r} assigned twice")
                for n in free_symbols(it.expr):
                    if n not in assigned and n not in free:
                        raise ValueError(f"{n!r} read before it is written")
                assigned.add(it.name)
        return True

    def output_map(self) -> Dict[Tuple[str, int], Assignment]:
        return {a.target: a for a in self.outputs if a.target is not None}
