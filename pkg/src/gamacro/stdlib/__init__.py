"""Shipped fixture pack: frames, classes, constants and macros with expectations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from ..compiler import CompiledProject, compile_project
from ..dsl import read_project

PACK_DIR = Path(__file__).with_name("gmac")
MANIFEST = Path(__file__).with_name("manifest.json")


@dataclass(frozen=True)
class Fixture:
    """One manifest entry: a macro with bindings and optional golden text."""

    name: str
    macro: str
    binds: Tuple[Tuple[str, str], ...]
    tolerance: float = 1e-9
    golden: Optional[str] = None
    bounds: Dict[str, Tuple[float, float]] = field(default_factory=dict)


@lru_cache(maxsize=1)
def load_stdlib() -> CompiledProject:
    return compile_project(read_project(PACK_DIR))


@lru_cache(maxsize=1)
def _manifest() -> Tuple[Fixture, ...]:
    raw = json.loads(MANIFEST.read_text(encoding="utf-8"))
    out = []
    for item in raw["fixtures"]:
        out.append(
            Fixture(
                item["name"],
                item["macro"],
                tuple((t, e) for t, e in item["binds"]),
                item.get("tolerance", 1e-9),
                item.get("golden"),
                {k: tuple(v) for k, v in item.get("bounds", {}).items()},
            )
        )
    return tuple(out)


def fixtures() -> List[Fixture]:
    return list(_manifest())


def fixture(name: str) -> Fixture:
    for f in _manifest():
        if f.name == name:
            return f
    raise KeyError(name)


def binding_point(fx: Fixture):
    """A source-free binding point for ``fx`` carrying its sampling bounds."""
    from ..codegen import BindingPoint, CoefficientBind

    bp = BindingPoint(fx.macro)
    for target, expr in fx.binds:
        mv, _, blade = target.partition(".")
        bp.binds.append(CoefficientBind(mv, blade, expr))
    for var, (lo, hi) in fx.bounds.items():
        bp.mins.append((var, str(lo)))
        bp.maxs.append((var, str(hi)))
    return bp


__all__ = ["Fixture", "PACK_DIR", "MANIFEST", "binding_point", "fixture", "fixtures", "load_stdlib"]
