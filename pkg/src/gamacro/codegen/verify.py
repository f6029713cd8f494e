"""Check generated code against the numeric oracle on random inputs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ..compiler import CompiledProject
from ..errors import GAMacroError, UnknownMacroName
from ..oracle import NumMultivector, run_macro
from ..symbolic import eval_numeric, free_symbols
from .binding import BEGIN_SENTINEL, END_SENTINEL, BindingPoint
from .evaluate import resolve_bindings, zero_output_name
from .interpret import interpret, parse_block

DEFAULT_RANGE = (-1.0, 1.0)


@dataclass
class VerifyReport:
    macro: str
    file: str
    line: int
    ok: bool
    samples: int
    max_error: float = 0.0
    failures: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "macro": self.macro,
            "file": self.file,
            "line": self.line,
            "ok": self.ok,
            "samples": self.samples,
            "max_error": self.max_error,
            "failures": self.failures,
        }


def extract_block(text: str, bp: BindingPoint) -> Optional[str]:
    """The generated lines of ``bp`` inside ``text`` (None if absent)."""
    if bp.block is None:
        return None
    lines = text.split("\n")[bp.block[0] + 1: bp.block[1]]
    return "\n".join(lines)


def sample_env(names, assumptions, samples: int, rng: np.random.Generator) -> Dict[str, np.ndarray]:
    env = {}
    for n in sorted(names):
        lo, hi = assumptions.lower(n), assumptions.upper(n)
        lo = float(lo) if lo is not None else None
        hi = float(hi) if hi is not None else None
        if lo is None and hi is None:
            lo, hi = DEFAULT_RANGE
        elif lo is None:
            lo = hi - 2.0
        elif hi is None:
            hi = lo + 2.0
        env[n] = rng.uniform(lo, hi, samples)
    return env


def verify_block(
    project: CompiledProject,
    bp: BindingPoint,
    block: str,
    dialect="neutral",
    samples: int = 1000,
    rng: Optional[np.random.Generator] = None,
    tol: float = 1e-9,
) -> VerifyReport:
    rng = rng if rng is not None else np.random.default_rng(0)
    rep = VerifyReport(bp.macro, bp.file, bp.open_line + 1, False, samples)
    macro = project.macros.get(bp.macro)
    if macro is None:
        raise UnknownMacroName(f"unknown macro {bp.macro!r}", bp.span)
    rb = resolve_bindings(project, macro, bp)
    seq = parse_block(block, dialect)
    names = set(seq.free_inputs())
    for coeffs in rb.inputs.values():
        for e in coeffs.values():
            names |= free_symbols(e)
    env = sample_env(names, rb.assumptions, samples, rng)

    inputs = {}
    for name, cls in macro.inputs:
        coeffs = {}
        for b, e in rb.inputs.get(name, {}).items():
            coeffs[b] = np.broadcast_to(np.asarray(eval_numeric(e, env), dtype=float), (samples,))
        inputs[name] = NumMultivector.from_coeffs(cls.frame, coeffs, samples)
    try:
        expected = run_macro(macro, inputs)
        got = interpret(seq, env)
    except GAMacroError as e:
        rep.failures.append(str(e))
        return rep

    checked = 0
    for name, cls, _ in macro.outputs:
        lvalues = dict(rb.outputs.get(name, {}))
        for b in cls.blades:
            if b not in lvalues and zero_output_name(name, cls.frame, b) in got:
                lvalues[b] = zero_output_name(name, cls.frame, b)
        for b, lv in sorted(lvalues.items()):
            want = np.asarray(expected[name].data[b], dtype=float)
            label = f"{name}.{cls.frame.blade_name(b)} -> {lv}"
            if lv not in got:
                rep.failures.append(f"{label}: not assigned by the generated code")
                continue
            have = np.broadcast_to(np.asarray(got[lv], dtype=float), want.shape)
            finite = np.isfinite(want)
            err = np.abs(have - want) / np.maximum(1.0, np.abs(want))
            err = np.where(finite, err, 0.0)
            bad = finite & ~(err <= tol)
            checked += 1
            rep.max_error = max(rep.max_error, float(np.max(err, initial=0.0)))
            if np.any(bad):
                k = int(np.argmax(bad))
                rep.failures.append(f"{label}: got {float(have[k])!r}, expected {float(want[k])!r}")
    rep.ok = not rep.failures
    return rep
