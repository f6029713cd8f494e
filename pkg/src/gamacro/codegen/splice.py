"""Insert generated blocks into binding regions."""

from __future__ import annotations

from typing import Iterable, List, Tuple

from ..errors import OverlappingRegions
from .binding import BEGIN_SENTINEL, END_SENTINEL, BindingPoint


def generated_block(generated: str, indent: str) -> List[str]:
    body = [ln if ln.startswith(indent) else indent + ln for ln in generated.split("\n") if ln.strip()]
    return [indent + BEGIN_SENTINEL] + body + [indent + END_SENTINEL]


def splice(text: str, bp: BindingPoint, generated: str) -> str:
    return splice_all(text, [(bp, generated)])


def splice_all(text: str, jobs: Iterable[Tuple[BindingPoint, str]]) -> str:
    """Replace or insert the generated block of every binding point.

    Directive lines and region markers are left untouched, so splicing the
    same code twice gives the same file.
    """
    jobs = sorted(jobs, key=lambda j: j[0].open_line)
    for (a, _), (b, _) in zip(jobs, jobs[1:]):
        if b.open_line <= a.close_line:
            raise OverlappingRegions("binding regions overlap", b.span)
    lines = text.split("\n")
    for bp, gen in reversed(jobs):
        block = generated_block(gen, bp.indent)
        if bp.block is not None:
            start, end = bp.block
            lines[start:end + 1] = block
        else:
            lines[bp.close_line:bp.close_line] = block
    return "\n".join(lines)
