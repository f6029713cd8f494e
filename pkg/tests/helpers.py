"""Shared construction helpers for the test-suite."""

from fractions import Fraction

from gamacro.blades import Frame
from gamacro.compiler import compile_project
from gamacro.dsl import parse_project

E3 = Frame.euclidean("e3d", ["e1", "e2", "e3"])
CGA_IPM = [
    [0, 0, 0, 0, -1],
    [0, 1, 0, 0, 0],
    [0, 0, 1, 0, 0],
    [0, 0, 0, 1, 0],
    [-1, 0, 0, 0, 0],
]
CGA = Frame.from_ipm("cga5d", ["e0", "e1", "e2", "e3", "einf"], CGA_IPM)

E3D_FRAME = """
define frame e3d as
  basis: {e1; e2; e3}
  euclidean
end frame
"""


def project(**files):
    """Compile a project from role texts (``frames=...``, ``macros=...``)."""
    return compile_project(parse_project(files))


def frac(x):
    return Fraction(x)


# ---------------------------------------------------------------------------
# stdlib fixtures: generated once per session, executed on numpy arrays
# ---------------------------------------------------------------------------

from functools import lru_cache  # noqa: E402

import numpy as np  # noqa: E402

from gamacro.codegen import generate, interpret  # noqa: E402
from gamacro.stdlib import binding_point, fixture, fixtures, load_stdlib  # noqa: E402


@lru_cache(maxsize=None)
def generated(name):
    """Neutral-dialect generation of one manifest fixture."""
    return generate(load_stdlib(), binding_point(fixture(name)))


def generated_all():
    return {fx.name: generated(fx.name) for fx in fixtures()}


def run_fixture(name, optimized=True, **inputs):
    """Execute the generated code of fixture ``name``.

    Inputs are given per multivector as ``{blade_name: value}`` or a bare
    number for scalars; missing coefficients are zero.  Returns
    ``{multivector: {blade_name: value}}`` for every bound output.
    """
    fx = fixture(name)
    ir = load_stdlib().macros[fx.macro]
    in_names = {n for n, _ in ir.inputs}
    env, outs = {}, {}
    for target, var in fx.binds:
        mv, _, blade = target.partition(".")
        if mv in in_names:
            v = inputs.get(mv, 0.0)
            if isinstance(v, dict):
                env[var] = v.get(blade, 0.0)
            else:
                env[var] = v if blade == "1" else 0.0
        else:
            outs.setdefault(mv, {})[blade] = var
    g = generated(name)
    res = interpret(g.sequence if optimized else g.raw, env)
    return {mv: {b: res.get(v, 0.0) for b, v in m.items()} for mv, m in outs.items()}


def ev(x):
    """Euclidean vector coefficients from an array of shape (3, ...)."""
    return {"e1": x[0], "e2": x[1], "e3": x[2]}


def vec_of(mv, names=("e1", "e2", "e3")):
    return np.array([np.asarray(mv.get(n, 0.0), dtype=float) for n in names])


def up(x):
    """Conformal point of Euclidean position x (shape (3, ...))."""
    x = np.asarray(x, dtype=float)
    return {"e0": np.ones_like(x[0]), **ev(x), "einf": 0.5 * (x * x).sum(axis=0)}


# ---------------------------------------------------------------------------
# acceptance criteria bookkeeping, printed by the terminal summary hook
# ---------------------------------------------------------------------------

from contextlib import contextmanager  # noqa: E402

ACCEPTANCE = {}
REPORT_LINES = []  # extra lines printed under the criteria


@contextmanager
def criterion(n, title):
    """Record pass/fail of acceptance criterion ``n``; yields a dict for details."""
    info = {"title": title, "detail": ""}
    try:
        yield info
    except BaseException as e:
        ACCEPTANCE[n] = (False, info["title"], info["detail"] or f"{type(e).__name__}: {e}".splitlines()[0])
        raise
    ACCEPTANCE[n] = (True, info["title"], info["detail"])
