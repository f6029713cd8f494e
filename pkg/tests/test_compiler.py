import itertools
from fractions import Fraction

import numpy as np
import pytest

from gamacro.compiler import compile_project
from gamacro.dsl import parse_project, print_project
from gamacro.errors import (
    ClassMismatch,
    CyclicMacroCall,
    DiagnosticsError,
    FrameMismatch,
    SingularTransform,
    TransformDomainMismatch,
    UnassignedOutput,
    UnboundCalleeInput,
    UnknownClass,
    UnknownFrame,
    UnknownName,
    UnknownSubspace,
    UnknownTransform,
)
from gamacro.multivector import SymMultivector
from gamacro.oracle import run_named
from gamacro.stdlib import load_stdlib
from helpers import E3D_FRAME, project

FRAMES = E3D_FRAME + """
define frame e2d as
  basis: {x; y}
  euclidean
end frame
"""

CONSTANTS = """
define constant e3d.Ii as multivector {e1^e2^e3 : -1} end constant
"""


def compile_errors(**files):
    with pytest.raises(DiagnosticsError) as ei:
        project(**files)
    return ei.value.errors


def one_error(**files):
    errs = compile_errors(**files)
    assert len(errs) == 1, errs
    return errs[0]


def macro(body, inputs="u : e3d.Vector; v : e3d.Vector", outputs="w : e3d.Multivector"):
    return f"""
define macro M as
  inputs: {{{inputs}}}
  outputs: {{{outputs}}}
  performs:
{body}
end macro
"""


def test_ga_span_yields_all_blades_of_listed_vectors():
    p = project(frames=FRAMES, subspaces="define subspace e3d.S as ga_span {e1; e2} end subspace")
    assert p.subspaces[("e3d", "S")] == frozenset({0, 1, 2, 3})


def test_inverse_pseudoscalar_constant():
    p = project(frames=FRAMES, constants=CONSTANTS)
    f = p.frames["e3d"]
    assert p.constants[("e3d", "Ii")] == SymMultivector.from_names(f, {"e1^e2^e3": -1})


def test_signature_and_ipm_frames():
    text = """
    define frame m as basis: {t; x} signature = {-1, 1} end frame
    define frame n as basis: {a; b} IPM = {{0, -1}, {-1, 0}} end frame
    define frame o as basis: {p; q} orthogonalize n end frame
    """
    p = project(frames=text)
    assert p.frames["m"].ipm[0][0] == -1
    assert p.frames["n"].ipm[0][1] == -1
    assert sorted(p.frames["o"].ipm[i][i] for i in range(2)) == [-1, 1]
    assert "o" in p.frame_bcm


def test_transform_forms():
    tr = """
    define transform A : e3d -> e3d as outermorphism using {{1, 2, 0}, {0, 1, 0}, {0, 0, 2}} end transform
    define transform Ai : e3d -> e3d as inverse of A end transform
    define transform At : e3d -> e3d as transpose of A end transform
    define transform Ait : e3d -> e3d as inverse transpose of A end transform
    define transform Same : e3d -> e3d as alias of A end transform
    define transform Id : e3d -> e3d as identity end transform
    """
    p = project(frames=FRAMES, transforms=tr)
    A = np.array(p.transforms["A"].matrix, dtype=object)
    Ai = np.array(p.transforms["Ai"].matrix, dtype=object)
    assert (A.dot(Ai) == np.eye(3, dtype=int)).all()
    assert (np.array(p.transforms["At"].matrix, dtype=object) == A.T).all()
    assert (np.array(p.transforms["Ait"].matrix, dtype=object) == Ai.T).all()
    assert p.transforms["Same"].matrix == p.transforms["A"].matrix
    assert p.transforms["Id"].matrix[1] == (0, 1, 0)
    assert all(isinstance(v, Fraction) for row in p.transforms["Ai"].matrix for v in row)


def test_singular_inverse():
    tr = """
    define transform A : e3d -> e3d as outermorphism using {{1, 2, 0}, {2, 4, 0}, {0, 0, 1}} end transform
    define transform B : e3d -> e3d as inverse of A end transform
    """
    assert isinstance(one_error(frames=FRAMES, transforms=tr), SingularTransform)


def test_transform_between_dimensions():
    tr = "define transform A : e3d -> e2d as identity end transform"
    assert isinstance(one_error(frames=FRAMES, transforms=tr), TransformDomainMismatch)


def test_unknown_references():
    assert isinstance(
        one_error(frames=FRAMES, constants="define constant zz.C as multivector {1 : 1} end constant"),
        UnknownFrame,
    )
    assert isinstance(
        one_error(frames=FRAMES, transforms="define transform B : e3d -> e3d as inverse of Q end transform"),
        UnknownTransform,
    )
    assert isinstance(
        one_error(frames=FRAMES, multivectors="define multivector class e3d.C as nope end multivector class"),
        UnknownSubspace,
    )
    assert isinstance(one_error(frames=FRAMES, macros=macro("w = u", inputs="u : e3d.Nope")), UnknownClass)


def test_class_constants_belong_to_class():
    p = project(
        frames=FRAMES,
        multivectors="define multivector class e3d.P as vectors; e1^e2^e3 : 1; end multivector class",
    )
    cls = p.classes[("e3d", "P")]
    assert {b for b, _ in cls.constants} <= cls.blades
    assert cls.free_blades == [1, 2, 4]


def test_builtin_classes():
    p = project(frames=FRAMES, macros=macro("    w = u gp v"))
    ir = p.macros["M"]
    assert ir.input_class("u").blades == frozenset({1, 2, 4})
    assert len(ir.output_class("w").blades) == 8


def test_cross_frame_binary_operation():
    err = one_error(
        frames=FRAMES,
        macros=macro("    w = u gp v", inputs="u : e3d.Vector; v : e2d.Vector"),
    )
    assert isinstance(err, FrameMismatch)
    assert err.span.line > 0


def test_transform_domain_checked():
    tr = "define transform T : e2d -> e2d as identity end transform"
    err = one_error(frames=FRAMES, transforms=tr, macros=macro("    w = T[u]"))
    assert isinstance(err, TransformDomainMismatch)


def test_unassigned_output():
    assert isinstance(one_error(frames=FRAMES, macros=macro("    t = u gp v")), UnassignedOutput)


def test_use_before_assignment():
    assert isinstance(one_error(frames=FRAMES, macros=macro("    w = q gp v")), UnknownName)


def test_self_call_is_cyclic():
    text = macro("    call M {u : u; v : v; w : w}")
    assert isinstance(one_error(frames=FRAMES, macros=text), CyclicMacroCall)


def test_mutual_recursion_is_cyclic():
    text = """
    define macro A as inputs: {u : e3d.Vector} outputs: {w : e3d.Vector} performs:
      call B {u : u; w : w}
    end macro
    define macro B as inputs: {u : e3d.Vector} outputs: {w : e3d.Vector} performs:
      call A {u : u; w : w}
    end macro
    """
    errs = compile_errors(frames=FRAMES, macros=text)
    assert any(isinstance(e, CyclicMacroCall) for e in errs)


CALLEE = """
define macro Inner as
  inputs: {a : e3d.Vector; b : e3d.Vector}
  outputs: {c : e3d.Multivector}
  performs:
    t = a op b
    c = t gp a
end macro
"""


def test_unbound_callee_input():
    text = CALLEE + macro("    call Inner {a : u; c : w}")
    assert isinstance(one_error(frames=FRAMES, macros=text), UnboundCalleeInput)


def test_call_across_frames():
    text = CALLEE + macro("    call Inner {a : u; b : v; c : w}", inputs="u : e2d.Vector; v : e3d.Vector")
    assert isinstance(one_error(frames=FRAMES, macros=text), ClassMismatch)


def rand_vec(rng):
    return dict(zip(["e1", "e2", "e3"], rng.normal(size=3)))


def test_call_with_colliding_temporaries_matches_direct_computation():
    direct = macro("    t = v op u\n    q = t op u\n    x = u op v\n    w = x gp u\n    w = w + q")
    called = CALLEE + macro(
        "    t = v op u\n    q = t op u\n    call Inner {a : u; b : v; c : w}\n    w = w + q"
    )
    pd, pc = project(frames=FRAMES, macros=direct), project(frames=FRAMES, macros=called)
    assert not any(op.kind == "call" for op in pc.macros["M"].ops)
    rng = np.random.default_rng(1)
    for _ in range(20):
        ins = {"u": rand_vec(rng), "v": rand_vec(rng)}
        a = run_named(pd.macros["M"], ins)["w"]
        b = run_named(pc.macros["M"], ins)["w"]
        assert all(np.isclose(a[k], b[k]) for k in a)


def test_nested_calls_flatten():
    text = CALLEE + """
    define macro Middle as
      inputs: {a : e3d.Vector; b : e3d.Vector}
      outputs: {c : e3d.Multivector}
      performs:
        call Inner {a : a; b : b; c : c}
    end macro
    """ + macro("    call Middle {a : u; b : v; c : w}")
    ir = project(frames=FRAMES, macros=text).macros["M"]
    assert {op.kind for op in ir.ops} <= {"cast", "binary", "copy", "join", "const"}
    rng = np.random.default_rng(2)
    ins = {"u": rand_vec(rng), "v": rand_vec(rng)}
    inner = project(frames=FRAMES, macros=CALLEE).macros["Inner"]
    want = run_named(inner, {"a": ins["u"], "b": ins["v"]})["c"]
    got = run_named(ir, ins)["w"]
    assert all(np.isclose(want[k], got[k]) for k in want)


def test_subspace_frame_products_embed():
    text = FRAMES + "define frame pl as basis: {e1; e3} subspace of e3d end frame"
    p = project(frames=text)
    sub, full = p.frames["pl"], p.frames["e3d"]
    lift = {0: 0, 1: 1, 2: 4, 3: 5}
    for kind in ("gp", "op", "lcp", "sp"):
        for a, b in itertools.product(range(4), repeat=2):
            got = {lift[c]: v for c, v in sub.tables[kind][(a, b)]}
            want = dict(full.tables[kind][(lift[a], lift[b])])
            assert got == want


def test_print_and_recompile_keeps_semantics():
    p = load_stdlib()
    again = compile_project(parse_project(print_project(p.ast)))
    rng = np.random.default_rng(3)
    for name, ir in p.macros.items():
        ins = {}
        for n, cls in ir.inputs:
            ins[n] = {cls.frame.blade_name(b): rng.uniform(0.2, 1.0) for b in cls.free_blades}
        a = run_named(ir, ins)
        b = run_named(again.macros[name], ins)
        for out in a:
            for k in a[out]:
                assert np.isclose(a[out][k], b[out][k], equal_nan=True), (name, out, k)
