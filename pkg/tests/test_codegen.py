import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gamacro.codegen import (
    BEGIN_SENTINEL,
    END_SENTINEL,
    Assignment,
    BindingPoint,
    ClassBind,
    CoefficientBind,
    Dialect,
    ExprSequence,
    emit,
    extract_block,
    generate,
    generate_macro,
    interpret,
    optimize,
    parse_block,
    rename_internal,
    run_text,
    scan_source,
    splice_all,
    verify_block,
)
from gamacro.errors import (
    BladeOutsideClass,
    ConfigError,
    DiagnosticsError,
    MalformedBinding,
    OverlappingRegions,
    UnboundInputCoefficient,
    UnknownMacroName,
    UnmappedFunction,
)
from gamacro.symbolic import Sym, add, cos, eval_numeric, mul, power, sin, sub
from helpers import E3D_FRAME, project

CROSS = dict(
    frames=E3D_FRAME,
    constants="define constant e3d.Ii as multivector {e1^e2^e3 : -1} end constant",
    macros="""
define macro GetNormalToVectors as
  inputs: { u as e3d.Vector; v as e3d.Vector }
  outputs: { w : e3d.Vector }
  performs:
    t1 = u op v
    w = t1 lcp e3d.Ii
end macro
""",
)

REGION = """\
void f() {
    // GMac : GetNormalToVectors
    //GMac.Bind("u.e1", "<u.x>");
    //GMac.Bind("u.e2", "<u.y>");
    //GMac.Bind("u.e3", "<u.z>");
    //GMac.Bind("v.e1", "<v.x>");
    //GMac.Bind("v.e2", "<v.y>");
    //GMac.Bind("v.e3", "<v.z>");
    //GMac.Bind("w.e1", "<wx>");
    //GMac.Bind("w.e2", "<wy>");
    //GMac.Bind("w.e3", "<wz>");
    // GMac end
}
"""

CROSS_BINDS = [
    ("u.e1", "ux"), ("u.e2", "uy"), ("u.e3", "uz"),
    ("v.e1", "vx"), ("v.e2", "vy"), ("v.e3", "vz"),
    ("w.e1", "wx"), ("w.e2", "wy"), ("w.e3", "wz"),
]


@pytest.fixture(scope="module")
def cross():
    return project(**CROSS)


def test_scan_region_with_nine_binds():
    (bp,) = scan_source(REGION)
    assert bp.macro == "GetNormalToVectors"
    assert len(bp.binds) == 9
    assert bp.binds[0] == CoefficientBind("u", "e1", "<u.x>", 3)
    assert bp.indent == "    "
    assert bp.block is None


def test_region_without_binds_warns():
    (bp,) = scan_source("// GMac : M\n// GMac end\n")
    assert bp.binds == []
    assert bp.warnings


def test_assumptions_and_class_binds():
    text = """// GMac : M
// GMac.AssumeMin("<r>", "0")
// GMac.AssumeMax("r", "10")
// GMac.Bind("p", "Vec3", "pt")
// GMac end"""
    (bp,) = scan_source(text)
    assert bp.mins == [("r", "0")]
    assert bp.maxs == [("r", "10")]
    assert bp.binds == [ClassBind("p", "Vec3", "pt", 4)]


def test_csharp_region_markers():
    text = "#region GMac : M\n//GMac.Bind(\"u.e1\", \"a\")\n#endregion\n"
    (bp,) = scan_source(text, "csharp")
    assert bp.macro == "M"
    assert scan_source(text, "c") == []


@pytest.mark.parametrize(
    "text, error",
    [
        ('// GMac : M\n// GMac.Bind("u.e1")\n// GMac end', MalformedBinding),
        ('// GMac : M\n// GMac.Bind("ue1", "x")\n// GMac end', MalformedBinding),
        ('// GMac : M\n// GMac.AssumeMin("x", "abc")\n// GMac end', MalformedBinding),
        ('// GMac : M\n// GMac.Frobnicate("x")\n// GMac end', MalformedBinding),
        ("// GMac : M\n", MalformedBinding),
        ("// GMac end\n", MalformedBinding),
        ("// GMac : M\n// GMac : N\n// GMac end\n", OverlappingRegions),
    ],
)
def test_malformed_regions(text, error):
    with pytest.raises(DiagnosticsError) as ei:
        scan_source(text)
    assert any(isinstance(e, error) for e in ei.value.errors)
    assert all(e.span.line >= 1 for e in ei.value.errors)


def test_cross_product_is_three_outputs_without_temporaries(cross):
    g = generate_macro(cross, "GetNormalToVectors", CROSS_BINDS)
    assert len(g.sequence) == 3
    assert g.sequence.temporaries == []
    assert [a.name for a in g.sequence.outputs] == ["wx", "wy", "wz"]
    env = dict(zip(["ux", "uy", "uz", "vx", "vy", "vz"], np.random.default_rng(0).normal(size=(6, 50))))
    got = run_text(g.text, env)
    u = np.array([env["ux"], env["uy"], env["uz"]])
    v = np.array([env["vx"], env["vy"], env["vz"]])
    want = np.cross(u.T, v.T).T
    assert np.allclose([got["wx"], got["wy"], got["wz"]], want, rtol=1e-12, atol=0)


def test_dialect_text(cross):
    g = generate_macro(cross, "GetNormalToVectors", CROSS_BINDS, dialect="csharp")
    lines = g.text.splitlines()
    assert all(ln.endswith(";") for ln in lines)
    assert lines[0].startswith("wx = ")


def test_c_like_temporaries_are_declared():
    p = project(
        frames=E3D_FRAME,
        macros="""
define macro Sq as
  inputs: { u : e3d.Vector }
  outputs: { s : e3d.Scalar }
  performs:
    n = norm2(u)
    t = u gp u
    q = t gp t
    s = q
end macro
""",
    )
    g = generate_macro(p, "Sq", [("u.e1", "a"), ("u.e2", "b"), ("u.e3", "c"), ("s.1", "out")], dialect="c")
    temps = [ln for ln in g.text.splitlines() if not ln.startswith("out")]
    assert temps and all(ln.startswith("double var") for ln in temps)
    assert "%" not in g.text


def test_function_names_follow_dialect():
    p = project(
        frames=E3D_FRAME,
        macros="""
define macro R as
  inputs: { u : e3d.Vector }
  outputs: { s : e3d.Vector }
  performs:
    s = e3d.multivector {e1 : sin(u.e1); e2 : sqrt(u.e2); e3 : ln(u.e3)}
end macro
""",
    )
    binds = [("u.e1", "a"), ("u.e2", "b"), ("u.e3", "c"), ("s.e1", "x"), ("s.e2", "y"), ("s.e3", "z")]
    assert "Math.Sin(a)" in generate_macro(p, "R", binds, dialect="csharp").text
    assert "log(c)" in generate_macro(p, "R", binds, dialect="c").text
    odd = Dialect("odd", True, {"sin": "sn"}, declare="double ", terminator=";")
    with pytest.raises(UnmappedFunction):
        generate_macro(p, "R", binds, dialect=odd)
    with pytest.raises(ConfigError):
        odd.with_functions({"frob": "f"})


def test_unknown_macro(cross):
    with pytest.raises(UnknownMacroName):
        generate_macro(cross, "Nope", [])


def test_strict_requires_all_inputs(cross):
    binds = CROSS_BINDS[:5] + CROSS_BINDS[6:]
    g = generate_macro(cross, "GetNormalToVectors", binds)
    env = {"ux": 1.0, "uy": 2.0, "uz": 3.0, "vx": 4.0, "vy": 5.0}
    got = run_text(g.text, env)
    assert got["wx"] == pytest.approx(2.0 * 0 - 3.0 * 5.0)
    with pytest.raises(UnboundInputCoefficient):
        generate_macro(cross, "GetNormalToVectors", binds, strict=True)


def test_strict_rejects_dropped_blades():
    p = project(
        frames=E3D_FRAME,
        macros="""
define macro G as
  inputs: { u : e3d.Vector; v : e3d.Vector }
  outputs: { w : e3d.Vector }
  performs:
    w = u gp v
end macro
""",
    )
    binds = [("u.e1", "a"), ("u.e2", "b"), ("u.e3", "e"), ("v.e1", "c"), ("v.e2", "d"), ("v.e3", "f"), ("w.e1", "x")]
    g = generate_macro(p, "G", binds)
    assert any("dropped" in w for w in g.evaluation.warnings)
    with pytest.raises(BladeOutsideClass):
        generate_macro(p, "G", binds, strict=True)


def test_bind_to_blade_outside_class(cross):
    with pytest.raises(BladeOutsideClass):
        generate_macro(cross, "GetNormalToVectors", [("u.e1^e2", "a")])


def test_emit_zeros_declares_unbound_outputs(cross):
    binds = [b for b in CROSS_BINDS if not b[0].startswith("w")]
    assert generate_macro(cross, "GetNormalToVectors", binds).sequence.outputs == []
    g = generate_macro(cross, "GetNormalToVectors", binds, emit_zeros=True)
    assert [a.name for a in g.sequence.outputs] == ["w_e1", "w_e2", "w_e3"]


def test_output_aliasing_an_input_is_hazard_free(cross):
    binds = [
        ("u.e1", "a"), ("u.e2", "b"), ("u.e3", "c"),
        ("v.e1", "d"), ("v.e2", "e"), ("v.e3", "f"),
        ("w.e1", "a"), ("w.e2", "b"), ("w.e3", "c"),
    ]
    g = generate_macro(cross, "GetNormalToVectors", binds)
    g.sequence.validate()
    u, v = np.array([1.0, 2.0, 3.0]), np.array([-2.0, 0.5, 4.0])
    env = dict(zip("abcdef", list(u) + list(v)))
    state = dict(env)
    for it in g.sequence.assignments():  # in-place semantics of the target language
        state[it.name] = eval_numeric(it.expr, state)
    assert np.allclose([state["a"], state["b"], state["c"]], np.cross(u, v))


def test_splice_is_idempotent(cross):
    (bp,) = scan_source(REGION)
    g = generate(cross, bp, dialect="csharp")
    once = splice_all(REGION, [(bp, g.text)])
    assert BEGIN_SENTINEL in once and END_SENTINEL in once
    (bp2,) = scan_source(once)
    assert bp2.block is not None
    twice = splice_all(once, [(bp2, generate(cross, bp2, dialect="csharp").text)])
    assert twice == once
    assert once.replace("\n", "").count("GMac.Bind") == 9
    block = extract_block(once, bp2)
    assert "wx = " in block
    assert verify_block(cross, bp2, block, "csharp", samples=200).ok


def test_verify_detects_wrong_code(cross):
    (bp,) = scan_source(REGION)
    text = splice_all(REGION, [(bp, "wx = u.y*v.z - u.z*v.y;\nwy = 0;\nwz = u.x*v.y - u.y*v.x;")])
    (bp,) = scan_source(text)
    rep = verify_block(cross, bp, extract_block(text, bp), "csharp", samples=50)
    assert not rep.ok
    assert any("wy" in f for f in rep.failures)


def test_verbatim_output_statement():
    p = project(
        frames=E3D_FRAME,
        macros="""
define macro Out as
  inputs: { u : e3d.Vector }
  outputs: { w : e3d.Vector }
  performs:
    w = u + u
    output {print(<w.e1>);}
end macro
""",
    )
    g = generate_macro(p, "Out", [("u.e1", "a"), ("w.e1", "x")])
    assert "print(" in g.text
    assert "<w.e1>" not in g.text


def test_class_binding_substitutes_object():
    p = project(
        frames=E3D_FRAME,
        bindings="define binding V as use frame e3d bind {e1 : <#.x>; e2 : <#.y>; e3 : <#.z>} end binding",
        macros=CROSS["macros"],
        constants=CROSS["constants"],
    )
    bp = BindingPoint(
        "GetNormalToVectors",
        [ClassBind("u", "V", "a"), ClassBind("v", "V", "b"), ClassBind("w", "V", "n")],
    )
    text = generate(p, bp).text
    assert "n.x = a.y*b.z - a.z*b.y" in text


def test_generation_is_deterministic(cross):
    a = generate_macro(cross, "GetNormalToVectors", CROSS_BINDS).text
    b = generate_macro(cross, "GetNormalToVectors", CROSS_BINDS).text
    assert a == b


def test_parse_block_round_trip(cross):
    g = generate_macro(cross, "GetNormalToVectors", CROSS_BINDS, dialect="csharp")
    seq = parse_block(g.text, "csharp")
    assert [a.name for a in seq.assignments()] == ["wx", "wy", "wz"]
    assert emit(seq, "csharp") == g.text


# ---------------------------------------------------------------------------
# optimizer properties on random straight-line sequences
# ---------------------------------------------------------------------------

INPUTS = [Sym(n) for n in ("a", "b", "c")]


@st.composite
def sequences(draw):
    pool = list(INPUTS)
    items = []
    n = draw(st.integers(1, 8))
    for k in range(n):
        x, y, z = (draw(st.sampled_from(pool)) for _ in range(3))
        shape = draw(st.integers(0, 5))
        e = [
            add(mul(x, y), mul(x, z)),
            mul(add(x, y), add(x, y)),
            sub(mul(x, y, z), mul(z, y)),
            add(sin(x), power(cos(y), 2)),
            mul(2, add(x, y), z),
            add(mul(x, y), mul(y, x), z),
        ][shape]
        name = f"%t{k}"
        items.append(Assignment(name, e, "temp"))
        pool.append(Sym(name))
    for k in range(draw(st.integers(1, 3))):
        items.append(Assignment(f"o{k}", draw(st.sampled_from(pool[3:])), "output"))
    return ExprSequence(items)


envs = st.fixed_dictionaries({n: st.floats(-2, 2) for n in "abc"})


@given(sequences(), envs)
def test_optimizer_preserves_outputs(seq, env):
    opt = optimize(seq)
    opt.validate()
    want = interpret(seq, env)
    got = interpret(opt, env)
    for a in seq.outputs:
        assert got[a.name] == pytest.approx(want[a.name], rel=1e-12, abs=1e-12)


@given(sequences())
def test_optimizer_never_adds_operations(seq):
    assert optimize(seq).op_count() <= seq.op_count()


@given(sequences())
def test_renaming_removes_internal_names(seq):
    out = rename_internal(optimize(seq))
    assert not any(a.name.startswith("%") for a in out.assignments())
    assert [a.name for a in out.outputs] == [a.name for a in seq.outputs]
