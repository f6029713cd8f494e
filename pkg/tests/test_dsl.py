import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gamacro.dsl import ast as A
from gamacro.dsl import parse_project, parse_statement, parse_text, print_project, read_project
from gamacro.errors import (
    DiagnosticsError,
    DSLSyntaxError,
    DuplicateName,
    GAMacroError,
    MalformedOutputBlock,
    UnknownDefinitionForm,
    UnknownOperator,
)
from gamacro.stdlib import PACK_DIR

CROSS = """
define macro GetNormalToVectors as
  inputs: { u as e3d.Multivector; v as e3d.Multivector }
  outputs: { w as e3d.Multivector }
  performs:
    t1 = u op v
    w = t1 lcp e3d.Ii
end macro
"""


def single_error(excinfo):
    errs = excinfo.value.errors
    assert len(errs) == 1
    return errs[0]


def test_euclidean_frame():
    ast = parse_text("define frame e3d as basis: {e1; e2; e3} euclidean end frame")
    (f,) = ast.frames
    assert f == A.FrameDecl("e3d", ("e1", "e2", "e3"), "euclidean")
    assert f.span.line == 1


def test_frame_forms():
    text = """
    define frame a as basis: {x; y} signature = {1, -1} end frame
    define frame b as basis: {x; y} IPM = {{0, -1}, {-1, 0}} end frame
    define frame c as basis: {x} subspace of a end frame
    define frame d as basis: {p; q} orthogonalize b end frame
    define frame g as basis: {u; v} transform a by BCM = {{1, 1}, {0, 1}} end frame
    """
    forms = [f.form for f in parse_text(text).frames]
    assert forms == ["signature", "ipm", "subspace", "orthogonalize", "bcm"]


def test_cross_product_macro_has_two_binary_statements():
    (m,) = parse_text(CROSS).macros
    assert m.inputs == (("u", "e3d.Multivector"), ("v", "e3d.Multivector"))
    assert m.body == (
        A.BinaryStmt("t1", "op", "u", "v"),
        A.BinaryStmt("w", "lcp", "t1", "e3d.Ii"),
    )


def test_colon_and_as_separators_are_equivalent():
    a = parse_text(CROSS).macros[0]
    b = parse_text(CROSS.replace(" as e3d", " : e3d")).macros[0]
    assert a == b


def test_constant_with_blade_coefficient():
    (c,) = parse_text("define constant e3d.I as multivector {e1^e2^e3 : 1} end constant").constants
    assert (c.frame, c.name, c.coeffs) == ("e3d", "I", (("e1^e2^e3", "1"),))


@pytest.mark.parametrize(
    "text, node",
    [
        ("w = t1 lcp e3d.Ii", A.BinaryStmt("w", "lcp", "t1", "e3d.Ii")),
        ("w = a + b", A.BinaryStmt("w", "+", "a", "b")),
        ("w = -a", A.UnaryStmt("w", "neg", "a")),
        ("w = a", A.UnaryStmt("w", "copy", "a")),
        ("w = reverse(a)", A.UnaryStmt("w", "reverse", "a")),
        ("w = scale(a, 2*x)", A.UnaryStmt("w", "scale", "a", "2*x")),
        ("w = cast_to_grades(a, {0;2})", A.UnaryStmt("w", "cast_to_grades", "a", "{0; 2}")),
        ("w = rot[a]", A.TransformStmt("w", "rot", "a")),
        ("w = e3d.multivector {e1 : x; e2 : 1}", A.CtorStmt("w", "e3d", (("e1", "x"), ("e2", "1")))),
        ("call Foo {a : b; c : d}", A.CallStmt("Foo", (("a", "b"), ("c", "d")))),
        ("join on", A.JoinStmt(True)),
        ("join off", A.JoinStmt(False)),
        (
            "output {//This line is generated by GMac}",
            A.OutputStmt("//This line is generated by GMac"),
        ),
    ],
)
def test_statement_kinds(text, node):
    assert parse_statement(text) == node


def test_unknown_operator():
    with pytest.raises((UnknownOperator, DiagnosticsError)) as ei:
        parse_statement("w = a xp b")
    err = ei.value.errors[0] if isinstance(ei.value, DiagnosticsError) else ei.value
    assert isinstance(err, UnknownOperator)
    assert err.span is not None


def test_unbalanced_output_block():
    with pytest.raises((MalformedOutputBlock, DiagnosticsError)) as ei:
        parse_statement("output { x = {1 }")
    err = ei.value.errors[0] if isinstance(ei.value, DiagnosticsError) else ei.value
    assert isinstance(err, MalformedOutputBlock)


def test_unknown_definition_form():
    with pytest.raises(DiagnosticsError) as ei:
        parse_text("define frame f as basis: {a} hyperbolic end frame")
    err = single_error(ei)
    assert isinstance(err, UnknownDefinitionForm)
    assert (err.span.line, err.span.col) > (0, 0)


def test_duplicate_names():
    text = "define frame f as basis: {a} euclidean end frame\n" * 2
    with pytest.raises(DiagnosticsError) as ei:
        parse_project({"frames": text})
    assert isinstance(single_error(ei), DuplicateName)


def test_declaration_in_wrong_file():
    with pytest.raises(DiagnosticsError) as ei:
        parse_project({"macros": "define frame f as basis: {a} euclidean end frame"})
    assert isinstance(single_error(ei), UnknownDefinitionForm)


def test_errors_are_aggregated_and_parsing_recovers():
    text = """
    define frame f as basis: {a} nonsense end frame
    define frame g as basis: {a} euclidean end frame
    define frame h as basis {a} euclidean end frame
    """
    with pytest.raises(DiagnosticsError) as ei:
        parse_text(text)
    assert len(ei.value.errors) == 2
    assert [e.span.line for e in ei.value.errors] == [2, 4]


def test_syntax_error_reports_position():
    with pytest.raises(DiagnosticsError) as ei:
        parse_text("define frame f as basis: {a;} euclidean end")
    err = single_error(ei)
    assert isinstance(err, GAMacroError)
    assert err.span.file == "<input>"


def test_stdlib_round_trips_through_printer():
    ast = read_project(PACK_DIR)
    assert len(ast.macros) > 40
    again = parse_project(print_project(ast))
    assert again == ast


def test_printed_text_is_stable():
    ast = read_project(PACK_DIR)
    once = print_project(ast)
    assert print_project(parse_project(once)) == once


@settings(max_examples=200)
@given(st.text(max_size=200))
def test_arbitrary_text_never_crashes(text):
    try:
        parse_text(text)
    except GAMacroError as e:
        errs = e.errors if isinstance(e, DiagnosticsError) else [e]
        assert all(x.span is not None for x in errs)


keywords = st.sampled_from(
    ["define", "frame", "macro", "as", "basis", ":", "{", "}", ";", "e1", "euclidean",
     "end", "inputs", "outputs", "performs", "=", "gp", "x", "output", "(", ")", "call"]
)


@settings(max_examples=200)
@given(st.lists(keywords, max_size=40))
def test_token_soup_never_crashes(tokens):
    try:
        parse_text(" ".join(tokens))
    except GAMacroError:
        pass


def test_statement_syntax_error_type():
    with pytest.raises(GAMacroError) as ei:
        parse_statement("= a b")
    errs = ei.value.errors if isinstance(ei.value, DiagnosticsError) else [ei.value]
    assert isinstance(errs[0], DSLSyntaxError)
