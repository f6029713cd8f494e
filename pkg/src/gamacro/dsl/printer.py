"""Render AST nodes back to DSL text (re-parses to an equal AST)."""

from __future__ import annotations

from typing import Dict

from . import ast as A


def _pairs(pairs, sep=" : ") -> str:
    return "{" + "; ".join(f"{k}{sep}{v}" for k, v in pairs) + "}"


def _matrix(m) -> str:
    return "{" + ", ".join("{" + ", ".join(r) + "}" for r in m) + "}"


def print_frame(d: A.FrameDecl) -> str:
    lines = [f"define frame {d.name} as", f"    basis: {{{'; '.join(d.basis)}}}"]
    body = {
        "euclidean": lambda: "Euclidean",
        "signature": lambda: "signature = {" + ", ".join(d.signature) + "}",
        "ipm": lambda: f"IPM = {_matrix(d.matrix)}",
        "subspace": lambda: f"subspace of {d.source}",
        "orthogonalize": lambda: f"orthogonalize {d.source}",
        "bcm": lambda: f"transform {d.source} by BCM = {_matrix(d.matrix)}",
    }[d.form]()
    lines += [f"    {body}", "end frame"]
    return "\n".join(lines)


def print_transform(d: A.TransformDecl) -> str:
    body = {
        "identity": lambda: "identity",
        "alias": lambda: f"alias of {d.ref}",
        "inverse": lambda: f"inverse of {d.ref}",
        "transpose": lambda: f"transpose of {d.ref}",
        "inverse_transpose": lambda: f"inverse transpose of {d.ref}",
        "bcm": lambda: f"outermorphism using {d.ref}.BCM",
        "matrix": lambda: f"outermorphism using {_matrix(d.matrix)}",
    }[d.form]()
    return f"define transform {d.name} : {d.source} -> {d.dest} as\n    {body}\nend transform"


def print_subspace(d: A.SubspaceDecl) -> str:
    kw = "basis" if d.form == "basis" else "ga_span"
    return (
        f"define subspace {d.frame}.{d.name} as\n    {kw} {{{'; '.join(d.items)}}}\nend subspace"
    )


def print_class(d: A.ClassDecl) -> str:
    items = list(d.parts) + [f"{b} : {v}" for b, v in d.constants]
    return (
        f"define multivector class {d.frame}.{d.name} as\n    "
        + "".join(f"{it};\n    " for it in items).rstrip()
        + "\nend multivector class"
    )


def print_constant(d: A.ConstantDecl) -> str:
    return (
        f"define constant {d.frame}.{d.name} as\n    multivector {_pairs(d.coeffs)}\nend constant"
    )


def print_binding(d: A.BindingDecl) -> str:
    lines = [f"define binding {d.name} as", f"    use frame {d.frame}", f"    bind {_pairs(d.binds)}"]
    if d.mins:
        lines.append(f"    min {_pairs(d.mins)}")
    if d.maxs:
        lines.append(f"    max {_pairs(d.maxs)}")
    lines.append("end binding")
    return "\n".join(lines)


def print_statement(s: A.Statement) -> str:
    if isinstance(s, A.CtorStmt):
        return f"{s.dst} = {s.frame}.multivector {_pairs(s.coeffs)}"
    if isinstance(s, A.BinaryStmt):
        return f"{s.dst} = {s.lhs} {s.op} {s.rhs}"
    if isinstance(s, A.TransformStmt):
        return f"{s.dst} = {s.transform}[{s.src}]"
    if isinstance(s, A.UnaryStmt):
        if s.op == "copy":
            return f"{s.dst} = {s.src}"
        if s.op == "neg":
            return f"{s.dst} = -{s.src}"
        if s.operand is not None:
            return f"{s.dst} = {s.op}({s.src}, {s.operand})"
        return f"{s.dst} = {s.op}({s.src})"
    if isinstance(s, A.CallStmt):
        return f"call {s.macro} {_pairs(s.bindings)}"
    if isinstance(s, A.OutputStmt):
        return f"output {{{s.text}}}"
    if isinstance(s, A.JoinStmt):
        return "join on" if s.on else "join off"
    raise TypeError(type(s))


def print_macro(d: A.MacroDecl) -> str:
    def mvs(pairs):
        if not pairs:
            return "{}"
        return "{\n" + ";\n".join(f"        {n} as {c}" for n, c in pairs) + "\n    }"

    lines = [
        f"define macro {d.name} as",
        f"    inputs: {mvs(d.inputs)}",
        f"    outputs: {mvs(d.outputs)}",
        "    performs:",
    ]
    lines += [f"        {print_statement(s)};" for s in d.body]
    lines.append("end macro")
    return "\n".join(lines)


_PRINTERS = {
    "frames": print_frame,
    "transforms": print_transform,
    "subspaces": print_subspace,
    "multivectors": print_class,
    "constants": print_constant,
    "bindings": print_binding,
    "macros": print_macro,
}

_FIELDS = {
    "frames": "frames",
    "transforms": "transforms",
    "subspaces": "subspaces",
    "multivectors": "classes",
    "constants": "constants",
    "bindings": "bindings",
    "macros": "macros",
}


def print_project(ast: A.ProjectAst) -> Dict[str, str]:
    """Text for each file role."""
    out = {}
    for role in A.ROLES:
        decls = getattr(ast, _FIELDS[role])
        out[role] = "\n\n".join(_PRINTERS[role](d) for d in decls) + ("\n" if decls else "")
    return out
