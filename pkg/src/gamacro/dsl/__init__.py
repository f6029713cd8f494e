"""Parser, AST and printer for the macro description language."""

from . import ast
from .parser import parse_project, parse_statement, parse_text
from .printer import print_project, print_statement

FILE_NAMES = {role: f"{role}.gmac" for role in ast.ROLES}


def read_project(directory):
    """Parse the role files found in ``directory``; absent roles are empty."""
    from pathlib import Path

    d = Path(directory)
    files, names = {}, {}
    for role, fname in FILE_NAMES.items():
        path = d / fname
        if path.is_file():
            files[role] = path.read_text(encoding="utf-8")
            names[role] = str(path)
    return parse_project(files, names)

__all__ = ["ast", "parse_project", "parse_statement", "parse_text", "print_project", "print_statement", "FILE_NAMES", "read_project"]
