from .ast import *  # noqa: F401,F403  (re-export the node classes)
from .ast import Pos, Program, RET
from .callgraph import call_edges, call_graph_sccs
from .parser import ParseError, parse_program, tokenize
from .printer import print_expr, print_function, print_program
from .validate import ValidationReport, Violation, validate

__all__ = [
    "Pos", "Program", "RET", "ParseError", "parse_program", "tokenize", "print_expr",
    "print_function", "print_program", "validate", "ValidationReport", "Violation",
    "call_graph_sccs", "call_edges",
]
