from __future__ import annotations

from .ast import (
    Assign, AssignCall, AssignCons, BinOp, BoolLit, BorrowMut, BorrowShared, BoxE, Copy,
    Drop, Function, If, IntLit, Match, Move, Nil, Program, Return, Tick,
)
from .parser import _PREC


def print_expr(e) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Nil):
        return "nil"
    if isinstance(e, BoxE):
        return f"box({print_expr(e.expr)})"
    if isinstance(e, Copy):
        return f"copy {e.place}"
    if isinstance(e, Move):
        return f"move {e.place}"
    if isinstance(e, BorrowShared):
        return f"&{e.place}"
    if isinstance(e, BorrowMut):
        return f"&mut {e.place}"
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        left = print_expr(e.left)
        if isinstance(e.left, BinOp) and _PREC[e.left.op] < p:
            left = f"({left})"
        right = print_expr(e.right)
        if isinstance(e.right, BinOp) and _PREC[e.right.op] <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression: {e!r}")


def _block(stmts, indent: int) -> list[str]:
    out = []
    for s in stmts:
        lines = _stmt(s, indent)
        lines[-1] += ";"
        out.extend(lines)
    return out


def _stmt(s, indent: int) -> list[str]:
    pad = "    " * indent
    if isinstance(s, Tick):
        return [f"{pad}tick({s.amount})"]
    if isinstance(s, Return):
        return [f"{pad}return"]
    if isinstance(s, Drop):
        return [f"{pad}drop {s.place}"]
    if isinstance(s, Assign):
        return [f"{pad}{s.place} := {print_expr(s.expr)}"]
    if isinstance(s, AssignCons):
        return [f"{pad}{s.place} := cons({print_expr(s.head)}, {print_expr(s.tail)})"]
    if isinstance(s, AssignCall):
        args = ", ".join(print_expr(a) for a in s.args)
        return [f"{pad}{s.place} := {s.fn}({args})"]
    if isinstance(s, If):
        return ([f"{pad}if {s.cond} {{"] + _block(s.then, indent + 1)
                + [f"{pad}}} else {{"] + _block(s.else_, indent + 1) + [f"{pad}}}"])
    if isinstance(s, Match):
        return ([f"{pad}match {s.scrutinee} {{", f"{pad}    nil => {{"]
                + _block(s.nil_arm, indent + 2)
                + [f"{pad}    }},", f"{pad}    cons({s.head}, {s.tail}) => {{"]
                + _block(s.cons_arm, indent + 2)
                + [f"{pad}    }}", f"{pad}}}"])
    raise TypeError(f"not a statement: {s!r}")


def print_function(f: Function) -> str:
    params = ", ".join(f"{p.name}: {p.type}" for p in f.params)
    lines = [f"fn {f.name}({params}) -> {f.ret_type} {{"]
    for d in f.locals:
        lines.append(f"    let {d.name}: {d.type};")
    lines.extend(_block(f.body, 1))
    lines.append("}")
    return "\n".join(lines)


def print_program(p: Program) -> str:
    return "\n\n".join(print_function(f) for f in p.functions) + ("\n" if p.functions else "")
