"""Well-formedness checks on the simple-type level.

Nothing here raises; every problem becomes a `Violation` in the report.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .ast import (
    ARITH, RET, Assign, AssignCall, AssignCons, BinOp, BoolLit, BoolT, BorrowMut,
    BorrowShared, BoxE, BoxListT, Copy, Drop, Function, If, IntLit, IntT, ListT,
    Match, Move, MutRefT, Nil, Pos, Program, Return, SharedRefT, Tick, Var, is_atom,
)


@dataclass(frozen=True)
class Violation:
    message: str
    pos: Optional[Pos] = None
    fn: str = ""

    def __str__(self) -> str:
        where = f"{self.pos}: " if self.pos else ""
        inside = f"in {self.fn}: " if self.fn else ""
        return f"{where}{inside}{self.message}"


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def messages(self) -> list[str]:
        return [v.message for v in self.violations]


class _Bad(Exception):
    def __init__(self, message: str, pos=None):
        super().__init__(message)
        self.message = message
        self.pos = pos


def _has_shared_of_mut(t) -> bool:
    if isinstance(t, SharedRefT):
        return isinstance(t.inner, MutRefT) or _has_shared_of_mut(t.inner)
    if isinstance(t, MutRefT):
        return _has_shared_of_mut(t.inner)
    return False


class _FnChecker:
    def __init__(self, prog: Program, fn: Function, report: ValidationReport):
        self.prog = prog
        self.fn = fn
        self.report = report
        self.env = {}
        self.sigs = {f.name: f for f in prog.functions}

    def bad(self, message: str, pos=None) -> None:
        self.report.violations.append(Violation(message, pos or self.fn.pos, self.fn.name))

    def run(self) -> None:
        fn = self.fn
        seen = set()
        for d in list(fn.params) + list(fn.locals):
            if d.name == RET:
                self.bad("'ret' is reserved for the return value", d.pos)
            elif d.name in seen:
                self.bad(f"duplicate variable {d.name!r}", d.pos)
            seen.add(d.name)
            if _has_shared_of_mut(d.type):
                self.bad(f"shared borrow of mutable borrow in type of {d.name!r}", d.pos)
        if _has_shared_of_mut(fn.ret_type):
            self.bad("shared borrow of mutable borrow in return type", fn.pos)
        self.env = fn.declared()
        self.block(fn.body, top=True)

    def place(self, p):
        if isinstance(p, Var):
            if p.name not in self.env:
                raise _Bad(f"undeclared variable {p.name!r}", p.pos)
            return self.env[p.name]
        t = self.place(p.base)
        if isinstance(t, BoxListT):
            return ListT()
        if isinstance(t, (SharedRefT, MutRefT)):
            return t.inner
        raise _Bad(f"cannot dereference {p.base} of type {t}", p.pos)

    def expr(self, e):
        if isinstance(e, IntLit):
            return IntT()
        if isinstance(e, BoolLit):
            return BoolT()
        if isinstance(e, Nil):
            return ListT()
        if isinstance(e, BoxE):
            t = self.expr(e.expr)
            if not isinstance(t, ListT):
                raise _Bad(f"box expects a list, got {t}", e.pos)
            return BoxListT()
        if isinstance(e, BinOp):
            for side in (e.left, e.right):
                t = self.expr(side)
                if not isinstance(t, IntT):
                    raise _Bad(f"operator {e.op} expects i32 operands, got {t}", e.pos)
            return IntT() if e.op in ARITH else BoolT()
        if isinstance(e, Copy):
            t = self.place(e.place)
            if not is_atom(t):
                raise _Bad(f"copy of non-atomic type {t}", e.pos)
            return t
        if isinstance(e, Move):
            return self.place(e.place)
        if isinstance(e, BorrowShared):
            t = self.place(e.place)
            if _has_shared_of_mut(SharedRefT(t)):
                raise _Bad("shared borrow of mutable borrow", e.pos)
            return SharedRefT(t)
        if isinstance(e, BorrowMut):
            return MutRefT(self.place(e.place))
        raise _Bad(f"unknown expression {e!r}")

    def block(self, stmts, top: bool = False) -> None:
        for i, s in enumerate(stmts):
            try:
                self.stmt(s, tail=top and i == len(stmts) - 1)
            except _Bad as b:
                self.bad(b.message, b.pos or s.pos)

    def stmt(self, s, tail: bool) -> None:
        if isinstance(s, Tick):
            return
        if isinstance(s, Return):
            if not tail:
                raise _Bad("return is only allowed as the last statement of a function body", s.pos)
            return
        if isinstance(s, Drop):
            self.place(s.place)
            return
        if isinstance(s, Assign):
            t = self.expr(s.expr)
            dest = self.place(s.place)
            if t != dest:
                raise _Bad(f"cannot assign {t} to {s.place} of type {dest}", s.pos)
            return
        if isinstance(s, AssignCons):
            h = self.expr(s.head)
            if not isinstance(h, IntT):
                raise _Bad(f"cons head must be i32, got {h}", s.pos)
            t = self.expr(s.tail)
            if not isinstance(t, BoxListT):
                raise _Bad(f"cons tail must be box list, got {t}", s.pos)
            dest = self.place(s.place)
            if not isinstance(dest, ListT):
                raise _Bad(f"cannot assign list to {s.place} of type {dest}", s.pos)
            return
        if isinstance(s, AssignCall):
            callee = self.sigs.get(s.fn)
            if callee is None:
                raise _Bad(f"unknown function {s.fn!r}", s.pos)
            if len(s.args) != len(callee.params):
                raise _Bad(f"{s.fn} expects {len(callee.params)} arguments, got {len(s.args)}", s.pos)
            for a, prm in zip(s.args, callee.params):
                t = self.expr(a)
                if t != prm.type:
                    raise _Bad(f"argument {prm.name} of {s.fn} expects {prm.type}, got {t}", s.pos)
            dest = self.place(s.place)
            if dest != callee.ret_type:
                raise _Bad(f"{s.fn} returns {callee.ret_type}, cannot assign to {dest}", s.pos)
            return
        if isinstance(s, If):
            t = self.place(s.cond)
            if not isinstance(t, BoolT):
                raise _Bad(f"if condition must be bool, got {t}", s.pos)
            self.block(s.then)
            self.block(s.else_)
            return
        if isinstance(s, Match):
            t = self.place(s.scrutinee)
            if not isinstance(t, ListT):
                raise _Bad(f"match scrutinee must be a list, got {t}", s.pos)
            if s.head == s.tail:
                raise _Bad("match binders must be distinct", s.pos)
            for name, want in ((s.head, IntT()), (s.tail, BoxListT())):
                have = self.env.get(name)
                if have is None:
                    raise _Bad(f"undeclared variable {name!r}", s.pos)
                if have != want:
                    raise _Bad(f"match binder {name!r} must be declared {want}, not {have}", s.pos)
            self.block(s.nil_arm)
            self.block(s.cons_arm)
            return
        raise _Bad(f"unknown statement {s!r}")


def validate(prog: Program) -> ValidationReport:
    report = ValidationReport()
    seen = set()
    for f in prog.functions:
        if f.name in seen:
            report.violations.append(Violation(f"duplicate function {f.name!r}", f.pos, f.name))
        seen.add(f.name)
    for f in prog.functions:
        _FnChecker(prog, f, report).run()
    return report
