"""Big-step interpreter with cost counting.

Values live in a flat store keyed by variable name.  Each call gets its own
frame, and a frame's variables are stored under qualified names
`name@frame`, so borrows created in one frame keep pointing at the right
slot while deeper frames run.  Borrows carry their origin place and a cached
copy of the value; writes through a borrow update the origin and refresh the
cache on the way back.
"""
from __future__ import annotations

import builtins
import sys
from dataclasses import dataclass
from typing import Callable, Optional, Union

from .syntax.ast import (
    RET, Assign, AssignCall, AssignCons, BinOp, BoolLit, BorrowMut, BorrowShared, BoxE,
    Copy, Deref, Drop, Function, If, IntLit, Match, Move, Nil, Program, Return, Tick,
    UnitT, Var,
)

DEFAULT_FUEL = 10_000_000
MAX_BORROW_DEPTH = 1024
MAX_CALL_DEPTH = 1000
INT_MIN, INT_MAX = -(2 ** 63), 2 ** 63 - 1

if sys.getrecursionlimit() < 20_000:
    sys.setrecursionlimit(20_000)


# values

class _Undef:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "⊥"


UNDEF = _Undef()


@dataclass(frozen=True)
class IntV:
    value: int


@dataclass(frozen=True)
class BoolV:
    value: bool


@dataclass(frozen=True)
class UnitV:
    pass


@dataclass(frozen=True)
class NilV:
    pass


@dataclass(frozen=True, repr=False)
class ConsV:
    head: "Value"
    tail: "Value"        # BoxV holding the rest

    def __repr__(self) -> str:
        return show_value(self)


@dataclass(frozen=True, repr=False)
class BoxV:
    inner: "Value"

    def __repr__(self) -> str:
        return show_value(self)


@dataclass(frozen=True, repr=False)
class Borrow:
    origin: object       # a Place over qualified names
    payload: "Value"

    def __repr__(self) -> str:
        return show_value(self)


Value = Union[_Undef, IntV, BoolV, UnitV, NilV, ConsV, BoxV, Borrow]
Store = dict


def make_list(xs) -> Value:
    out: Value = NilV()
    for x in reversed(list(xs)):
        out = ConsV(IntV(x), BoxV(out))
    return out


def list_elements(v: Value) -> list:
    """Python list of the heads of a list value (stops at ⊥)."""
    out = []
    while isinstance(v, ConsV):
        out.append(v.head.value if isinstance(v.head, IntV) else v.head)
        v = v.tail.inner if isinstance(v.tail, BoxV) else UNDEF
    return out


def show_value(v: Value) -> str:
    if v is UNDEF:
        return "⊥"
    if isinstance(v, IntV):
        return str(v.value)
    if isinstance(v, BoolV):
        return "true" if v.value else "false"
    if isinstance(v, UnitV):
        return "()"
    if isinstance(v, (NilV, ConsV)):
        items = []
        while isinstance(v, ConsV):
            items.append(show_value(v.head))
            v = v.tail.inner if isinstance(v.tail, BoxV) else v.tail
        tail = "" if isinstance(v, NilV) else " | " + show_value(v)
        return "[" + ", ".join(items) + tail + "]"
    if isinstance(v, BoxV):
        return f"box({show_value(v.inner)})"
    if isinstance(v, Borrow):
        return f"&{show_value(v.payload)}"
    return repr(v)


# errors

class RuntimeFault(Exception):
    pass


class UndefRead(RuntimeFault):
    pass


class ShapeError(RuntimeFault):
    pass


class OverflowError(RuntimeFault, builtins.OverflowError):  # noqa: A001
    pass


class FuelExhausted(RuntimeFault):
    pass


class DepthExceeded(RuntimeFault):
    pass


# store access

def _read(V: Store, p, depth: int = 0) -> Value:
    if depth > MAX_BORROW_DEPTH:
        raise DepthExceeded(f"place nesting exceeds {MAX_BORROW_DEPTH}")
    if isinstance(p, Var):
        if p.name not in V:
            raise UndefRead(f"unbound variable {p.name}")
        return V[p.name]
    base = _read(V, p.base, depth + 1)
    if isinstance(base, BoxV):
        return base.inner
    if isinstance(base, Borrow):
        return base.payload
    if base is UNDEF:
        raise UndefRead(f"dereference of undefined {p.base}")
    raise ShapeError(f"cannot dereference {p.base} holding {show_value(base)}")


def _write(V: Store, p, v: Value, depth: int = 0) -> None:
    if depth > MAX_BORROW_DEPTH:
        raise DepthExceeded(f"borrow chain exceeds {MAX_BORROW_DEPTH}")
    if isinstance(p, Var):
        V[p.name] = v
        return
    base = _read(V, p.base)
    if isinstance(base, BoxV):
        _write(V, p.base, BoxV(v), depth + 1)
        return
    if isinstance(base, Borrow):
        _write(V, base.origin, v, depth + 1)
        _write(V, p.base, Borrow(base.origin, v), depth + 1)
        return
    if base is UNDEF:
        raise UndefRead(f"write through undefined {p.base}")
    raise ShapeError(f"cannot write through {p.base} holding {show_value(base)}")


def store_read(V: Store, p) -> Value:
    return _read(V, p)


def store_write(V: Store, p, v: Value) -> Store:
    out = dict(V)
    _write(out, p, v)
    return out


def qualified_name(name: str, frame: Optional[int]) -> str:
    return name if frame is None else f"{name}@{frame}"


def qualify(p, frame: Optional[int]):
    """Rename the root of a place into a frame; `None` leaves it as is."""
    if frame is None:
        return p
    if isinstance(p, Var):
        return Var(qualified_name(p.name, frame))
    return Deref(qualify(p.base, frame))


def _check_int(n: int) -> IntV:
    if n < INT_MIN or n > INT_MAX:
        raise OverflowError(f"integer overflow: {n}")
    return IntV(n)


# evaluation

def eval_expr(V: Store, e, frame: Optional[int] = None) -> Value:
    """Evaluate an expression; places are qualified with `frame` when given."""
    if isinstance(e, IntLit):
        return _check_int(e.value)
    if isinstance(e, BoolLit):
        return BoolV(e.value)
    if isinstance(e, Nil):
        return NilV()
    if isinstance(e, BoxE):
        return BoxV(eval_expr(V, e.expr, frame))
    if isinstance(e, BinOp):
        a = eval_expr(V, e.left, frame)
        b = eval_expr(V, e.right, frame)
        for x in (a, b):
            if x is UNDEF:
                raise UndefRead(f"operand of {e.op} is undefined")
            if not isinstance(x, IntV):
                raise ShapeError(f"operand of {e.op} is not an integer: {show_value(x)}")
        x, y = a.value, b.value
        if e.op == "+":
            return _check_int(x + y)
        if e.op == "-":
            return _check_int(x - y)
        if e.op == "*":
            return _check_int(x * y)
        if e.op == "<":
            return BoolV(x < y)
        if e.op == "<=":
            return BoolV(x <= y)
        if e.op == "==":
            return BoolV(x == y)
        raise ShapeError(f"unknown operator {e.op}")
    if isinstance(e, (Copy, Move)):
        return _read(V, qualify(e.place, frame))
    if isinstance(e, (BorrowShared, BorrowMut)):
        p = qualify(e.place, frame)
        return Borrow(p, _read(V, p))
    raise ShapeError(f"unknown expression {e!r}")


@dataclass
class TraceEvent:
    depth: int
    fn: str
    stmt: object
    cost: int


@dataclass
class RunResult:
    value: Value
    cost: int
    store: Store
    steps: int


class Interpreter:
    def __init__(self, prog: Program, fuel: int = DEFAULT_FUEL,
                 trace: Optional[Callable[[TraceEvent], None]] = None,
                 max_call_depth: int = MAX_CALL_DEPTH):
        self.fns = {f.name: f for f in prog.functions}
        self.fuel = fuel
        self.trace = trace
        self.max_call_depth = max_call_depth
        self.steps = 0
        self.depth = 0
        self._next_frame = 1
        self._cost = 0

    # frames

    def enter(self, fn: Function, args: list, V: Store) -> int:
        """Bind arguments in a fresh frame; locals and ret start undefined."""
        if len(args) != len(fn.params):
            raise ShapeError(f"{fn.name} expects {len(fn.params)} arguments, got {len(args)}")
        frame = self._next_frame
        self._next_frame += 1
        for prm, v in zip(fn.params, args):
            V[f"{prm.name}@{frame}"] = v
        for d in fn.locals:
            V[f"{d.name}@{frame}"] = UNDEF
        V[f"{RET}@{frame}"] = UNDEF
        return frame

    def leave(self, fn: Function, frame: int, V: Store) -> Value:
        """Read the result and discard the frame's slots."""
        v = V[f"{RET}@{frame}"]
        if isinstance(fn.ret_type, UnitT):
            v = UnitV()
        for name in [p.name for p in fn.params] + [d.name for d in fn.locals] + [RET]:
            V.pop(f"{name}@{frame}", None)
        return v

    def exec_body(self, fn: Function, frame: int, V: Store) -> int:
        return self.exec_block(fn, fn.body, frame, V)

    # statements

    def exec_block(self, fn: Function, stmts, frame: Optional[int], V: Store) -> int:
        cost = 0
        for s in stmts:
            cost += self.exec_stmt(fn, s, frame, V)
        return cost

    def exec_stmt(self, fn: Function, s, frame: Optional[int], V: Store) -> int:
        self.steps += 1
        if self.steps > self.fuel:
            raise FuelExhausted(f"fuel exhausted after {self.fuel} steps")
        if self.trace is not None:
            self.trace(TraceEvent(self.depth, fn.name, s, self._cost))
        q = lambda p: qualify(p, frame)  # noqa: E731
        if isinstance(s, Tick):
            self._cost += s.amount
            return s.amount
        if isinstance(s, (Return, Drop)):
            return 0
        if isinstance(s, Assign):
            _write(V, q(s.place), eval_expr(V, s.expr, frame))
            return 0
        if isinstance(s, AssignCons):
            h = eval_expr(V, s.head, frame)
            t = eval_expr(V, s.tail, frame)
            _write(V, q(s.place), ConsV(h, t))
            return 0
        if isinstance(s, If):
            c = _read(V, q(s.cond))
            if c is UNDEF:
                raise UndefRead(f"if condition {s.cond} is undefined")
            if not isinstance(c, BoolV):
                raise ShapeError(f"if condition {s.cond} is not a bool")
            return self.exec_block(fn, s.then if c.value else s.else_, frame, V)
        if isinstance(s, Match):
            p = q(s.scrutinee)
            v = _read(V, p)
            if isinstance(v, NilV):
                return self.exec_block(fn, s.nil_arm, frame, V)
            if not isinstance(v, ConsV):
                if v is UNDEF:
                    raise UndefRead(f"match on undefined {s.scrutinee}")
                raise ShapeError(f"match on non-list {s.scrutinee}")
            hd = Var(qualified_name(s.head, frame))
            tl = Var(qualified_name(s.tail, frame))
            _write(V, p, UNDEF)
            _write(V, hd, v.head)
            _write(V, tl, v.tail)
            cost = self.exec_block(fn, s.cons_arm, frame, V)
            h2, t2 = _read(V, hd), _read(V, tl)
            _write(V, hd, UNDEF)
            _write(V, tl, UNDEF)
            _write(V, p, ConsV(h2, t2))
            return cost
        if isinstance(s, AssignCall):
            callee = self.fns.get(s.fn)
            if callee is None:
                raise ShapeError(f"unknown function {s.fn}")
            args = [eval_expr(V, a, frame) for a in s.args]
            v, cost = self.call(callee, args, V)
            _write(V, q(s.place), v)
            return cost
        raise ShapeError(f"unknown statement {s!r}")

    def call(self, fn: Function, args: list, V: Store):
        if self.depth >= self.max_call_depth:
            raise FuelExhausted(f"fuel exhausted: call depth exceeds {self.max_call_depth}")
        frame = self.enter(fn, args, V)
        self.depth += 1
        try:
            cost = self.exec_body(fn, frame, V)
        finally:
            self.depth -= 1
        return self.leave(fn, frame, V), cost


def run_function(prog: Program, name: str, args: list, *, fuel: int = DEFAULT_FUEL,
                 store: Optional[Store] = None,
                 trace: Optional[Callable[[TraceEvent], None]] = None) -> RunResult:
    """Call `name` on `args`.  `store` holds whatever the arguments borrow from."""
    interp = Interpreter(prog, fuel=fuel, trace=trace)
    V = dict(store or {})
    fn = prog.function(name)
    value, cost = interp.call(fn, list(args), V)
    return RunResult(value, cost, V, interp.steps)


def exec_stmt(V: Store, s, prog: Optional[Program] = None, fuel: int = DEFAULT_FUEL):
    """Run one statement over unqualified names; returns (cost, new store)."""
    interp = Interpreter(prog or Program(()), fuel=fuel)
    out = dict(V)
    fn = Function("<top>", (), (), UnitT(), (s,))
    cost = interp.exec_stmt(fn, s, None, out)
    return cost, out
