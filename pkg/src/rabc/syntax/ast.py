from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


def _pos() -> Optional[Pos]:
    return field(default=None, compare=False, repr=False)


# simple types

@dataclass(frozen=True)
class IntT:
    def __str__(self) -> str:
        return "i32"


@dataclass(frozen=True)
class BoolT:
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class UnitT:
    def __str__(self) -> str:
        return "unit"


@dataclass(frozen=True)
class ListT:
    def __str__(self) -> str:
        return "list"


@dataclass(frozen=True)
class BoxListT:
    def __str__(self) -> str:
        return "box list"


@dataclass(frozen=True)
class SharedRefT:
    inner: "SimpleType"

    def __str__(self) -> str:
        return f"&{self.inner}"


@dataclass(frozen=True)
class MutRefT:
    inner: "SimpleType"

    def __str__(self) -> str:
        return f"&mut {self.inner}"


SimpleType = Union[IntT, BoolT, UnitT, ListT, BoxListT, SharedRefT, MutRefT]
ATOMS = (IntT, BoolT, UnitT)


def is_atom(t: SimpleType) -> bool:
    return isinstance(t, ATOMS)


def contains_list(t: SimpleType) -> bool:
    if isinstance(t, (ListT, BoxListT)):
        return True
    if isinstance(t, (SharedRefT, MutRefT)):
        return contains_list(t.inner)
    return False


# places

@dataclass(frozen=True)
class Var:
    name: str
    pos: Optional[Pos] = _pos()

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Deref:
    base: "Place"
    pos: Optional[Pos] = _pos()

    def __str__(self) -> str:
        return f"*{self.base}"


Place = Union[Var, Deref]


def place_root(p: Place) -> str:
    while isinstance(p, Deref):
        p = p.base
    return p.name


def place_depth(p: Place) -> int:
    d = 0
    while isinstance(p, Deref):
        p = p.base
        d += 1
    return d


# expressions

@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Nil:
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class BoxE:
    expr: "Expr"
    pos: Optional[Pos] = _pos()


BINOPS = ("+", "-", "*", "<", "<=", "==")
ARITH = ("+", "-", "*")


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Copy:
    place: Place
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Move:
    place: Place
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class BorrowShared:
    place: Place
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class BorrowMut:
    place: Place
    pos: Optional[Pos] = _pos()


Expr = Union[IntLit, BoolLit, Nil, BoxE, BinOp, Copy, Move, BorrowShared, BorrowMut]


# statements

@dataclass(frozen=True)
class Tick:
    amount: int
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Return:
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Drop:
    place: Place
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class If:
    cond: Place
    then: tuple
    else_: tuple
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Match:
    scrutinee: Place
    nil_arm: tuple
    head: str
    tail: str
    cons_arm: tuple
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Assign:
    place: Place
    expr: Expr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class AssignCons:
    place: Place
    head: Expr
    tail: Expr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class AssignCall:
    place: Place
    fn: str
    args: tuple
    pos: Optional[Pos] = _pos()


Stmt = Union[Tick, Return, Drop, If, Match, Assign, AssignCons, AssignCall]
Block = tuple


@dataclass(frozen=True)
class Param:
    name: str
    type: SimpleType
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Function:
    name: str
    params: tuple
    locals: tuple
    ret_type: SimpleType
    body: tuple
    pos: Optional[Pos] = _pos()

    def declared(self) -> dict[str, SimpleType]:
        """Every variable in scope: params, locals and the return slot."""
        out = {p.name: p.type for p in self.params}
        for d in self.locals:
            out[d.name] = d.type
        out[RET] = self.ret_type
        return out


@dataclass(frozen=True)
class Program:
    functions: tuple

    def function(self, name: str) -> Function:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    def names(self) -> list[str]:
        return [f.name for f in self.functions]


RET = "ret"


def iter_stmts(block):
    """All statements of a block, depth first."""
    for s in block:
        yield s
        if isinstance(s, If):
            yield from iter_stmts(s.then)
            yield from iter_stmts(s.else_)
        elif isinstance(s, Match):
            yield from iter_stmts(s.nil_arm)
            yield from iter_stmts(s.cons_arm)
