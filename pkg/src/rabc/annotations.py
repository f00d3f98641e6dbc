"""Resource-annotated types and the operations on them.

Every operation is a pure function returning new types together with the
linear constraints it imposes.  The only shared state is the fresh-variable
counter held by a `Session`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Union

from .lp import COST, POTENTIAL, AnnotVar, Constraint, LinExpr, eq, ge, le
from .syntax.ast import (
    BoolT, BoxListT, IntT, ListT, MutRefT, SharedRefT, UnitT, Var,
)


class TypingError(Exception):
    pass


class ShapeError(TypingError):
    pass


class BotRead(TypingError):
    pass


@dataclass(frozen=True)
class BotR:
    pass


@dataclass(frozen=True)
class IntR:
    pass


@dataclass(frozen=True)
class BoolR:
    pass


@dataclass(frozen=True)
class UnitR:
    pass


@dataclass(frozen=True)
class ListR:
    alpha: AnnotVar


@dataclass(frozen=True)
class BoxR:
    inner: "RichType"     # ListR, or BotR once the contents are moved out


@dataclass(frozen=True)
class SharedR:
    inner: "RichType"


@dataclass(frozen=True)
class MutR:
    cur: "RichType"
    proph: "RichType"


RichType = Union[BotR, IntR, BoolR, UnitR, ListR, BoxR, SharedR, MutR]
BOT = BotR()
ATOMS_R = (IntR, BoolR, UnitR)


class Session:
    """Fresh annotation variables and the constraints collected so far."""

    def __init__(self) -> None:
        self._next = 1
        self.vars: list[AnnotVar] = []
        self.constraints: list[Constraint] = []

    def fresh(self, kind: str = POTENTIAL, note: str = "") -> AnnotVar:
        v = AnnotVar(self._next, kind, note)
        self._next += 1
        self.vars.append(v)
        return v

    def fresh_cost(self, note: str = "") -> AnnotVar:
        return self.fresh(COST, note)

    def emit(self, cs) -> None:
        self.constraints.extend(cs)


def enrich(t, session: Session, note: str = "") -> RichType:
    if isinstance(t, IntT):
        return IntR()
    if isinstance(t, BoolT):
        return BoolR()
    if isinstance(t, UnitT):
        return UnitR()
    if isinstance(t, ListT):
        return ListR(session.fresh(POTENTIAL, note))
    if isinstance(t, BoxListT):
        return BoxR(ListR(session.fresh(POTENTIAL, note)))
    if isinstance(t, SharedRefT):
        return SharedR(enrich(t.inner, session, note))
    if isinstance(t, MutRefT):
        return MutR(enrich(t.inner, session, note + "/cur"),
                    enrich(t.inner, session, note + "/proph"))
    raise ShapeError(f"cannot enrich {t!r}")


def erase(tau: RichType):
    """The simple type underneath; None for ⊥."""
    if isinstance(tau, BotR):
        return None
    if isinstance(tau, IntR):
        return IntT()
    if isinstance(tau, BoolR):
        return BoolT()
    if isinstance(tau, UnitR):
        return UnitT()
    if isinstance(tau, ListR):
        return ListT()
    if isinstance(tau, BoxR):
        return BoxListT()
    if isinstance(tau, SharedR):
        inner = erase(tau.inner)
        return SharedRefT(inner) if inner is not None else None
    if isinstance(tau, MutR):
        inner = erase(tau.cur) or erase(tau.proph)
        return MutRefT(inner) if inner is not None else None
    raise ShapeError(f"not a rich type: {tau!r}")


def annotations_of(tau: RichType) -> list[AnnotVar]:
    """All annotation variables of a type, left to right."""
    if isinstance(tau, ListR):
        return [tau.alpha]
    if isinstance(tau, (BoxR, SharedR)):
        return annotations_of(tau.inner)
    if isinstance(tau, MutR):
        return annotations_of(tau.cur) + annotations_of(tau.proph)
    return []


def _mismatch(what: str, t1, t2) -> ShapeError:
    return ShapeError(f"{what}: shapes differ ({render(t1)} vs {render(t2)})")


def _zero(tau: RichType, note: str) -> list[Constraint]:
    """Constraints making a value of type tau carry no potential."""
    if isinstance(tau, ListR):
        return [le(tau.alpha, 0, note)]
    if isinstance(tau, (BoxR, SharedR)):
        return _zero(tau.inner, note)
    if isinstance(tau, MutR):
        return _zero(tau.cur, note)
    return []


def subtype(t1: RichType, t2: RichType, note: str = "subtype") -> list[Constraint]:
    if isinstance(t1, BotR):
        return []
    if isinstance(t2, BotR):
        return _zero(t1, note + "/to-bot")
    if isinstance(t1, ATOMS_R) and type(t1) is type(t2):
        return []
    if isinstance(t1, ListR) and isinstance(t2, ListR):
        if t1.alpha == t2.alpha:
            return []
        return [le(t1.alpha, t2.alpha, note + "/S-List")]
    if isinstance(t1, BoxR) and isinstance(t2, BoxR):
        return subtype(t1.inner, t2.inner, note)
    if isinstance(t1, SharedR) and isinstance(t2, SharedR):
        return subtype(t1.inner, t2.inner, note)
    if isinstance(t1, MutR) and isinstance(t2, MutR):
        return (subtype(t1.cur, t2.cur, note + "/cur")
                + subtype(t2.proph, t1.proph, note + "/proph"))
    raise _mismatch("subtype", t1, t2)


def wellformed(tau: RichType, note: str = "wf") -> list[Constraint]:
    if isinstance(tau, (BotR,) + ATOMS_R):
        return []
    if isinstance(tau, ListR):
        return [ge(tau.alpha, 0, note + "/WF-List")]
    if isinstance(tau, (BoxR, SharedR)):
        return wellformed(tau.inner, note)
    if isinstance(tau, MutR):
        return (subtype(tau.proph, tau.cur, note + "/drop")
                + wellformed(tau.cur, note) + wellformed(tau.proph, note))
    raise ShapeError(f"not a rich type: {tau!r}")


def share(tau: RichType, session: Session, note: str = "share"):
    """Split tau into two types whose potentials add up to tau's."""
    if isinstance(tau, (BotR,) + ATOMS_R):
        return tau, tau, []
    if isinstance(tau, ListR):
        a1 = session.fresh(POTENTIAL, note + "/left")
        a2 = session.fresh(POTENTIAL, note + "/right")
        return ListR(a1), ListR(a2), [eq(tau.alpha, LinExpr.of(a1) + a2, note + "/Share-List")]
    if isinstance(tau, BoxR):
        i1, i2, cs = share(tau.inner, session, note)
        return BoxR(i1), BoxR(i2), cs
    if isinstance(tau, SharedR):
        i1, i2, cs = share(tau.inner, session, note)
        return SharedR(i1), SharedR(i2), cs
    if isinstance(tau, MutR):
        raise ShapeError("cannot share a mutable borrow")
    raise ShapeError(f"not a rich type: {tau!r}")


def prophesy(tau: RichType, session: Session, note: str = "prophecy"):
    """Same shape with fresh annotations everywhere; no constraints."""
    if isinstance(tau, (BotR,) + ATOMS_R):
        return tau, []
    if isinstance(tau, ListR):
        return ListR(session.fresh(POTENTIAL, note)), []
    if isinstance(tau, BoxR):
        t, cs = prophesy(tau.inner, session, note)
        return BoxR(t), cs
    if isinstance(tau, SharedR):
        t, cs = prophesy(tau.inner, session, note)
        return SharedR(t), cs
    if isinstance(tau, MutR):
        c, cs1 = prophesy(tau.cur, session, note)
        p, cs2 = prophesy(tau.proph, session, note)
        return MutR(c, p), cs1 + cs2
    raise ShapeError(f"not a rich type: {tau!r}")


def meet(t1: RichType, t2: RichType, session: Session, note: str = "meet"):
    """Greatest lower bound, relaxed to a fresh type below both inputs."""
    if isinstance(t1, BotR) and isinstance(t2, BotR):
        return BOT, []
    if isinstance(t1, BotR):
        return BOT, wellformed(t2, note + "/Meet-Bot")
    if isinstance(t2, BotR):
        return BOT, wellformed(t1, note + "/Meet-Bot")
    if isinstance(t1, ATOMS_R) and type(t1) is type(t2):
        return t1, []
    if isinstance(t1, ListR) and isinstance(t2, ListR):
        if t1.alpha == t2.alpha:
            return t1, []
        c = session.fresh(POTENTIAL, note)
        return ListR(c), [le(c, t1.alpha, note + "/Meet-List"), le(c, t2.alpha, note + "/Meet-List")]
    if isinstance(t1, BoxR) and isinstance(t2, BoxR):
        t, cs = meet(t1.inner, t2.inner, session, note)
        return BoxR(t), cs
    if isinstance(t1, SharedR) and isinstance(t2, SharedR):
        t, cs = meet(t1.inner, t2.inner, session, note)
        return SharedR(t), cs
    if isinstance(t1, MutR) and isinstance(t2, MutR):
        c, cs1 = meet(t1.cur, t2.cur, session, note + "/cur")
        p, cs2 = join(t1.proph, t2.proph, session, note + "/proph")
        drop = (wellformed(t1, note + "/Meet-Mutable") + wellformed(t2, note + "/Meet-Mutable"))
        return MutR(c, p), cs1 + cs2 + drop
    raise _mismatch("meet", t1, t2)


def join(t1: RichType, t2: RichType, session: Session, note: str = "join"):
    """Least upper bound, relaxed to a fresh type above both inputs."""
    if isinstance(t1, BotR):
        return t2, []
    if isinstance(t2, BotR):
        return t1, []
    if isinstance(t1, ATOMS_R) and type(t1) is type(t2):
        return t1, []
    if isinstance(t1, ListR) and isinstance(t2, ListR):
        if t1.alpha == t2.alpha:
            return t1, []
        j = session.fresh(POTENTIAL, note)
        return ListR(j), [ge(j, t1.alpha, note + "/Join-List"), ge(j, t2.alpha, note + "/Join-List")]
    if isinstance(t1, BoxR) and isinstance(t2, BoxR):
        t, cs = join(t1.inner, t2.inner, session, note)
        return BoxR(t), cs
    if isinstance(t1, SharedR) and isinstance(t2, SharedR):
        t, cs = join(t1.inner, t2.inner, session, note)
        return SharedR(t), cs
    if isinstance(t1, MutR) and isinstance(t2, MutR):
        c, cs1 = join(t1.cur, t2.cur, session, note + "/cur")
        p, cs2 = meet(t1.proph, t2.proph, session, note + "/proph")
        drop = (wellformed(t1, note + "/Join-Mutable") + wellformed(t2, note + "/Join-Mutable"))
        return MutR(c, p), cs1 + cs2 + drop
    raise _mismatch("join", t1, t2)


def equate(t1: RichType, t2: RichType, note: str = "equate") -> list[Constraint]:
    if isinstance(t1, BotR) and isinstance(t2, BotR):
        return []
    if isinstance(t1, ATOMS_R) and type(t1) is type(t2):
        return []
    if isinstance(t1, ListR) and isinstance(t2, ListR):
        return [] if t1.alpha == t2.alpha else [eq(t1.alpha, t2.alpha, note)]
    if isinstance(t1, BoxR) and isinstance(t2, BoxR):
        return equate(t1.inner, t2.inner, note)
    if isinstance(t1, SharedR) and isinstance(t2, SharedR):
        return equate(t1.inner, t2.inner, note)
    if isinstance(t1, MutR) and isinstance(t2, MutR):
        return equate(t1.cur, t2.cur, note + "/cur") + equate(t1.proph, t2.proph, note + "/proph")
    raise _mismatch("equate", t1, t2)


def rename_type(tau: RichType, mapping: Mapping[AnnotVar, AnnotVar]) -> RichType:
    if isinstance(tau, ListR):
        return ListR(mapping.get(tau.alpha, tau.alpha))
    if isinstance(tau, BoxR):
        return BoxR(rename_type(tau.inner, mapping))
    if isinstance(tau, SharedR):
        return SharedR(rename_type(tau.inner, mapping))
    if isinstance(tau, MutR):
        return MutR(rename_type(tau.cur, mapping), rename_type(tau.proph, mapping))
    return tau


# typing contexts: plain dicts from variable name to rich type

Context = dict


def ctx_read(ctx: Context, p) -> RichType:
    if isinstance(p, Var):
        if p.name not in ctx:
            raise TypingError(f"undeclared variable {p.name!r}")
        return ctx[p.name]
    tau = ctx_read(ctx, p.base)
    if isinstance(tau, (BoxR, SharedR)):
        return tau.inner
    if isinstance(tau, MutR):
        return tau.cur
    if isinstance(tau, BotR):
        raise BotRead(f"{p.base} has been moved out or is undefined")
    raise ShapeError(f"cannot dereference {p.base} of type {render(tau)}")


def ctx_write(ctx: Context, p, tau: RichType, note: str = "write"):
    """Context with place p retyped to tau, plus the constraints this needs."""
    if isinstance(p, Var):
        out = dict(ctx)
        out[p.name] = tau
        return out, []
    base = ctx_read(ctx, p.base)
    if isinstance(base, BoxR):
        if not isinstance(tau, (ListR, BotR)):
            raise ShapeError(f"a box holds a list, not {render(tau)}")
        return ctx_write(ctx, p.base, BoxR(tau), note)
    if isinstance(base, SharedR):
        return ctx_write(ctx, p.base, SharedR(tau), note)
    if isinstance(base, MutR):
        cs = wellformed(base.cur, note + "/Wt-Mutable")
        out, cs2 = ctx_write(ctx, p.base, MutR(tau, base.proph), note)
        return out, cs + cs2
    if isinstance(base, BotR):
        raise BotRead(f"{p.base} has been moved out or is undefined")
    raise ShapeError(f"cannot write through {p.base} of type {render(base)}")


# rendering

def _num(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _ann(v: AnnotVar, a: Optional[Mapping]) -> str:
    if a is None:
        return repr(v)
    return _num(a[v]) if v in a else "?"


def _flat(tau: RichType) -> bool:
    if isinstance(tau, MutR):
        return False
    if isinstance(tau, (BoxR, SharedR)):
        return _flat(tau.inner)
    return True


def _render_pair(c: RichType, p: RichType, a) -> Optional[str]:
    """Zip two same-shaped types into one, listing both annotations at leaves."""
    if isinstance(c, ListR) and isinstance(p, ListR):
        return f"list({_ann(c.alpha, a)}, {_ann(p.alpha, a)})"
    if isinstance(c, BoxR) and isinstance(p, BoxR):
        inner = _render_pair(c.inner, p.inner, a)
        return None if inner is None else "box " + inner
    if isinstance(c, SharedR) and isinstance(p, SharedR):
        inner = _render_pair(c.inner, p.inner, a)
        return None if inner is None else "&" + inner
    if isinstance(c, ATOMS_R) and type(c) is type(p):
        return render(c)
    return None


def render(tau: RichType, assignment: Optional[Mapping] = None, current_only: bool = False) -> str:
    """Human-readable type; annotations are solved values when given."""
    a = assignment
    if isinstance(tau, BotR):
        return "bot"
    if isinstance(tau, IntR):
        return "i32"
    if isinstance(tau, BoolR):
        return "bool"
    if isinstance(tau, UnitR):
        return "unit"
    if isinstance(tau, ListR):
        return f"list({_ann(tau.alpha, a)})"
    if isinstance(tau, BoxR):
        return "box " + render(tau.inner, a, current_only)
    if isinstance(tau, SharedR):
        return "&" + render(tau.inner, a, current_only)
    if isinstance(tau, MutR):
        if current_only:
            return "&mut " + render(tau.cur, a, current_only)
        if _flat(tau.cur) and _flat(tau.proph):
            pair = _render_pair(tau.cur, tau.proph, a)
            if pair is not None:
                return "&mut " + pair
        return f"&mut({render(tau.cur, a)}, {render(tau.proph, a)})"
    return repr(tau)
