"""Constraint generation and per-group solving.

Functions are analysed one strongly connected component of the call graph
at a time, callees first.  Calls inside a component use the component's own
signatures; calls to an earlier component copy that component's whole
constraint system with fresh variables, so each call site may pick its own
solution (a callee returning potential to one caller does not force it on
another).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import lp
from .annotations import (
    BOT, BoolR, BotR, BoxR, Context, IntR, ListR, MutR, RichType, Session, SharedR,
    ShapeError, TypingError, UnitR, annotations_of, ctx_read, ctx_write, enrich, equate,
    meet, prophesy, rename_type, render, share, wellformed,
)
from .lp import AnnotVar, Constraint, LinExpr, LPProblem, eq, ge
from .syntax.ast import (
    ARITH, RET, Assign, AssignCall, AssignCons, BinOp, BoolLit, BorrowMut, BorrowShared,
    BoxE, Copy, Drop, Function, If, IntLit, Match, Move, Nil, Program, Return, Tick, Var,
)
from .syntax.callgraph import call_graph_sccs

W_SIG = Fraction(1024)
W_DELTA = Fraction(1)
W_INT = Fraction(1, 1024)


class Infeasible(TypingError):
    def __init__(self, group: list[str], hint: list[Constraint]):
        self.group = group
        self.hint = hint
        lines = "".join(f"\n  {c.note}" for c in hint[:8])
        super().__init__(f"no resource annotation exists for {', '.join(group)}{lines}")


@dataclass
class GroupTemplate:
    members: list[str]
    vars: list[AnnotVar]
    constraints: list[Constraint]
    signatures: dict = field(default_factory=dict)


@dataclass
class Signature:
    name: str
    fn: Function
    entry: Context            # every parameter, local and ret, enriched
    delta: AnnotVar
    exit: Optional[Context] = None
    template: Optional[GroupTemplate] = None
    constraints_count: int = 0

    @property
    def params(self) -> list[tuple[str, RichType]]:
        return [(p.name, self.entry[p.name]) for p in self.fn.params]

    @property
    def ret(self) -> RichType:
        return self.entry[RET]

    def param_vars(self) -> list[AnnotVar]:
        out = []
        for _, t in self.params:
            out.extend(annotations_of(t))
        return out

    def renamed(self, mapping) -> "Signature":
        return Signature(
            self.name, self.fn,
            {k: rename_type(t, mapping) for k, t in self.entry.items()},
            mapping.get(self.delta, self.delta),
            None if self.exit is None else {k: rename_type(t, mapping) for k, t in self.exit.items()},
            None, self.constraints_count,
        )


@dataclass
class MergeRecord:
    fn: str
    site: str
    var: str
    left: RichType
    right: RichType
    result: RichType
    constraints: list[Constraint]


@dataclass
class GroupResult:
    members: list[str]
    problem: LPProblem
    solution: lp.LPSolution
    seconds: float


@dataclass
class AnalysisResult:
    program: Program
    signatures: dict[str, Signature]
    assignment: dict[AnnotVar, Fraction]
    groups: list[GroupResult]
    merges: list[MergeRecord]

    def value(self, v: AnnotVar) -> Fraction:
        return self.assignment[v]

    def delta(self, name: str) -> Fraction:
        return self.assignment[self.signatures[name].delta]

    def param_annotations(self, name: str) -> dict[str, list[Fraction]]:
        sig = self.signatures[name]
        return {x: [self.assignment[v] for v in annotations_of(t)] for x, t in sig.params}

    def render_signature(self, name: str, current_only: bool = False) -> str:
        sig = self.signatures[name]
        a = self.assignment
        params = ", ".join(f"{x}: {render(t, a, current_only)}" for x, t in sig.params)
        d = a[sig.delta]
        ds = str(d.numerator) if d.denominator == 1 else f"{d.numerator}/{d.denominator}"
        return f"{name} : fn({params}) -> {render(sig.ret, a, current_only)} | {ds}"


def instantiate_signature(sig: Signature, session: Session) -> Signature:
    """Copy the callee's group constraints with fresh variables."""
    tmpl = sig.template
    if tmpl is None:
        return sig
    mapping = {v: session.fresh(v.kind, f"{sig.name}.{v.note}") for v in tmpl.vars}
    session.emit(c.rename(mapping) for c in tmpl.constraints)
    return sig.renamed(mapping)


class _SigEnv:
    def __init__(self, own: dict[str, Signature], done: dict[str, Signature]):
        self.own = own
        self.done = done

    def lookup(self, name: str, session: Session) -> Signature:
        if name in self.own:
            return self.own[name]
        if name in self.done:
            return instantiate_signature(self.done[name], session)
        raise TypingError(f"unknown function {name!r}")


class _FnTyper:
    def __init__(self, fn: Function, session: Session, env: _SigEnv, merges: list):
        self.fn = fn
        self.s = session
        self.env = env
        self.merges = merges
        self.site = fn.name

    def emit(self, cs) -> None:
        self.s.emit(cs)

    def note(self, what: str) -> str:
        return f"{self.site} {what}"

    def write(self, ctx, p, tau, what="write"):
        ctx, cs = ctx_write(ctx, p, tau, self.note(what))
        self.emit(cs)
        return ctx

    def read(self, ctx, p) -> RichType:
        return ctx_read(ctx, p)

    # expressions

    def expr(self, e, ctx):
        if isinstance(e, IntLit):
            return IntR(), ctx
        if isinstance(e, BoolLit):
            return BoolR(), ctx
        if isinstance(e, Nil):
            return ListR(self.s.fresh(lp.POTENTIAL, self.note("nil"))), ctx
        if isinstance(e, BoxE):
            t, ctx = self.expr(e.expr, ctx)
            if not isinstance(t, ListR):
                raise ShapeError(f"box expects a list, got {render(t)}")
            return BoxR(t), ctx
        if isinstance(e, BinOp):
            for side in (e.left, e.right):
                t, ctx = self.expr(side, ctx)
                if not isinstance(t, IntR):
                    raise ShapeError(f"operator {e.op} expects i32, got {render(t)}")
            return (IntR() if e.op in ARITH else BoolR()), ctx
        if isinstance(e, Copy):
            t = self.read(ctx, e.place)
            if not isinstance(t, (IntR, BoolR, UnitR)):
                raise ShapeError(f"copy of non-atomic {e.place}: {render(t)}")
            return t, ctx
        if isinstance(e, Move):
            t = self._live(ctx, e.place)
            return t, self.write(ctx, e.place, BOT, "move")
        if isinstance(e, BorrowShared):
            t = self._live(ctx, e.place)
            t1, t2, cs = share(t, self.s, self.note(f"&{e.place}"))
            self.emit(cs)
            return SharedR(t2), self.write(ctx, e.place, t1, "shared borrow")
        if isinstance(e, BorrowMut):
            t = self._live(ctx, e.place)
            tp, cs = prophesy(t, self.s, self.note(f"&mut {e.place}"))
            self.emit(cs)
            return MutR(t, tp), self.write(ctx, e.place, tp, "mutable borrow")
        raise TypingError(f"unknown expression {e!r}")

    def _live(self, ctx, p) -> RichType:
        t = self.read(ctx, p)
        if isinstance(t, BotR):
            raise TypingError(f"use of moved value {p}")
        return t

    # statements

    def block(self, stmts, ctx):
        total = LinExpr()
        for s in stmts:
            d, ctx = self.stmt(s, ctx)
            total = total + d
        return total, ctx

    def stmt(self, s, ctx):
        outer = self.site
        if s.pos is not None:
            self.site = f"{self.fn.name}:{s.pos}"
        try:
            return self._stmt(s, ctx)
        except TypingError as err:
            if not getattr(err, "located", False):
                err.args = (f"{self.site}: {err.args[0] if err.args else err}",)
                err.located = True
            raise
        finally:
            self.site = outer

    def _overwrite(self, ctx, p, tau, what):
        """Check the old value at p may be dropped, then store tau there."""
        old = self.read(ctx, p)
        self.emit(wellformed(old, self.note(f"overwrite {p}")))
        return self.write(ctx, p, tau, what)

    def _stmt(self, s, ctx):
        if isinstance(s, Tick):
            return LinExpr.of(s.amount), ctx
        if isinstance(s, Return):
            return LinExpr(), ctx
        if isinstance(s, Drop):
            t = self.read(ctx, s.place)
            self.emit(wellformed(t, self.note(f"drop {s.place}")))
            return LinExpr(), self.write(ctx, s.place, BOT, "drop")
        if isinstance(s, Assign):
            t, ctx = self.expr(s.expr, ctx)
            return LinExpr(), self._overwrite(ctx, s.place, t, "assign")
        if isinstance(s, AssignCons):
            th, ctx = self.expr(s.head, ctx)
            if not isinstance(th, IntR):
                raise ShapeError(f"cons head must be i32, got {render(th)}")
            tt, ctx = self.expr(s.tail, ctx)
            if not (isinstance(tt, BoxR) and isinstance(tt.inner, ListR)):
                raise ShapeError(f"cons tail must be box list, got {render(tt)}")
            a = tt.inner.alpha
            return LinExpr.of(a), self._overwrite(ctx, s.place, ListR(a), "cons")
        if isinstance(s, AssignCall):
            sig = self.env.lookup(s.fn, self.s)
            params = sig.params
            if len(params) != len(s.args):
                raise TypingError(f"{s.fn} expects {len(params)} arguments, got {len(s.args)}")
            for arg, (x, tp) in zip(s.args, params):
                ta, ctx = self.expr(arg, ctx)
                self.emit(equate(ta, tp, self.note(f"argument {x} of {s.fn}")))
            return LinExpr.of(sig.delta), self._overwrite(ctx, s.place, sig.ret, f"call {s.fn}")
        if isinstance(s, If):
            t = self.read(ctx, s.cond)
            if not isinstance(t, BoolR):
                raise ShapeError(f"if condition must be bool, got {render(t)}")
            d1, c1 = self.block(s.then, ctx)
            d2, c2 = self.block(s.else_, ctx)
            d = self.s.fresh_cost(self.note("if cost"))
            self.emit([ge(d, d1, self.note("if cost/then")), ge(d, d2, self.note("if cost/else"))])
            return LinExpr.of(d), self.merge(c1, c2)
        if isinstance(s, Match):
            return self.match(s, ctx)
        raise TypingError(f"unknown statement {s!r}")

    def match(self, s: Match, ctx):
        t = self.read(ctx, s.scrutinee)
        if not isinstance(t, ListR):
            raise ShapeError(f"match scrutinee must be a list, got {render(t)}")
        alpha = t.alpha
        d1, c1 = self.block(s.nil_arm, ctx)
        hd, tl = Var(s.head), Var(s.tail)
        cb = self.write(ctx, s.scrutinee, BOT, "match")
        cb = self.write(cb, hd, IntR())
        cb = self.write(cb, tl, BoxR(ListR(alpha)))
        d2, cb = self.block(s.cons_arm, cb)
        rest = cb[s.tail]
        beta = None
        if isinstance(rest, BoxR) and isinstance(rest.inner, ListR):
            beta = rest.inner.alpha
        elif not (isinstance(rest, BotR) or (isinstance(rest, BoxR) and isinstance(rest.inner, BotR))):
            raise ShapeError(f"match tail {s.tail} changed shape: {render(rest)}")
        cb = self.write(cb, hd, BOT)
        cb = self.write(cb, tl, BOT)
        # with the tail moved away, the scrutinee keeps no potential
        c2 = self.write(cb, s.scrutinee, ListR(beta) if beta is not None else BOT, "match restore")
        d = self.s.fresh_cost(self.note("match cost"))
        released = d2 - alpha + (beta if beta is not None else 0)
        self.emit([ge(d, d1, self.note("match cost/nil")), ge(d, released, self.note("match cost/cons"))])
        return LinExpr.of(d), self.merge(c1, c2)

    def merge(self, c1: Context, c2: Context) -> Context:
        out = {}
        for x in c1:
            t, cs = meet(c1[x], c2[x], self.s, self.note(f"merge {x}"))
            self.emit(cs)
            out[x] = t
            if c1[x] != c2[x]:
                self.merges.append(MergeRecord(self.fn.name, self.site, x, c1[x], c2[x], t, cs))
        return out


def _new_signature(fn: Function, session: Session) -> Signature:
    entry = {}
    for p in fn.params:
        entry[p.name] = enrich(p.type, session, f"{fn.name}.{p.name}")
    for d in fn.locals:
        entry[d.name] = enrich(d.type, session, f"{fn.name}.{d.name}")
    entry[RET] = enrich(fn.ret_type, session, f"{fn.name}.ret")
    delta = session.fresh_cost(f"{fn.name}.delta")
    return Signature(fn.name, fn, entry, delta)


def analyze_function(fn: Function, sig: Signature, session: Session, env: _SigEnv,
                     merges: Optional[list] = None) -> Signature:
    """Type the body against the entry context and close the signature."""
    start = len(session.constraints)
    typer = _FnTyper(fn, session, env, merges if merges is not None else [])
    d, exit_ctx = typer.block(fn.body, dict(sig.entry))
    for x, t in exit_ctx.items():
        session.emit(wellformed(t, f"{fn.name} exit {x}"))
    try:
        session.emit(equate(exit_ctx[RET], sig.entry[RET], f"{fn.name} result"))
    except ShapeError as err:
        raise TypingError(f"{fn.name}: result type at exit does not match its declaration ({err})")
    session.emit([eq(d, sig.delta, f"{fn.name} cost")])
    sig.exit = exit_ctx
    sig.constraints_count = len(session.constraints) - start
    return sig


def _objective(sigs: list[Signature], vars_: list[AnnotVar], weights) -> LinExpr:
    w_sig, w_delta, w_int = weights
    param = set()
    for s in sigs:
        param.update(s.param_vars())
    deltas = {s.delta for s in sigs}
    terms = {}
    for v in vars_:
        if v in param:
            terms[v] = w_sig
        elif v in deltas:
            terms[v] = w_delta
        elif v.kind == lp.POTENTIAL:
            terms[v] = w_int
    return LinExpr(terms)


def analyze_program(prog: Program, weights=(W_SIG, W_DELTA, W_INT),
                    session: Optional[Session] = None) -> AnalysisResult:
    session = session or Session()
    fns = {f.name: f for f in prog.functions}
    done: dict[str, Signature] = {}
    assignment: dict[AnnotVar, Fraction] = {}
    groups: list[GroupResult] = []
    merges: list[MergeRecord] = []
    for members in call_graph_sccs(prog):
        t0 = time.perf_counter()
        vstart, cstart = len(session.vars), len(session.constraints)
        own = {m: _new_signature(fns[m], session) for m in members}
        env = _SigEnv(own, done)
        for m in members:
            analyze_function(fns[m], own[m], session, env, merges)
        vars_ = session.vars[vstart:]
        cons = session.constraints[cstart:]
        problem = LPProblem(list(vars_), list(cons), _objective(list(own.values()), vars_, weights))
        try:
            sol = lp.solve(problem)
        except lp.Infeasible as err:
            raise Infeasible(members, err.hint) from None
        tmpl = GroupTemplate(list(members), list(vars_), list(cons), dict(own))
        for sig in own.values():
            sig.template = tmpl
            done[sig.name] = sig
        assignment.update(sol.assignment)
        groups.append(GroupResult(list(members), problem, sol, time.perf_counter() - t0))
    ordered = {f.name: done[f.name] for f in prog.functions}
    return AnalysisResult(prog, ordered, assignment, groups, merges)


def type_stmt(ctx: Context, s, env: _SigEnv, session: Session, fn: Optional[Function] = None):
    """Type a single statement; returns (cost, new context, constraints emitted)."""
    start = len(session.constraints)
    fn = fn or Function("<stmt>", (), (), None, (s,))
    d, out = _FnTyper(fn, session, env, []).stmt(s, ctx)
    return d, out, session.constraints[start:]


def type_expr(ctx: Context, e, session: Session):
    """Type a single expression; returns (type, new context, constraints emitted)."""
    start = len(session.constraints)
    fn = Function("<expr>", (), (), None, ())
    t, out = _FnTyper(fn, session, _SigEnv({}, {}), []).expr(e, ctx)
    return t, out, session.constraints[start:]
