"""Potential functions and the executable soundness check.

For a function f with entry context G, exit context G' and cost bound d, a
run from store V to V' costing c must satisfy

    Phi(V' : G') - Phi(V : G) + c <= d

where Phi sums the potential of every variable in scope.  The harness runs
functions on generated inputs and reports the slack d - (dPhi + c).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .annotations import (
    BoolR, BotR, BoxR, IntR, ListR, MutR, RichType, SharedR, UnitR,
)
from .inference import AnalysisResult
from .interpreter import (
    DEFAULT_FUEL, UNDEF, BoolV, Borrow, BoxV, ConsV, IntV, Interpreter, NilV, UnitV,
    make_list, qualified_name,
)
from .syntax.ast import (
    BoolT, BoxListT, IntT, ListT, MutRefT, Program, SharedRefT, UnitT, Var, contains_list,
)


class PotentialShapeError(Exception):
    pass


def _list_length(v) -> int:
    n = 0
    while isinstance(v, ConsV):
        n += 1
        v = v.tail.inner if isinstance(v.tail, BoxV) else UNDEF
    if not (isinstance(v, NilV) or v is UNDEF):
        raise PotentialShapeError(f"malformed list ending in {v!r}")
    return n


def potential(v, tau: RichType, a: Mapping) -> Fraction:
    """Potential of value v at type tau under assignment a.

    Undefined values and anything at type ⊥ carry nothing.
    """
    if isinstance(tau, BotR) or v is UNDEF:
        return Fraction(0)
    if isinstance(tau, IntR):
        if not isinstance(v, IntV):
            raise PotentialShapeError(f"expected i32, got {v!r}")
        return Fraction(0)
    if isinstance(tau, BoolR):
        if not isinstance(v, BoolV):
            raise PotentialShapeError(f"expected bool, got {v!r}")
        return Fraction(0)
    if isinstance(tau, UnitR):
        return Fraction(0)
    if isinstance(tau, ListR):
        if not isinstance(v, (NilV, ConsV)):
            raise PotentialShapeError(f"expected a list, got {v!r}")
        return Fraction(a[tau.alpha]) * _list_length(v)
    if isinstance(tau, BoxR):
        if not isinstance(v, BoxV):
            raise PotentialShapeError(f"expected a box, got {v!r}")
        return potential(v.inner, tau.inner, a)
    if isinstance(tau, SharedR):
        if not isinstance(v, Borrow):
            raise PotentialShapeError(f"expected a borrow, got {v!r}")
        return potential(v.payload, tau.inner, a)
    if isinstance(tau, MutR):
        if not isinstance(v, Borrow):
            raise PotentialShapeError(f"expected a borrow, got {v!r}")
        return potential(v.payload, tau.cur, a) - potential(v.payload, tau.proph, a)
    raise PotentialShapeError(f"unknown type {tau!r}")


def potential_store(V: Mapping, ctx: Mapping[str, RichType], a: Mapping,
                    frame: Optional[int] = None) -> Fraction:
    """Sum of potentials over the context's domain (names qualified by frame)."""
    total = Fraction(0)
    for x, tau in ctx.items():
        total += potential(V.get(qualified_name(x, frame), UNDEF), tau, a)
    return total


# input generation

def build_value(t, base, store: dict, tag: str):
    """A value of simple type t; references get hidden owner slots in store."""
    if isinstance(t, ListT):
        return make_list(base)
    if isinstance(t, BoxListT):
        return BoxV(make_list(base))
    if isinstance(t, IntT):
        return IntV(int(base))
    if isinstance(t, BoolT):
        return BoolV(bool(base))
    if isinstance(t, UnitT):
        return UnitV()
    if isinstance(t, (SharedRefT, MutRefT)):
        owner = f"owner:{tag}"
        store[owner] = build_value(t.inner, base, store, tag + "'")
        return Borrow(Var(owner), store[owner])
    raise ValueError(f"cannot build a value of type {t}")


def scaffold_args(fn, bases) -> tuple[list, dict]:
    store: dict = {}
    args = [build_value(p.type, b, store, p.name) for p, b in zip(fn.params, bases)]
    return args, store


def generate_inputs(fn, n: int) -> list[list]:
    """Base values for each parameter at size n.

    The first list-bearing parameter gets [1..n]; later ones get [].  Integers
    are 1; booleans take both values, giving one input per combination.
    """
    choices = []
    sized = False
    for p in fn.params:
        t = p.type
        if contains_list(t):
            choices.append([list(range(1, n + 1)) if not sized else []])
            sized = True
        elif isinstance(_base(t), IntT):
            choices.append([1])
        elif isinstance(_base(t), BoolT):
            choices.append([True, False])
        else:
            choices.append([None])
    return [list(c) for c in itertools.product(*choices)]


def _base(t):
    while isinstance(t, (SharedRefT, MutRefT)):
        t = t.inner
    return t


# soundness

@dataclass
class PotentialReport:
    fn: str
    size: int
    inputs: list
    phi_entry: Fraction
    phi_exit: Fraction
    cost: int
    delta: Fraction
    slack: Fraction
    sound: bool


def check_soundness(prog: Program, analysis: AnalysisResult, name: str, bases: list,
                    assignment: Optional[Mapping] = None, size: int = -1,
                    fuel: int = DEFAULT_FUEL) -> PotentialReport:
    """Run name on the inputs and compare the potential change with the bound."""
    a = analysis.assignment if assignment is None else assignment
    sig = analysis.signatures[name]
    fn = prog.function(name)
    args, V = scaffold_args(fn, bases)
    interp = Interpreter(prog, fuel=fuel)
    frame = interp.enter(fn, args, V)
    phi0 = potential_store(V, sig.entry, a, frame)
    cost = interp.exec_body(fn, frame, V)
    phi1 = potential_store(V, sig.exit, a, frame)
    delta = Fraction(a[sig.delta])
    slack = delta - (phi1 - phi0 + cost)
    return PotentialReport(name, size, bases, phi0, phi1, cost, delta, slack, slack >= 0)


def fuzz_soundness(prog: Program, analysis: AnalysisResult, name: str, sizes,
                   assignment: Optional[Mapping] = None,
                   fuel: int = DEFAULT_FUEL) -> list[PotentialReport]:
    fn = prog.function(name)
    out = []
    for n in sizes:
        for bases in generate_inputs(fn, n):
            out.append(check_soundness(prog, analysis, name, bases, assignment, n, fuel))
    return out


def with_delta_shift(analysis: AnalysisResult, name: str, shift) -> dict:
    """A copy of the solved assignment with name's cost bound moved by shift."""
    a = dict(analysis.assignment)
    v = analysis.signatures[name].delta
    a[v] = a[v] + shift
    return a


# measurement

@dataclass
class BenchmarkReport:
    fn: str
    sizes: list
    costs: list
    bound_coeffs: list
    slack_max: Fraction
    slack_min: Fraction
    sound: bool
    tight: bool
    signature: str = ""

    def to_json(self) -> dict:
        def num(x):
            x = Fraction(x)
            return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
        return {
            "fn": self.fn,
            "sizes": list(self.sizes),
            "costs": list(self.costs),
            "bound_coeffs": [num(c) for c in self.bound_coeffs],
            "slack_max": num(self.slack_max),
            "sound": self.sound,
            "tight": self.tight,
        }


def bound_coefficients(prog: Program, analysis: AnalysisResult, name: str,
                       assignment: Optional[Mapping] = None) -> list[Fraction]:
    """[constant, per-element] of the bound delta + coef * n."""
    a = analysis.assignment if assignment is None else assignment
    sig = analysis.signatures[name]
    fn = prog.function(name)
    coef = Fraction(0)
    for bases in generate_inputs(fn, 1)[:1]:
        args, _ = scaffold_args(fn, bases)
        coef = sum((potential(v, sig.entry[p.name], a) for p, v in zip(fn.params, args)),
                   Fraction(0))
    return [Fraction(a[sig.delta]), coef]


def measure_and_fit(prog: Program, analysis: AnalysisResult, name: str, sizes,
                    assignment: Optional[Mapping] = None,
                    fuel: int = DEFAULT_FUEL) -> BenchmarkReport:
    """Worst-case cost per size against the linear bound, plus the soundness check."""
    sizes = list(sizes)
    const, coef = bound_coefficients(prog, analysis, name, assignment)
    costs, slacks = [], []
    sound = True
    for n in sizes:
        reports = [check_soundness(prog, analysis, name, b, assignment, n, fuel)
                   for b in generate_inputs(prog.function(name), n)]
        worst = max(r.cost for r in reports)
        costs.append(worst)
        slacks.append(const + coef * n - worst)
        sound = sound and all(r.sound for r in reports) and slacks[-1] >= 0
    smax = max(slacks) if slacks else Fraction(0)
    smin = min(slacks) if slacks else Fraction(0)
    return BenchmarkReport(name, sizes, costs, [const, coef], smax, smin, sound,
                           sound and smax == smin,
                           analysis.render_signature(name) if assignment is None else "")
