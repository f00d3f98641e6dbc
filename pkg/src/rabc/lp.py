"""Exact rational linear programming.

Variables are `AnnotVar`s.  Potential-kind variables are implicitly bounded
below by zero; cost-kind variables are free.  The solver is a sparse
two-phase tableau simplex over `fractions.Fraction` using Bland's rule, so
results are exact and pivoting cannot cycle.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

POTENTIAL = "potential"
COST = "cost"


@dataclass(frozen=True, order=True)
class AnnotVar:
    id: int
    kind: str = field(default=POTENTIAL, compare=False)
    note: str = field(default="", compare=False)

    def __repr__(self) -> str:
        return ("a" if self.kind == POTENTIAL else "d") + str(self.id)

    @property
    def name(self) -> str:
        return repr(self)


Number = Union[int, Fraction]
Term = Union["LinExpr", AnnotVar, int, Fraction]


class LinExpr:
    """Affine form sum(coef * var) + const with exact coefficients."""

    __slots__ = ("terms", "const")

    def __init__(self, terms: Mapping[AnnotVar, Number] | None = None, const: Number = 0):
        self.terms: dict[AnnotVar, Fraction] = {}
        if terms:
            for v, c in terms.items():
                if c:
                    self.terms[v] = Fraction(c)
        self.const = Fraction(const)

    @staticmethod
    def of(x: Term) -> "LinExpr":
        if isinstance(x, LinExpr):
            return x
        if isinstance(x, AnnotVar):
            return LinExpr({x: 1})
        if isinstance(x, (int, Fraction)):
            return LinExpr(None, x)
        raise TypeError(f"cannot make a linear expression from {x!r}")

    def _combine(self, other: Term, sign: int) -> "LinExpr":
        o = LinExpr.of(other)
        out = LinExpr(self.terms, self.const + sign * o.const)
        for v, c in o.terms.items():
            nc = out.terms.get(v, 0) + sign * c
            if nc:
                out.terms[v] = nc
            else:
                out.terms.pop(v, None)
        return out

    def __add__(self, other: Term) -> "LinExpr":
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other: Term) -> "LinExpr":
        return self._combine(other, -1)

    def __rsub__(self, other: Term) -> "LinExpr":
        return LinExpr.of(other)._combine(self, -1)

    def __neg__(self) -> "LinExpr":
        return self * -1

    def __mul__(self, k: Number) -> "LinExpr":
        if not isinstance(k, (int, Fraction)):
            return NotImplemented
        return LinExpr({v: c * k for v, c in self.terms.items()}, self.const * k)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinExpr):
            return NotImplemented
        return self.terms == other.terms and self.const == other.const

    def __hash__(self) -> int:
        return hash((frozenset(self.terms.items()), self.const))

    def variables(self) -> list[AnnotVar]:
        return sorted(self.terms)

    def is_const(self) -> bool:
        return not self.terms

    def rename(self, mapping: Mapping[AnnotVar, AnnotVar]) -> "LinExpr":
        out = LinExpr(None, self.const)
        for v, c in self.terms.items():
            w = mapping.get(v, v)
            nc = out.terms.get(w, 0) + c
            if nc:
                out.terms[w] = nc
            else:
                out.terms.pop(w, None)
        return out

    def __repr__(self) -> str:
        parts = []
        for v in sorted(self.terms):
            c = self.terms[v]
            if c == 1:
                parts.append(f"+ {v!r}")
            elif c == -1:
                parts.append(f"- {v!r}")
            elif c < 0:
                parts.append(f"- {-c}*{v!r}")
            else:
                parts.append(f"+ {c}*{v!r}")
        if self.const or not parts:
            parts.append(f"- {-self.const}" if self.const < 0 else f"+ {self.const}")
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]


class UnassignedVariable(KeyError):
    pass


def eval_linexpr(e: Term, assignment: Mapping[AnnotVar, Fraction]) -> Fraction:
    e = LinExpr.of(e)
    total = e.const
    for v, c in e.terms.items():
        if v not in assignment:
            raise UnassignedVariable(v)
        total += c * Fraction(assignment[v])
    return total


LE = "<="
EQ = "=="


@dataclass
class Constraint:
    """`expr <= 0` or `expr == 0`, tagged with where it came from."""

    expr: LinExpr
    rel: str
    note: str = ""

    def satisfied(self, assignment: Mapping[AnnotVar, Fraction]) -> bool:
        val = eval_linexpr(self.expr, assignment)
        return val <= 0 if self.rel == LE else val == 0

    def rename(self, mapping: Mapping[AnnotVar, AnnotVar]) -> "Constraint":
        return Constraint(self.expr.rename(mapping), self.rel, self.note)

    def variables(self) -> list[AnnotVar]:
        return self.expr.variables()

    def __repr__(self) -> str:
        return f"{self.expr!r} {self.rel} 0  [{self.note}]"


def le(a: Term, b: Term, note: str = "") -> Constraint:
    return Constraint(LinExpr.of(a) - LinExpr.of(b), LE, note)


def ge(a: Term, b: Term, note: str = "") -> Constraint:
    return Constraint(LinExpr.of(b) - LinExpr.of(a), LE, note)


def eq(a: Term, b: Term, note: str = "") -> Constraint:
    return Constraint(LinExpr.of(a) - LinExpr.of(b), EQ, note)


@dataclass
class LPProblem:
    variables: list[AnnotVar] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: LinExpr = field(default_factory=LinExpr)

    def __post_init__(self) -> None:
        self._seen = set(self.variables)

    def add_var(self, v: AnnotVar) -> None:
        if v not in self._seen:
            self._seen.add(v)
            self.variables.append(v)

    def add(self, c: Constraint) -> None:
        for v in c.expr.terms:
            self.add_var(v)
        self.constraints.append(c)

    def extend(self, cs: Iterable[Constraint]) -> None:
        for c in cs:
            self.add(c)

    def violated(self, assignment: Mapping[AnnotVar, Fraction]) -> list[Constraint]:
        bad = [c for c in self.constraints if not c.satisfied(assignment)]
        for v in self.variables:
            if v.kind == POTENTIAL and assignment.get(v, 0) < 0:
                bad.append(Constraint(LinExpr({v: -1}), LE, f"{v!r} >= 0"))
        return bad


class LPError(Exception):
    pass


class Infeasible(LPError):
    def __init__(self, message: str = "infeasible", hint: list[Constraint] | None = None):
        super().__init__(message)
        self.hint = hint or []


class Unbounded(LPError):
    pass


@dataclass
class LPSolution:
    assignment: dict[AnnotVar, Fraction]
    objective: Fraction
    pivots: int = 0


class _Tableau:
    """Sparse canonical tableau: row i reads x[basis[i]] + sum(row[j] x[j]) = rhs[i]
    where row excludes the basic column."""

    def __init__(self, rows: list[dict[int, Fraction]], rhs: list[Fraction], basis: list[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.pivots = 0

    def pivot(self, r: int, e: int, obj: dict[int, Fraction], objval: list[Fraction]) -> None:
        row = self.rows[r]
        a = row[e]
        leaving = self.basis[r]
        # rewrite row r to express x_e
        new = {j: c / a for j, c in row.items() if j != e}
        new[leaving] = 1 / a
        b = self.rhs[r] / a
        self.rows[r] = new
        self.rhs[r] = b
        self.basis[r] = e
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other.get(e)
            if f is None:
                continue
            del other[e]
            for j, c in new.items():
                nc = other.get(j, 0) - f * c
                if nc:
                    other[j] = nc
                else:
                    other.pop(j, None)
            self.rhs[i] -= f * b
        f = obj.get(e)
        if f is not None:
            del obj[e]
            for j, c in new.items():
                nc = obj.get(j, 0) - f * c
                if nc:
                    obj[j] = nc
                else:
                    obj.pop(j, None)
            objval[0] += f * b
        self.pivots += 1

    def run(self, obj: dict[int, Fraction], objval: list[Fraction], allowed) -> None:
        """Minimise objval[0] + sum(obj[j] x[j]) with Bland's rule."""
        while True:
            entering = None
            for j, d in obj.items():
                if d < 0 and allowed(j) and (entering is None or j < entering):
                    entering = j
            if entering is None:
                return
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(entering)
                if a is None or a <= 0:
                    continue
                ratio = self.rhs[i] / a
                key = (ratio, self.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
            if best is None:
                raise Unbounded("objective is unbounded below")
            self.pivot(best[1], entering, obj, objval)


def solve(problem: LPProblem) -> LPSolution:
    """Minimise the objective; raises Infeasible or Unbounded."""
    variables = list(problem.variables)
    seen = set(variables)
    for v in problem.objective.terms:
        if v not in seen:
            seen.add(v)
            variables.append(v)

    # column layout: potential vars get one column, cost vars a +/- pair
    cols: dict[AnnotVar, tuple[int, int | None]] = {}
    n = 0
    for v in variables:
        if v.kind == POTENTIAL:
            cols[v] = (n, None)
            n += 1
        else:
            cols[v] = (n, n + 1)
            n += 2

    rows: list[dict[int, Fraction]] = []
    rhs: list[Fraction] = []
    basis: list[int] = []
    origin: list[Constraint] = []
    artificial_start = None
    pending_art: list[int] = []
    for c in problem.constraints:
        row: dict[int, Fraction] = {}
        for v, k in c.expr.terms.items():
            pos, neg = cols[v]
            row[pos] = row.get(pos, 0) + k
            if neg is not None:
                row[neg] = row.get(neg, 0) - k
        row = {j: k for j, k in row.items() if k}
        b = -c.expr.const
        if c.rel == LE:
            slack = n
            n += 1
            if b >= 0:
                row[slack] = Fraction(1)
                rows.append({j: k for j, k in row.items() if j != slack})
                rhs.append(b)
                basis.append(slack)
                origin.append(c)
                continue
            row[slack] = Fraction(1)
        if b < 0:
            row = {j: -k for j, k in row.items()}
            b = -b
        if not row and b == 0:
            continue
        rows.append(row)
        rhs.append(b)
        basis.append(-1)
        origin.append(c)
        pending_art.append(len(rows) - 1)

    artificial_start = n
    for i in pending_art:
        basis[i] = n
        n += 1
    tab = _Tableau(rows, rhs, basis)

    # phase 1
    if pending_art:
        obj: dict[int, Fraction] = {}
        objval = [Fraction(0)]
        for i in pending_art:
            objval[0] += rhs[i]
            for j, k in rows[i].items():
                nk = obj.get(j, 0) - k
                if nk:
                    obj[j] = nk
                else:
                    obj.pop(j, None)
        tab.run(obj, objval, lambda j: True)
        if objval[0] > 0:
            hint = [origin[i] for i, bcol in enumerate(tab.basis)
                    if bcol >= artificial_start and tab.rhs[i] > 0]
            raise Infeasible("constraints are infeasible", hint)
        # drive zero-valued artificials out of the basis, drop redundant rows
        keep = []
        for i in range(len(tab.rows)):
            if tab.basis[i] >= artificial_start:
                cand = [j for j in tab.rows[i] if j < artificial_start]
                if not cand:
                    continue
                tab.pivot(i, min(cand), {}, [Fraction(0)])
            keep.append(i)
        tab.rows = [{j: k for j, k in tab.rows[i].items() if j < artificial_start} for i in keep]
        tab.rhs = [tab.rhs[i] for i in keep]
        tab.basis = [tab.basis[i] for i in keep]

    # phase 2
    cost: dict[int, Fraction] = {}
    for v, k in problem.objective.terms.items():
        pos, neg = cols[v]
        cost[pos] = cost.get(pos, 0) + k
        if neg is not None:
            cost[neg] = cost.get(neg, 0) - k
    obj = {j: k for j, k in cost.items() if k}
    objval = [problem.objective.const]
    for i, bcol in enumerate(tab.basis):
        k = obj.pop(bcol, None)
        if k is None:
            continue
        objval[0] += k * tab.rhs[i]
        for j, a in tab.rows[i].items():
            nk = obj.get(j, 0) - k * a
            if nk:
                obj[j] = nk
            else:
                obj.pop(j, None)
    tab.run(obj, objval, lambda j: j < artificial_start)

    x = [Fraction(0)] * artificial_start
    for i, bcol in enumerate(tab.basis):
        if bcol < artificial_start:
            x[bcol] = tab.rhs[i]
    assignment = {}
    for v, (pos, neg) in cols.items():
        assignment[v] = x[pos] - (x[neg] if neg is not None else 0)
    return LPSolution(assignment, objval[0], tab.pivots)


def _num(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d == 1:
        # terminating decimal, written out exactly
        q, r = divmod(abs(x.numerator), x.denominator)
        digits = []
        while r:
            r *= 10
            digits.append(str(r // x.denominator))
            r %= x.denominator
        return ("-" if x < 0 else "") + str(q) + "." + "".join(digits)
    return repr(float(x))


def _lp_name(v: AnnotVar) -> str:
    tag = re.sub(r"[^A-Za-z0-9_]", "_", v.note)[:40].strip("_")
    return f"{v!r}_{tag}" if tag else repr(v)


def _lp_expr(terms: Mapping[AnnotVar, Fraction]) -> str:
    out = []
    for v in sorted(terms):
        k = terms[v]
        sign = "-" if k < 0 else "+"
        mag = abs(k)
        coef = "" if mag == 1 else _num(mag) + " "
        out.append(f"{sign} {coef}{_lp_name(v)}")
    if not out:
        return "0"
    s = " ".join(out)
    return s[2:] if s.startswith("+ ") else s


def dump_cplex(problem: LPProblem) -> str:
    """Render the problem in CPLEX LP file format."""
    lines = ["\\ generated by rabc", "Minimize", " obj: " + _lp_expr(problem.objective.terms)]
    lines.append("Subject To")
    for i, c in enumerate(problem.constraints, 1):
        op = "<=" if c.rel == LE else "="
        lhs = _lp_expr(c.expr.terms)
        lines.append(f" c{i}: {lhs} {op} {_num(-c.expr.const)}")
    lines.append("Bounds")
    for v in problem.variables:
        if v.kind == POTENTIAL:
            lines.append(f" {_lp_name(v)} >= 0")
        else:
            lines.append(f" {_lp_name(v)} free")
    lines.append("End")
    return "\n".join(lines) + "\n"
