"""Random generators and independent oracles shared by the property tests."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from rabc import lp
from rabc.annotations import BoxR, ListR, MutR, Session, SharedR, annotations_of
from rabc.interpreter import Borrow, BoxV, make_list
from rabc.syntax.ast import Var

BOX_LIMIT = 10


def random_rich(rng: random.Random, s: Session, depth: int = 2, mutable: bool = True):
    """A random list-bearing rich type: list, box list, or borrows of those.

    Shared borrows never contain mutable ones.
    """
    k = rng.randrange(4 if mutable else 3) if depth > 0 else rng.randrange(2)
    if k == 0:
        return ListR(s.fresh())
    if k == 1:
        return BoxR(ListR(s.fresh()))
    if k == 2:
        return SharedR(random_rich(rng, s, depth - 1, mutable=False))
    inner = random_rich(rng, s, depth - 1)
    return MutR(inner, fresh_like(inner, s))


def fresh_like(tau, s: Session):
    if isinstance(tau, ListR):
        return ListR(s.fresh())
    if isinstance(tau, BoxR):
        return BoxR(fresh_like(tau.inner, s))
    if isinstance(tau, SharedR):
        return SharedR(fresh_like(tau.inner, s))
    return MutR(fresh_like(tau.cur, s), fresh_like(tau.proph, s))


def random_value(rng: random.Random, tau, max_len: int = 6):
    """A value matching tau; borrows point at a dummy origin."""
    if isinstance(tau, ListR):
        return make_list(range(rng.randrange(max_len + 1)))
    if isinstance(tau, BoxR):
        return BoxV(random_value(rng, tau.inner, max_len))
    inner = tau.inner if isinstance(tau, SharedR) else tau.cur
    return Borrow(Var("origin"), random_value(rng, inner, max_len))


def sample_assignment(rng: random.Random, constraints, variables, k: int = 3):
    """A random point of {constraints, 0 <= v <= BOX_LIMIT}.

    Mixes k optimal vertices for random objectives; the feasible set is
    convex, so any convex combination satisfies every constraint.
    Returns None when the set is empty.
    """
    variables = list(dict.fromkeys(variables))
    points = []
    for _ in range(k):
        prob = lp.LPProblem(list(variables))
        prob.extend(constraints)
        for v in variables:
            prob.add(lp.le(v, BOX_LIMIT, "box"))
        prob.objective = lp.LinExpr({v: rng.randint(-3, 3) for v in variables})
        try:
            points.append(lp.solve(prob).assignment)
        except lp.Infeasible:
            return None
    weights = [Fraction(rng.randint(1, 5)) for _ in points]
    total = sum(weights)
    return {v: sum(w * p.get(v, 0) for w, p in zip(weights, points)) / total for v in variables}


def vars_of(*taus):
    out = []
    for t in taus:
        out.extend(annotations_of(t))
    return out


# brute-force LP oracle

def _solve_square(rows, rhs):
    """Gaussian elimination over Fractions; None when singular."""
    n = len(rows)
    m = [list(map(Fraction, r)) + [Fraction(b)] for r, b in zip(rows, rhs)]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return None
        m[c], m[piv] = m[piv], m[c]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c] / m[c][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [m[i][n] / m[i][i] for i in range(n)]


def vertex_minimum(n, ineqs, eqs, objective):
    """Minimum of objective . x over {A x <= b (ineqs), C x = d (eqs)}.

    Rows are (coefficients, rhs).  Enumerates every basic solution, so the
    region must be bounded.  Returns None if infeasible.
    """
    best = None
    need = n - len(eqs)
    if need < 0:
        return None
    for active in itertools.combinations(range(len(ineqs)), need):
        rows = [r for r, _ in eqs] + [ineqs[i][0] for i in active]
        rhs = [b for _, b in eqs] + [ineqs[i][1] for i in active]
        x = _solve_square(rows, rhs)
        if x is None:
            continue
        if any(sum(a * xi for a, xi in zip(r, x)) != b for r, b in eqs):
            continue
        if any(sum(a * xi for a, xi in zip(r, x)) > b for r, b in ineqs):
            continue
        val = sum(c * xi for c, xi in zip(objective, x))
        if best is None or val < best:
            best = val
    return best
