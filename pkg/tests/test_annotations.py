from fractions import Fraction

import pytest

from rabc import analyze_program, parse_program
from rabc.annotations import (
    BOT, BoxR, IntR, ListR, MutR, Session, SharedR, ShapeError, TypingError, ctx_read,
    ctx_write, enrich, equate, erase, join, meet, prophesy, render, share, subtype, wellformed,
)
from rabc.inference import Infeasible
from rabc.syntax.ast import Deref, ListT, MutRefT, SharedRefT, Var


def notes(cs):
    return [c.note for c in cs]


def test_enrich_and_erase():
    s = Session()
    t = MutRefT(SharedRefT(ListT()))
    tau = enrich(t, s)
    assert isinstance(tau, MutR) and isinstance(tau.cur, SharedR)
    assert erase(tau) == t
    assert len(s.vars) == 2


def test_subtype_list_and_mutable():
    s = Session()
    a, b = ListR(s.fresh()), ListR(s.fresh())
    [c] = subtype(a, b)
    assert c.satisfied({a.alpha: Fraction(1), b.alpha: Fraction(2)})
    assert not c.satisfied({a.alpha: Fraction(3), b.alpha: Fraction(2)})
    m1 = MutR(ListR(s.fresh()), ListR(s.fresh()))
    m2 = MutR(ListR(s.fresh()), ListR(s.fresh()))
    cs = subtype(m1, m2)
    # current is covariant, prophecy contravariant
    assert {frozenset(c.expr.terms.items()) for c in cs} == {
        frozenset({m1.cur.alpha: 1, m2.cur.alpha: -1}.items()),
        frozenset({m2.proph.alpha: 1, m1.proph.alpha: -1}.items()),
    }


def test_subtype_into_bot_zeroes_potential():
    s = Session()
    [c] = subtype(ListR(s.fresh()), BOT)
    assert c.expr.const == 0 and list(c.expr.terms.values()) == [1]
    assert subtype(BOT, ListR(s.fresh())) == []


def test_shape_mismatch():
    s = Session()
    with pytest.raises(ShapeError):
        subtype(ListR(s.fresh()), IntR())


def test_wellformed_mutable_has_dropping_condition():
    s = Session()
    m = MutR(ListR(s.fresh()), ListR(s.fresh()))
    assert any("drop" in n for n in notes(wellformed(m)))


def test_share_splits_potential():
    s = Session()
    t = BoxR(ListR(s.fresh()))
    t1, t2, [c] = share(t, s)
    assert c.rel == "==" and set(c.variables()) == {t.inner.alpha, t1.inner.alpha, t2.inner.alpha}
    with pytest.raises(ShapeError):
        share(MutR(ListR(s.fresh()), ListR(s.fresh())), s)
    assert share(BOT, s)[:2] == (BOT, BOT)


def test_prophesy_is_fresh_and_unconstrained():
    s = Session()
    t = ListR(s.fresh())
    p, cs = prophesy(t, s)
    assert cs == [] and p.alpha != t.alpha


def test_meet_and_join_of_lists():
    s = Session()
    a, b = ListR(s.fresh()), ListR(s.fresh())
    m, cs = meet(a, b, s)
    assert all("Meet-List" in n for n in notes(cs)) and len(cs) == 2
    j, cs = join(a, b, s)
    assert all("Join-List" in n for n in notes(cs)) and len(cs) == 2
    assert meet(a, a, s) == (a, [])


def test_meet_with_bot():
    s = Session()
    a = ListR(s.fresh())
    t, cs = meet(a, BOT, s)
    assert t == BOT and notes(cs) and "Meet-Bot" in cs[0].note


def test_equate():
    s = Session()
    a, b = ListR(s.fresh()), ListR(s.fresh())
    [c] = equate(a, b)
    assert c.rel == "=="


def test_ctx_read_write():
    s = Session()
    m = MutR(ListR(s.fresh()), ListR(s.fresh()))
    ctx = {"r": m}
    assert ctx_read(ctx, Deref(Var("r"))) == m.cur
    new = ListR(s.fresh())
    out, cs = ctx_write(ctx, Deref(Var("r")), new)
    assert out["r"] == MutR(new, m.proph)
    assert any("Wt-Mutable" in n for n in notes(cs))
    with pytest.raises(TypingError):
        ctx_read({"x": BOT}, Deref(Var("x")))


def test_render():
    s = Session()
    m = MutR(ListR(s.fresh()), ListR(s.fresh()))
    a = {m.cur.alpha: Fraction(2), m.proph.alpha: Fraction(0)}
    assert render(m, a) == "&mut list(2, 0)"
    assert render(m, a, current_only=True) == "&mut list(2)"


# inference

def test_signatures_of_corpus(analysis):
    expect = {
        "iter": ([2], 1), "iter_twice": ([4], 2), "sum_rec": ([6], 1), "sum2": ([12], 2),
        "rev": ([9], 4), "rev2": ([18], 8), "dup": ([11], 1), "dup2": ([33], 2),
        "end_m": ([3], 1), "append": ([3], 2), "concat": ([3], 6),
    }
    for name, (ann, d) in expect.items():
        first = next(iter(analysis.param_annotations(name).values()))
        assert (first[:1], analysis.delta(name)) == (ann, d), name


def test_signature_rendering(analysis):
    assert analysis.render_signature("iter") == "iter : fn(l: &list(2)) -> unit | 1"


def test_all_groups_satisfied(analysis):
    for g in analysis.groups:
        assert not g.problem.violated(analysis.assignment)


def test_mutual_recursion_shares_a_group():
    src = """
    fn even(l: &list) -> unit { let h: i32; let t: box list;
        match *l { nil => { tick(1); }, cons(h, t) => { tick(1); ret := odd(&*t); } }; return; }
    fn odd(l: &list) -> unit { let h: i32; let t: box list;
        match *l { nil => { tick(1); }, cons(h, t) => { tick(2); ret := even(&*t); } }; return; }
    """
    res = analyze_program(parse_program(src))
    groups = [sorted(g.members) for g in res.groups]
    assert ["even", "odd"] in groups
    # one coefficient for both parities: 1 + 2 per two elements forces 3/2 each
    assert res.param_annotations("even")["l"] == [Fraction(3, 2)]
    assert res.param_annotations("odd")["l"] == [Fraction(3, 2)]
    assert (res.delta("even"), res.delta("odd")) == (1, Fraction(3, 2))


def test_use_after_move_is_a_typing_error():
    src = "fn f(l: list) -> list { let a: list; a := move l; ret := move l; return; }"
    with pytest.raises(TypingError, match="moved"):
        analyze_program(parse_program(src))


def test_bound_is_on_net_cost():
    src = "fn f() -> unit { tick(3); tick(-2); return; }"
    res = analyze_program(parse_program(src))
    assert res.delta("f") == 1


def test_unpayable_recursion_is_infeasible():
    # every call costs 1 more than the bound it promises its caller
    src = "fn f(l: &list) -> unit { tick(1); ret := f(&*l); return; }"
    with pytest.raises(Infeasible) as info:
        analyze_program(parse_program(src))
    assert info.value.group == ["f"] and info.value.hint
