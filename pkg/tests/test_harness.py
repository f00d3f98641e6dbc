from fractions import Fraction

from rabc.annotations import BOT, BoxR, ListR, MutR, Session, SharedR
from rabc.harness import (
    bound_coefficients, check_soundness, fuzz_soundness, generate_inputs, measure_and_fit,
    potential, potential_store, scaffold_args, with_delta_shift,
)
from rabc.interpreter import UNDEF, Borrow, BoxV, make_list
from rabc.syntax.ast import Var


def test_potential_of_each_shape():
    s = Session()
    a_, b_ = s.fresh(), s.fresh()
    a = {a_: Fraction(3), b_: Fraction(1)}
    xs = make_list([1, 2])
    assert potential(xs, ListR(a_), a) == 6
    assert potential(BoxV(xs), BoxR(ListR(a_)), a) == 6
    assert potential(Borrow(Var("o"), xs), SharedR(ListR(a_)), a) == 6
    assert potential(Borrow(Var("o"), xs), MutR(ListR(a_), ListR(b_)), a) == 4
    assert potential(xs, BOT, a) == 0
    assert potential(UNDEF, ListR(a_), a) == 0


def test_potential_store_qualifies_names():
    s = Session()
    v = s.fresh()
    V = {"l@3": make_list([1, 2, 3])}
    assert potential_store(V, {"l": ListR(v)}, {v: Fraction(2)}, frame=3) == 6


def test_generate_inputs(corpus):
    weak = corpus.function("weak")
    inputs = generate_inputs(weak, 2)
    assert sorted(i[0] for i in inputs) == [False, True]
    assert all(i[1] == [1, 2] and i[2] == [] for i in inputs)


def test_scaffold_hides_owners(corpus):
    args, store = scaffold_args(corpus.function("nested_m_m"), [[1]])
    assert set(store) == {"owner:l", "owner:l'"}
    assert isinstance(args[0], Borrow)


def test_soundness_report_is_exact(corpus, analysis):
    r = check_soundness(corpus, analysis, "iter", [[1, 2, 3]])
    assert (r.phi_entry, r.phi_exit, r.cost, r.delta) == (6, 0, 7, 1)
    assert r.slack == 0 and r.sound


def test_delta_shift_breaks_bound(corpus, analysis):
    a = with_delta_shift(analysis, "iter", -1)
    reports = fuzz_soundness(corpus, analysis, "iter", range(3), a)
    assert all(not r.sound for r in reports)
    assert analysis.delta("iter") == 1


def test_branch_merged_bound_is_an_upper_bound(corpus, analysis):
    reports = fuzz_soundness(corpus, analysis, "weak", range(5))
    assert all(r.sound for r in reports)
    assert any(r.slack > 0 for r in reports)


def test_measure_and_fit(corpus, analysis):
    rep = measure_and_fit(corpus, analysis, "rev", range(6))
    assert rep.costs == [9 * n + 4 for n in range(6)]
    assert rep.bound_coeffs == [4, 9]
    assert rep.sound and rep.tight
    assert rep.to_json()["bound_coeffs"] == [4, 9]


def test_bound_coefficients_use_current_minus_prophecy(corpus, analysis):
    assert bound_coefficients(corpus, analysis, "update") == [7, 2]
