import pytest
from hypothesis import given, settings

from argtrace.actionlang import (
    Literal,
    acceptable,
    conj,
    disj,
    enunciate,
    ini,
    makes_acc,
    makes_unacc,
    neg,
    pos,
    present,
    run,
)
from argtrace.causality import (
    CausalAnalyzer,
    CausalLink,
    CauseKind,
    Occurrence,
    TimedFormula,
    actual_causes,
    causal_graph,
    direct_ness_causes,
    ness_causes,
    parse_query,
    persistence_span,
    sufficient_literal_sets,
)
from argtrace.errors import InputError, TargetNotInTrace, TargetNotTrue
from argtrace.translate import build_setting

from .conftest import graph_and_dialogue


def acc(x, t):
    return TimedFormula(Literal(acceptable(x)), t)


def not_acc(x, t):
    return TimedFormula(Literal(acceptable(x), False), t)


def O(e, t):
    return Occurrence(e, t)


@pytest.fixture(scope="module")
def an1(ex1):
    return CausalAnalyzer(ex1.trace, ex1.setting)


@pytest.mark.parametrize("t", [29, 30, 31])
def test_enunciation_of_n_sustains_its_acceptability(an1, t):
    assert an1.direct_ness_causes(acc("n", t)) == {O(enunciate("n"), 28)}


@pytest.mark.parametrize("t", [30, 31])
def test_attacks_by_n(an1, t):
    assert an1.direct_ness_causes(not_acc("c", t)) == {O(makes_unacc("n", "c"), 29)}
    assert an1.direct_ness_causes(not_acc("m", t)) == {O(makes_unacc("n", "m"), 29)}


def test_direct_cause_of_final_l(an1):
    assert an1.direct_ness_causes(acc("l", 31)) == {O(makes_acc("l"), 30)}


def test_overdetermination_at_19(an1):
    assert an1.direct_ness_causes(not_acc("c", 20)) == {
        O(makes_unacc("h", "c"), 19), O(makes_unacc("i", "c"), 19)}


def test_actual_causes(an1):
    assert O(enunciate("n"), 28) in an1.actual_causes(O(makes_unacc("n", "m"), 29))
    assert O(makes_unacc("n", "m"), 29) in an1.actual_causes(O(makes_acc("l"), 30))
    assert O(enunciate("e"), 6) in an1.actual_causes(O(makes_unacc("e", "d"), 7))
    # an occurrence never causes itself
    occ = O(makes_unacc("n", "m"), 29)
    assert occ not in an1.actual_causes(occ)


@pytest.mark.parametrize("t", [30, 31])
def test_n_is_ness_cause_of_m_rejection(an1, t):
    assert O(enunciate("n"), 28) in an1.ness_causes(not_acc("m", t))


def test_n_is_ness_cause_of_final_l(an1):
    assert O(enunciate("n"), 28) in an1.ness_causes(acc("l", 31))


def test_d_is_ness_cause_of_final_c_rejection(ex1, an1):
    causes = an1.ness_causes(not_acc("c", 31))
    assert O(enunciate("d"), 4) in causes
    assert len(causes) == 48
    assert O(enunciate("d"), 4) in ness_causes(ex1.trace, ex1.setting, not_acc("c", 31))


def test_second_order_has_no_d_cause_of_c_rejection(ex2):
    an = CausalAnalyzer(ex2.trace, ex2.setting)
    d_times = ex2.trace.time_of(enunciate("d"))
    for t in range(ex2.trace.final_time + 1):
        if ex2.trace.state_at(t)[acceptable("c")]:
            continue
        assert not any(O(enunciate("d"), td) in an.ness_causes(not_acc("c", t)) for td in d_times)


def test_causal_graph_chain(ex1):
    g = causal_graph(ex1.trace, ex1.setting, acc("l", 31))
    assert CausalLink(O(makes_acc("l"), 30), acc("l", 31), CauseKind.DIRECT) in g.links
    assert CausalLink(O(makes_unacc("n", "m"), 29), O(makes_acc("l"), 30), CauseKind.ACTUAL) in g.links
    assert CausalLink(O(enunciate("n"), 28), O(makes_unacc("n", "m"), 29), CauseKind.ACTUAL) in g.links
    assert CausalLink(O(enunciate("n"), 28), acc("l", 31), CauseKind.NESS) in g.links
    assert g.causes(CauseKind.DIRECT) == {O(makes_acc("l"), 30)}
    # every ness cause appears exactly once as a direct or ness link to the root
    to_root = [l for l in g.links if l.effect == g.root]
    assert len(to_root) == len({l.cause for l in to_root})
    assert {l.cause for l in to_root} == CausalAnalyzer(ex1.trace, ex1.setting).ness_causes(acc("l", 31))


def test_causes_go_back_in_time(ex1, an1):
    g = an1.causal_graph(not_acc("c", 31))
    for link in g.links:
        assert link.cause.time < link.effect.time


def test_initial_events_reach_the_bounded_past(an1):
    causes = an1.ness_causes(acc("l", 31))
    assert any(o.time == -1 for o in causes)
    initial = an1.direct_ness_causes(not_acc("a", 0))
    assert initial == {O(ini(Literal(acceptable("a"), False)), -1)}


def test_wrapper_functions_match(ex1, an1):
    occ = O(makes_unacc("n", "m"), 29)
    assert actual_causes(ex1.trace, ex1.setting, occ) == an1.actual_causes(occ)
    assert direct_ness_causes(ex1.trace, ex1.setting, acc("l", 31)) == an1.direct_ness_causes(acc("l", 31))


def test_errors(an1):
    with pytest.raises(TargetNotTrue):
        an1.direct_ness_causes(acc("c", 31))
    with pytest.raises(TargetNotTrue):
        an1.ness_causes(acc("l", 99))
    with pytest.raises(TargetNotInTrace):
        an1.actual_causes(O(makes_acc("l"), 3))


def test_sufficient_sets_are_minimal(ex1):
    s = ex1.trace.final_state
    f = conj(pos(present("c")), disj(neg(acceptable("d")), neg(acceptable("h")), pos(acceptable("b"))))
    sets = sufficient_literal_sets(s, f)
    assert len(sets) == 3
    assert all(pos(present("c")) in lits and len(lits) == 2 for lits in sets)
    assert sufficient_literal_sets(s, pos(acceptable("c"))) == frozenset()


def test_compound_target(an1):
    f = TimedFormula(conj(pos(acceptable("n")), neg(acceptable("c"))), 31)
    assert an1.direct_ness_causes(f) == {O(enunciate("n"), 28), O(makes_unacc("n", "c"), 29)}


def test_persistence_span(ex1):
    lit = Literal(acceptable("c"), False)
    assert persistence_span(ex1.trace, O(makes_unacc("n", "c"), 29), lit, 30) == (30, 31)
    assert persistence_span(ex1.trace, O(enunciate("n"), 28), Literal(acceptable("n")), 29) == (29, 31)


@pytest.mark.parametrize("text, want", [
    ("acc(l)@31", acc("l", 31)),
    ("not-acc(c)@final", not_acc("c", 31)),
    ("present(n) @ 29", TimedFormula(Literal(present("n")), 29)),
])
def test_parse_query(ex1, text, want):
    assert parse_query(text, ex1.trace) == want


@pytest.mark.parametrize("text", ["acc(l)", "acc(l)@x", "rejected(l)@3", ""])
def test_bad_queries(ex1, text):
    with pytest.raises(InputError):
        parse_query(text, ex1.trace)


def test_unknown_argument_in_query(ex1):
    with pytest.raises(TargetNotTrue):
        parse_query("acc(zz)@3", ex1.trace)


@settings(max_examples=40, deadline=None)
@given(graph_and_dialogue(max_size=7))
def test_ness_is_closed_under_actual_causes(gd):
    g, d = gd
    setting = build_setting(d, g)
    tr = run(setting)
    an = CausalAnalyzer(tr, setting)
    for x in sorted(g.arguments):
        lit = Literal(acceptable(x), tr.final_state[acceptable(x)])
        target = TimedFormula(lit, tr.final_time)
        causes = an.ness_causes(target)
        assert an.direct_ness_causes(target) <= causes
        for occ in causes:
            assert an.immediate_actual_causes(occ) <= causes
            assert occ.time < tr.final_time
