import importlib.util
import sys
from collections import Counter

import pytest
from lark.exceptions import LarkError

from argtrace.actionlang import Event, Literal, acceptable, enunciate, ini, makes_unacc
from argtrace.asp import (
    SECTION_HEADERS,
    SOLVER_ENV,
    Directive,
    Fn,
    Str,
    Var,
    check_against_engine,
    compare_with_engine,
    emit_program,
    event_term,
    id_term,
    literal_term,
    parse_answer,
    parse_program,
    parse_term,
    solver_bridge,
    term_event,
    term_literal,
)
from argtrace.errors import SolverDisagreement, SolverParseError, SolverUnavailable
from argtrace.graph import make_graph
from argtrace.translate import Dialogue, build_setting

from .conftest import load_example

HAS_CLINGO = importlib.util.find_spec("clingo") is not None


def _sections(text):
    out, current = {}, None
    for line in text.splitlines():
        if line in SECTION_HEADERS:
            current = line
            out[current] = []
        elif line.strip():
            out[current].append(line)
    return out


@pytest.fixture(scope="module")
def prog1(ex1):
    return emit_program(ex1.setting, horizon=ex1.trace.final_time)


def test_sections_in_order(prog1):
    text = prog1.text
    positions = [text.index(h) for h in SECTION_HEADERS]
    assert positions == sorted(positions)


def test_fact_counts(prog1):
    stmts = parse_program(prog1.text)
    facts = Counter(s.head.name for s in stmts if getattr(s, "is_fact", False))
    assert facts["argument"] == 14
    assert facts["canAttack"] == 15
    assert facts["seq"] == 14
    seq = [s.head for s in stmts if getattr(s, "is_fact", False) and s.head.name == "seq"]
    assert len({o for _, o in (f.args for f in seq)}) == 13


def test_shared_rank_facts(prog1):
    seq = _sections(prog1.text)["%% sequence"]
    assert "seq(enunciate(h),7)." in seq and "seq(enunciate(i),7)." in seq


def test_facts_round_trip(ex1, prog1):
    stmts = parse_program(prog1.text)
    args = {s.head for s in stmts if getattr(s, "is_fact", False) and s.head.name == "argument"}
    assert args == {Fn("argument", (Fn(x),)) for x in ex1.graph.arguments}
    attacks = {s.head for s in stmts if getattr(s, "is_fact", False) and s.head.name == "canAttack"}
    assert attacks == {Fn("canAttack", (Fn(y), Fn(x))) for y, x in ex1.graph.attacks}
    inits = {term_literal(s.head.args[0]) for s in stmts if getattr(s, "is_fact", False) and s.head.name == "init"}
    assert inits == ex1.setting.context.initial_state.literals()
    assert Directive("const", ("horizon", 31)) in stmts


def test_one_trigger_rule_per_event(ex1, prog1):
    rules = [l for l in _sections(prog1.text)["%% context"] if l.startswith("tri(")]
    non_initial = [e for e in ex1.setting.context.events if e.kind != "ini"]
    assert len(rules) == len(non_initial)


def test_predicate_shapes(prog1):
    text = prog1.text
    for pred in ("o(", "ness(", "h(", "actual(", "dness("):
        assert pred in text


def test_empty_setting():
    setting = build_setting(Dialogue(()), make_graph([], []))
    prog = emit_program(setting)
    sections = _sections(prog.text)
    assert set(sections) == set(SECTION_HEADERS)
    assert sections["%% sequence"] == []
    stmts = parse_program(prog.text)
    assert not any(getattr(s, "is_fact", False) and s.head.name in ("argument", "seq") for s in stmts)


def test_default_horizon_is_the_safety_cap():
    setting = build_setting(Dialogue.from_order("ab"), make_graph("ab", [("b", "a")]))
    assert "#const horizon=16." in emit_program(setting).text


@pytest.mark.parametrize("name, term", [("a", Fn("a")), ("x10", Fn("x10")), ("Big", Str("Big")), ("1a", Str("1a"))])
def test_identifiers(name, term):
    assert id_term(name) == term
    assert term_literal(parse_term(str(literal_term(Literal(acceptable(name), False))))) == \
        Literal(acceptable(name), False)


@pytest.mark.parametrize("event", [enunciate("a"), makes_unacc("B", "c"), ini(Literal(acceptable("a"), False))])
def test_event_terms_round_trip(event):
    assert term_event(parse_term(str(event_term(event)))) == event


def test_grammar_details():
    stmts = parse_program('p(X) :- q(X,_), not r(X), X != -1, X < 2+3*4.\n:- s.\n#show p/1.\nt(1..3).')
    rule = stmts[0]
    assert rule.head == Fn("p", (Var("X"),))
    assert len(rule.body) == 4
    assert rule.body[2].right == -1
    assert stmts[1].head is None
    with pytest.raises(LarkError):
        parse_program("p(X :- q.")


ANSWER = """clingo version 5.8.2
Reading from program.lp
Solving...
Answer: 1
o(enunciate(a),0) holds(a(a),1) holds(p(a),1) ness(o(enunciate(a),0),h(a(a),1)) dness(o(enunciate(a),0),h(a(a),1))
SATISFIABLE
"""


def test_parse_answer():
    ans = parse_answer(ANSWER)
    assert ans.occurrences == {(enunciate("a"), 0)}
    assert (Literal(acceptable("a")), 1) in ans.holds
    assert ans.ness == {((enunciate("a"), 0), Literal(acceptable("a")), 1)}
    assert ans.final_acceptable() == {"a"}


@pytest.mark.parametrize("output", ["", "UNSATISFIABLE\n", "Answer: 1\no(enunciate(a),0\n",
                                    "Answer: 1\nness(a,b)\n"])
def test_malformed_answers(output):
    with pytest.raises(SolverParseError):
        parse_answer(output)


def test_no_solver_configured(monkeypatch, prog1):
    monkeypatch.delenv(SOLVER_ENV, raising=False)
    assert solver_bridge(prog1) is None


def test_missing_solver_executable(prog1):
    with pytest.raises(SolverUnavailable) as err:
        solver_bridge(prog1, "definitely-not-a-solver-binary")
    assert err.value.exit_code == 4


def _fake_solver(tmp_path, text):
    out = tmp_path / "answer.txt"
    out.write_text(text, encoding="utf-8")
    script = tmp_path / "fake_solver.py"
    script.write_text("import sys\nassert open(sys.argv[-1]).read().startswith('%% sequence')\n"
                      f"print(open({str(out)!r}).read())\n", encoding="utf-8")
    return f"{sys.executable} {script}"


def _engine_answer(tr):
    atoms = [f"o({event_term(e)},{t})" for e, t in tr.occurrences()]
    atoms += [f"holds({literal_term(l)},{t})" for t, s in enumerate(tr.state_trace) for l in s.literals()]
    return "Answer: 1\n" + " ".join(atoms) + "\nSATISFIABLE\n"


def test_fake_solver_agreement(tmp_path, ex1, prog1):
    ans = solver_bridge(prog1, _fake_solver(tmp_path, _engine_answer(ex1.trace)))
    assert compare_with_engine(ans, ex1.trace, ex1.setting) == []


def test_fake_solver_from_environment(tmp_path, monkeypatch, ex1, prog1):
    monkeypatch.setenv(SOLVER_ENV, _fake_solver(tmp_path, _engine_answer(ex1.trace)))
    assert solver_bridge(prog1).final_acceptable() == set("begjkln")


def test_disagreement_is_reported(ex1):
    ans = parse_answer(_engine_answer(ex1.trace))
    ans.occurrences.discard((enunciate("n"), 28))
    ans.occurrences.add((Event("makesAcc", ("zz",)), 3))
    diff = compare_with_engine(ans, ex1.trace)
    assert len(diff) == 2
    with pytest.raises(SolverDisagreement) as err:
        check_against_engine(ans, ex1.trace)
    assert err.value.exit_code == 4


def test_ness_disagreement_is_reported(ex1):
    ans = parse_answer(_engine_answer(ex1.trace))
    ans.ness.add(((enunciate("a"), 0), Literal(acceptable("l")), 31))
    assert any("ness causes of a(l)@31" in line for line in compare_with_engine(ans, ex1.trace, ex1.setting))


@pytest.mark.solver
@pytest.mark.skipif(not HAS_CLINGO, reason="clingo module not installed")
@pytest.mark.parametrize("name", ["ex1", "ex2"])
def test_clingo_agrees_with_engine(request, name):
    ex = request.getfixturevalue(name)
    prog = emit_program(ex.setting, horizon=ex.trace.final_time)
    ans = solver_bridge(prog, f"{sys.executable} -m clingo {{program}}")
    assert compare_with_engine(ans, ex.trace, ex.setting) == []
    assert ans.final_acceptable() == set("begjkln")
    assert len(ans.ness) > 0


@pytest.mark.solver
@pytest.mark.skipif(not HAS_CLINGO, reason="clingo module not installed")
def test_clingo_second_order_has_no_d_cause():
    # same check as the engine's, on the solver side, for every target time
    ex = load_example("example2.json")
    tr = ex.trace
    targets = [(Literal(acceptable("c"), False), t) for t in range(tr.final_time + 1)
               if not tr.state_at(t)[acceptable("c")]]
    prog = emit_program(ex.setting, horizon=tr.final_time, targets=targets)
    ans = solver_bridge(prog, f"{sys.executable} -m clingo")
    assert ans.ness
    assert not any(occ[0] == enunciate("d") for occ, _, _ in ans.ness)
    assert compare_with_engine(ans, tr, ex.setting) == []
