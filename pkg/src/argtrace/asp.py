"""Logic-program emission for a setting, its grammar, and an optional solver bridge.

The program has four sections: the sequence facts, the context (facts plus
one triggering rule per event), the fixed execution semantics, and the fixed
causality rules.  The native engine remains the reference; solving the
program is a differential check only.
"""

from __future__ import annotations

import os
import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Union

from lark import Lark, Transformer
from lark.exceptions import LarkError

from .actionlang import (
    And,
    Event,
    EventClass,
    Fluent,
    Formula,
    Literal,
    Or,
    Setting,
    Traces,
    safety_cap,
)
from .causality import CausalAnalyzer, TimedFormula
from .errors import SolverDisagreement, SolverParseError, SolverUnavailable

SOLVER_ENV = "ARGTRACE_SOLVER"

SECTION_HEADERS = ("%% sequence", "%% context", "%% semantics", "%% causality")


@dataclass(frozen=True)
class Fn:
    name: str
    args: tuple = ()

    def __str__(self):
        return self.name if not self.args else f"{self.name}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Str:
    value: str

    def __str__(self):
        return '"' + self.value.replace("\\", "\\\\").replace('"', '\\"') + '"'


@dataclass(frozen=True)
class Op:
    op: str
    left: object
    right: object

    def __str__(self):
        return f"{self.left}{self.op}{self.right}"


Term = Union[Fn, Var, Str, Op, int]


@dataclass(frozen=True)
class Naf:
    atom: Fn


@dataclass(frozen=True)
class Comparison:
    op: str
    left: Term
    right: Term


@dataclass(frozen=True)
class Statement:
    head: Fn | None
    body: tuple = ()

    @property
    def is_fact(self) -> bool:
        return self.head is not None and not self.body


@dataclass(frozen=True)
class Directive:
    name: str
    args: tuple


class _ToAst(Transformer):
    def start(self, items):
        return list(items)

    def rule(self, items):
        head = items[0]
        body = tuple(items[1]) if len(items) > 1 else ()
        return Statement(head, body)

    def constraint(self, items):
        return Statement(None, tuple(items[0]))

    def const_directive(self, items):
        return Directive("const", (str(items[0]), items[1]))

    def show_directive(self, items):
        return Directive("show", (str(items[0]), int(items[1])))

    def body(self, items):
        return list(items)

    def naf(self, items):
        return Naf(items[0])

    def comparison(self, items):
        return Comparison(str(items[1]), items[0], items[2])

    def atom(self, items):
        return Fn(str(items[0]), tuple(items[1:]))

    function = atom

    def var(self, items):
        return Var(str(items[0]))

    def anon(self, items):
        return Var("_")

    def int(self, items):
        return int(items[0])

    def string(self, items):
        raw = str(items[0])[1:-1]
        return Str(re.sub(r"\\(.)", r"\1", raw))

    def add(self, items):
        return Op("+", items[0], items[1])

    def sub(self, items):
        return Op("-", items[0], items[1])

    def mul(self, items):
        return Op("*", items[0], items[1])

    def interval(self, items):
        return Op("..", items[0], items[1])

    def neg(self, items):
        return -items[0] if isinstance(items[0], int) else Op("-", 0, items[0])


@lru_cache(maxsize=None)
def _parser() -> Lark:
    grammar = resources.files("argtrace").joinpath("asp_dialect.lark").read_text(encoding="utf-8")
    return Lark(grammar, parser="lalr", maybe_placeholders=False)


@lru_cache(maxsize=None)
def _term_parser() -> Lark:
    grammar = resources.files("argtrace").joinpath("asp_dialect.lark").read_text(encoding="utf-8")
    return Lark(grammar, parser="lalr", start="term", maybe_placeholders=False)


def parse_program(text: str) -> list:
    """Parse program text into :class:`Statement` and :class:`Directive` values."""
    return _ToAst().transform(_parser().parse(text))


def parse_term(text: str) -> Term:
    return _ToAst().transform(_term_parser().parse(text))


# engine values <-> terms

_CONST = re.compile(r"^[a-z][A-Za-z0-9_]*$")


def id_term(name: str) -> Term:
    return Fn(name) if _CONST.match(name) else Str(name)


def fluent_term(f: Fluent) -> Fn:
    return Fn(f.kind, tuple(id_term(a) for a in f.args))


def literal_term(lit: Literal) -> Fn:
    t = fluent_term(lit.fluent)
    return t if lit.positive else Fn("neg", (t,))


def event_term(e: Event) -> Fn:
    if e.kind == "ini":
        return Fn("ini", (literal_term(e.args[0]),))
    return Fn(e.kind, tuple(id_term(a) for a in e.args))


def _id_of(t: Term) -> str:
    if isinstance(t, Fn) and not t.args:
        return t.name
    if isinstance(t, Str):
        return t.value
    raise SolverParseError(f"not an argument identifier: {t}")


def term_literal(t: Term) -> Literal:
    if isinstance(t, Fn) and t.name == "neg" and len(t.args) == 1:
        return ~term_literal(t.args[0])
    if isinstance(t, Fn) and t.args:
        return Literal(Fluent(t.name, tuple(_id_of(a) for a in t.args)), True)
    raise SolverParseError(f"not a fluent literal: {t}")


def term_event(t: Term) -> Event:
    if not isinstance(t, Fn) or not t.args:
        raise SolverParseError(f"not an event: {t}")
    if t.name == "ini":
        return Event("ini", (term_literal(t.args[0]),))
    return Event(t.name, tuple(_id_of(a) for a in t.args))


def _term_int(t: Term) -> int:
    if isinstance(t, int):
        return t
    if isinstance(t, Op) and t.op == "-" and t.left == 0 and isinstance(t.right, int):
        return -t.right
    raise SolverParseError(f"not an integer: {t}")


# emission

def _fact(name: str, *args: Term) -> str:
    return f"{Fn(name, tuple(args))}."


def _formula_conditions(f: Formula) -> tuple[list[Literal], list[list[Literal]]]:
    """Split a trigger into required literals and per-clause alternatives."""
    parts = f.parts if isinstance(f, And) else (f,)
    required: list[Literal] = []
    alternatives: list[list[Literal]] = []
    for p in parts:
        if isinstance(p, Literal):
            required.append(p)
        elif isinstance(p, Or) and all(isinstance(q, Literal) for q in p.parts):
            alternatives.append(list(p.parts))
        else:
            raise ValueError(f"trigger shape not supported by the emitter: {p}")
    return required, alternatives


SEMANTICS_RULES = """\
time(-1..horizon).
step(0..horizon).
instant(0..horizon+1).
holds(L,0) :- init(L).
o(ini(L),-1) :- init(L).
eff(ini(L),L) :- init(L).
complement(F,neg(F)) :- fluent(F).
complement(neg(F),F) :- fluent(F).
above(E1,E2) :- prio(E1,E2).
above(E1,E3) :- above(E1,E2), prio(E2,E3).
triggered(E,T) :- exogenous(E), tri(E,T).
preempted(E,T) :- triggered(E,T), above(E2,E), o(E2,T).
o(E,T) :- triggered(E,T), not preempted(E,T).
busy(T) :- triggered(_,T).
rank(O) :- seq(_,O).
done(O,T) :- seq(A,O), o(A,T1), step(T), T1 < T.
earlier(O,T) :- rank(O), rank(O2), O2 < O, step(T), not done(O2,T).
due(O,T) :- rank(O), step(T), not done(O,T), not earlier(O,T).
o(A,T) :- seq(A,O), due(O,T), not busy(T).
:- o(A,T), action(A), not tri(A,T).
clobbered(L,T) :- holds(L,T), complement(L,C), o(E,T), eff(E,C).
holds(L,T+1) :- o(E,T), eff(E,L), step(T).
holds(L,T+1) :- holds(L,T), step(T), not clobbered(L,T).
"""

CAUSALITY_RULES = """\
h(L,T) :- holds(L,T), instant(T).
estab(L,0) :- holds(L,0).
estab(L,T) :- holds(L,T), complement(L,C), holds(C,T-1), instant(T), T > 0.
since(L,T,T) :- estab(L,T).
since(L,T0,T+1) :- since(L,T0,T), holds(L,T+1), instant(T+1).
dness(o(E,T0-1),h(L,T)) :- since(L,T0,T), o(E,T0-1), eff(E,L).
uses(E,L,T) :- o(E,T), cond(E,L).
uses(E,L,T) :- o(E,T), condor(E,K,L), holds(L,T).
actual(C,o(E,T)) :- uses(E,L,T), dness(C,h(L,T)).
ness(C,X) :- target(X), dness(C,X).
ness(C1,X) :- ness(C2,X), actual(C1,C2).
#show o/2.
#show holds/2.
#show dness/2.
#show actual/2.
#show ness/2.
"""


@dataclass(frozen=True)
class ProgramText:
    sequence: str
    context: str
    semantics: str
    causality: str

    @property
    def text(self) -> str:
        parts = zip(SECTION_HEADERS, (self.sequence, self.context, self.semantics, self.causality))
        return "\n".join(f"{head}\n{body}" for head, body in parts)

    def __str__(self):
        return self.text


def emit_program(setting: Setting, horizon: int | None = None,
                 targets: Iterable[tuple[Literal, int]] | None = None) -> ProgramText:
    """Render the four-part program; ``horizon`` defaults to the context's time range.

    NESS causes are derived only for ``targets``; by default every
    acceptability literal at time ``horizon``.
    """
    ctx = setting.context
    if horizon is None:
        horizon = ctx.horizon if ctx.horizon is not None else safety_cap(setting)
    if targets is None:
        targets = [(Literal(f, pol), horizon) for f in sorted(ctx.fluents) if f.kind == "a" for pol in (True, False)]
    seq_lines = [_fact("seq", event_term(e), o) for e, o in setting.sequence.ranked]

    ctx_lines = [f"#const horizon={horizon}."]
    args = sorted(f.args[0] for f in ctx.fluents if f.kind == "p")
    attacks = sorted(f.args for f in ctx.fluents if f.kind == "cA")
    ctx_lines += [_fact("argument", id_term(x)) for x in args]
    ctx_lines += [_fact("canAttack", id_term(y), id_term(x)) for y, x in attacks]
    ctx_lines += [_fact("fluent", fluent_term(f)) for f in sorted(ctx.fluents)]
    ctx_lines += [_fact("init", literal_term(l)) for l in sorted(ctx.initial_state.literals())]
    for e, spec in ctx.events.items():
        if spec.cls is EventClass.INITIAL:
            continue
        et = event_term(e)
        ctx_lines.append(_fact("action" if spec.cls is EventClass.ACTION else "exogenous", et))
        ctx_lines += [_fact("eff", et, literal_term(l)) for l in spec.eff]
        required, alternatives = _formula_conditions(spec.tri)
        ctx_lines += [_fact("cond", et, literal_term(l)) for l in required]
        body = ["step(T)"] + [f"holds({literal_term(l)},T)" for l in required]
        for k, alts in enumerate(alternatives):
            ctx_lines += [_fact("condor", et, k, literal_term(l)) for l in alts]
            body.append(f"sat({et},{k},T)")
        ctx_lines.append(f"tri({et},T) :- {', '.join(body)}.")
    if any(line.startswith("condor(") for line in ctx_lines):
        ctx_lines.append("sat(E,K,T) :- condor(E,K,L), holds(L,T), step(T).")
    ctx_lines += [_fact("prio", event_term(hi), event_term(lo)) for hi, lo in sorted(ctx.priority)]

    def block(lines):
        return "".join(line + "\n" for line in lines)

    target_lines = [_fact("target", Fn("h", (literal_term(l), t))) for l, t in targets]
    return ProgramText(block(seq_lines), block(ctx_lines), SEMANTICS_RULES, block(target_lines) + CAUSALITY_RULES)


# solver bridge

@dataclass
class AnswerSet:
    occurrences: set[tuple[Event, int]] = field(default_factory=set)
    holds: set[tuple[Literal, int]] = field(default_factory=set)
    ness: set[tuple[tuple[Event, int], Literal, int]] = field(default_factory=set)

    def final_time(self) -> int:
        return max((t for _, t in self.holds), default=0)

    def final_acceptable(self) -> frozenset[str]:
        t = self.final_time()
        return frozenset(l.fluent.args[0] for l, tt in self.holds
                         if tt == t and l.positive and l.fluent.kind == "a")


def _split_atoms(line: str) -> list[str]:
    atoms, depth, cur, in_str = [], 0, [], False
    for ch in line:
        if ch == '"':
            in_str = not in_str
        if not in_str:
            if ch in "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch.isspace() and depth == 0:
                if cur:
                    atoms.append("".join(cur))
                    cur = []
                continue
        cur.append(ch)
    if cur:
        atoms.append("".join(cur))
    return atoms


def parse_answer(output: str) -> AnswerSet:
    """Decode the last answer set printed by a clingo-style solver."""
    lines = output.splitlines()
    starts = [k for k, line in enumerate(lines) if line.startswith("Answer:")]
    if not starts:
        raise SolverParseError("solver output contains no answer set")
    answer = AnswerSet()
    line = lines[starts[-1] + 1] if starts[-1] + 1 < len(lines) else ""
    for raw in _split_atoms(line):
        try:
            atom = parse_term(raw)
        except LarkError as exc:
            raise SolverParseError(f"cannot parse atom {raw!r}") from exc
        if not isinstance(atom, Fn):
            raise SolverParseError(f"not an atom: {raw!r}")
        if atom.name == "o" and len(atom.args) == 2:
            answer.occurrences.add((term_event(atom.args[0]), _term_int(atom.args[1])))
        elif atom.name == "holds" and len(atom.args) == 2:
            answer.holds.add((term_literal(atom.args[0]), _term_int(atom.args[1])))
        elif atom.name == "ness" and len(atom.args) == 2:
            occ, h = atom.args
            if not (isinstance(occ, Fn) and occ.name == "o" and isinstance(h, Fn) and h.name == "h"):
                raise SolverParseError(f"malformed ness atom {raw!r}")
            answer.ness.add(((term_event(occ.args[0]), _term_int(occ.args[1])),
                             term_literal(h.args[0]), _term_int(h.args[1])))
    return answer


def solver_command(explicit: str | None = None) -> str | None:
    return explicit or os.environ.get(SOLVER_ENV) or None


def solver_bridge(prog: ProgramText, command: str | None = None, timeout: float = 120.0) -> AnswerSet | None:
    """Solve ``prog`` with an external solver; None when no solver is configured.

    ``command`` may contain ``{program}``; otherwise the program path is appended.
    """
    command = solver_command(command)
    if command is None:
        return None
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "program.lp"
        path.write_text(prog.text, encoding="utf-8")
        argv = shlex.split(command.replace("{program}", shlex.quote(str(path))))
        if "{program}" not in command:
            argv.append(str(path))
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
        except FileNotFoundError as exc:
            raise SolverUnavailable(f"solver executable not found: {argv[0]}") from exc
        except subprocess.TimeoutExpired as exc:
            raise SolverUnavailable(f"solver timed out after {timeout}s") from exc
    return parse_answer(proc.stdout)


def compare_with_engine(answer: AnswerSet, tr: Traces, setting: Setting | None = None) -> list[str]:
    """Differences between a decoded answer set and the engine's trace.

    With ``setting`` the solver's NESS causes are checked too, for every
    target that appears in the answer set.
    """
    diff = []
    engine = {(e, t) for e, t in tr.occurrences()}
    for e, t in sorted(engine - answer.occurrences):
        diff.append(f"- o({e},{t}) missing from solver")
    for e, t in sorted(answer.occurrences - engine):
        diff.append(f"+ o({e},{t}) only in solver")
    mine = frozenset(f.args[0] for f in tr.final_state.true if f.kind == "a")
    if answer.final_acceptable() != mine:
        diff.append(f"final acceptability: engine {sorted(mine)} solver {sorted(answer.final_acceptable())}")
    if setting is not None:
        analyzer = CausalAnalyzer(tr, setting)
        solver: dict[tuple[Literal, int], set] = {}
        for occ, lit, t in answer.ness:
            solver.setdefault((lit, t), set()).add(occ)
        for (lit, t), occs in sorted(solver.items(), key=str):
            if t > tr.final_time:
                continue
            engine_ness = {(o.event, o.time) for o in analyzer.ness_causes(TimedFormula(lit, t))}
            if engine_ness != occs:
                diff.append(f"ness causes of {lit}@{t}: engine {len(engine_ness)} solver {len(occs)}")
    return diff


def check_against_engine(answer: AnswerSet, tr: Traces, setting: Setting | None = None) -> None:
    diff = compare_with_engine(answer, tr, setting)
    if diff:
        raise SolverDisagreement(diff)
