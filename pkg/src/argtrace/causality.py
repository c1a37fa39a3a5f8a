"""NESS-style causal queries over a finished trace.

A literal at time t is directly caused by the occurrences that established
it at the start of its current run of truth (the bounded past counts as an
establishment by the ``ini`` events at t = -1).  A compound formula is
directly caused by the establishers of the literals in each minimal set of
true literals that suffices for it.  Chaining goes through triggering
conditions: whatever caused an event's trigger is an actual cause of that
event, and so a NESS-cause of everything the event directly caused.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import NamedTuple, Union

from .actionlang import (
    Event,
    EventClass,
    Formula,
    Literal,
    Or,
    Setting,
    State,
    Traces,
    acceptable,
    eval_formula,
    present,
)
from .errors import InputError, TargetNotInTrace, TargetNotTrue


class Occurrence(NamedTuple):
    event: Event
    time: int

    def __str__(self):
        return f"{self.event}@{self.time}"


class TimedFormula(NamedTuple):
    formula: Formula
    time: int

    def __str__(self):
        return f"{self.formula}@{self.time}"


Effect = Union[TimedFormula, Occurrence]


class CauseKind(Enum):
    DIRECT = "direct"
    NESS = "ness"
    ACTUAL = "actual"


class CausalLink(NamedTuple):
    cause: Occurrence
    effect: Effect
    kind: CauseKind

    def __str__(self):
        return f"{self.cause} --{self.kind.value}--> {self.effect}"


@dataclass(frozen=True)
class CausalGraph:
    """Links discovered while chaining back from ``root``.

    DIRECT links end at the root, ACTUAL links join an occurrence to an
    occurrence whose trigger it established, NESS links join every
    remaining ancestor to the root.
    """

    root: TimedFormula
    links: frozenset[CausalLink] = field(default_factory=frozenset)

    def causes(self, kind: CauseKind | None = None) -> frozenset[Occurrence]:
        return frozenset(l.cause for l in self.links if kind is None or l.kind is kind)

    def count(self, kind: CauseKind) -> int:
        return sum(1 for l in self.links if l.kind is kind)

    def sorted_links(self) -> list[CausalLink]:
        order = {CauseKind.DIRECT: 0, CauseKind.ACTUAL: 1, CauseKind.NESS: 2}
        return sorted(self.links, key=lambda l: (order[l.kind], -l.cause.time, str(l.cause), str(l.effect)))


def sufficient_literal_sets(s: State, f: Formula) -> frozenset[frozenset[Literal]]:
    """Minimal sets of literals of ``f``, all true in ``s``, whose conjunction entails ``f``."""
    candidates = _true_sets(s, f)
    return frozenset(c for c in candidates if not any(o < c for o in candidates))


def _true_sets(s: State, f: Formula) -> set[frozenset[Literal]]:
    if isinstance(f, Literal):
        return {frozenset([f])} if s.holds(f) else set()
    if isinstance(f, Or):
        out: set[frozenset[Literal]] = set()
        for part in f.parts:
            out |= _true_sets(s, part)
        return out
    acc = {frozenset()}
    for part in f.parts:
        sub = _true_sets(s, part)
        acc = {a | b for a in acc for b in sub}
        if not acc:
            break
    return acc


class CausalAnalyzer:
    """Answers causal queries about one trace; results are memoised per query."""

    def __init__(self, tr: Traces, setting: Setting):
        self.tr = tr
        self.ctx = setting.context
        self._ness = lru_cache(maxsize=None)(self._ness_uncached)

    def _check_time(self, t: int) -> None:
        if t < 0 or t > self.tr.final_time:
            raise TargetNotTrue(f"time {t} outside the trace 0..{self.tr.final_time}")

    def literal_establishers(self, lit: Literal, t: int) -> frozenset[Occurrence]:
        tr = self.tr
        self._check_time(t)
        if not tr.state_at(t).holds(lit):
            raise TargetNotTrue(f"{lit} does not hold at {t}")
        k = t
        while k > 0 and tr.state_at(k - 1).holds(lit):
            k -= 1
        t1 = k - 1
        found = frozenset(Occurrence(e, t1) for e in tr.events_at(t1) if lit in self.ctx.events[e].eff)
        if not found:
            raise TargetNotTrue(f"{lit}@{t}: no occurrence at {t1} establishes it")
        return found

    def direct_ness_causes(self, target: TimedFormula) -> frozenset[Occurrence]:
        self._check_time(target.time)
        s = self.tr.state_at(target.time)
        if not eval_formula(s, target.formula):
            raise TargetNotTrue(f"{target.formula} does not hold at {target.time}")
        out: set[Occurrence] = set()
        for lits in sufficient_literal_sets(s, target.formula):
            for lit in lits:
                out |= self.literal_establishers(lit, target.time)
        return frozenset(out)

    def trigger_of(self, occ: Occurrence) -> TimedFormula | None:
        if occ not in self._occurrence_set():
            raise TargetNotInTrace(f"{occ} does not occur in the trace")
        spec = self.ctx.events[occ.event]
        if spec.cls is EventClass.INITIAL:
            return None
        return TimedFormula(spec.tri, occ.time)

    def _occurrence_set(self) -> frozenset[Occurrence]:
        occ = getattr(self, "_occ", None)
        if occ is None:
            occ = frozenset(Occurrence(e, t) for e, t in self.tr.occurrences())
            self._occ = occ
        return occ

    def immediate_actual_causes(self, occ: Occurrence) -> frozenset[Occurrence]:
        """Direct causes of the occurrence's triggering condition."""
        trig = self.trigger_of(occ)
        if trig is None:
            return frozenset()
        return self.direct_ness_causes(trig) - {occ}

    def actual_causes(self, occ: Occurrence) -> frozenset[Occurrence]:
        trig = self.trigger_of(occ)
        if trig is None:
            return frozenset()
        return self.ness_causes(trig) - {occ}

    def ness_causes(self, target: TimedFormula) -> frozenset[Occurrence]:
        return self._ness(target)

    def _ness_uncached(self, target: TimedFormula) -> frozenset[Occurrence]:
        out: set[Occurrence] = set()
        todo = list(self.direct_ness_causes(target))
        while todo:
            occ = todo.pop()
            if occ in out:
                continue
            out.add(occ)
            todo.extend(self.immediate_actual_causes(occ))
        return frozenset(out)

    def causal_graph(self, target: TimedFormula) -> CausalGraph:
        direct = self.direct_ness_causes(target)
        links = {CausalLink(o, target, CauseKind.DIRECT) for o in direct}
        seen: set[Occurrence] = set()
        todo = list(direct)
        while todo:
            occ = todo.pop()
            if occ in seen:
                continue
            seen.add(occ)
            for cause in self.immediate_actual_causes(occ):
                links.add(CausalLink(cause, occ, CauseKind.ACTUAL))
                todo.append(cause)
        links |= {CausalLink(o, target, CauseKind.NESS) for o in seen - direct}
        return CausalGraph(target, frozenset(links))


def direct_ness_causes(tr: Traces, setting: Setting, target: TimedFormula) -> frozenset[Occurrence]:
    return CausalAnalyzer(tr, setting).direct_ness_causes(target)


def ness_causes(tr: Traces, setting: Setting, target: TimedFormula) -> frozenset[Occurrence]:
    return CausalAnalyzer(tr, setting).ness_causes(target)


def actual_causes(tr: Traces, setting: Setting, target: Occurrence) -> frozenset[Occurrence]:
    return CausalAnalyzer(tr, setting).actual_causes(target)


def causal_graph(tr: Traces, setting: Setting, target: TimedFormula) -> CausalGraph:
    return CausalAnalyzer(tr, setting).causal_graph(target)


def persistence_span(tr: Traces, cause: Occurrence, lit: Literal, t: int) -> tuple[int, int]:
    """Time points over which ``cause`` keeps directly causing ``lit``, through ``t``.

    Used to print coalesced effects such as ``neg(a(c))@30-31``.
    """
    end = t
    while end + 1 <= tr.final_time and tr.state_at(end + 1).holds(lit):
        end += 1
    return cause.time + 1, end


_QUERY = re.compile(r"^\s*(acc|not-acc|present)\(\s*([A-Za-z0-9_]+)\s*\)\s*@\s*(final|-?\d+)\s*$")


def parse_query(text: str, tr: Traces) -> TimedFormula:
    """Parse ``acc(x)@t``, ``not-acc(x)@t`` or ``present(x)@t``; ``@final`` is the last state."""
    m = _QUERY.match(text)
    if not m:
        raise InputError(f"bad query {text!r}; expected acc(ID)@T, not-acc(ID)@T or present(ID)@T")
    kind, name, when = m.groups()
    t = tr.final_time if when == "final" else int(when)
    if kind == "acc":
        lit = Literal(acceptable(name), True)
    elif kind == "not-acc":
        lit = Literal(acceptable(name), False)
    else:
        lit = Literal(present(name), True)
    if lit.fluent not in tr.final_state.universe:
        raise TargetNotTrue(f"no argument {name!r} in this context")
    return TimedFormula(lit, t)
