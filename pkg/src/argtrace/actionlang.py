"""Action-language kernel: fluents, formulas, events, contexts and trace execution.

The kernel is generic; :mod:`argtrace.translate` builds the argumentative
contexts it is normally fed.  Execution follows the argumentative semantics:
exogenous cascades run to quiescence and ranked actions only fire from
quiescent states.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence as Seq, Union

from .errors import (
    ConflictingEffects,
    HorizonExceeded,
    InvalidContext,
    PreconditionViolated,
    UnknownFluent,
)


class Fluent(NamedTuple):
    kind: str
    args: tuple[str, ...]

    def __str__(self):
        return f"{self.kind}({','.join(self.args)})"


def present(x: str) -> Fluent:
    return Fluent("p", (x,))


def acceptable(x: str) -> Fluent:
    return Fluent("a", (x,))


def can_attack(y: str, x: str) -> Fluent:
    return Fluent("cA", (y, x))


class Literal(NamedTuple):
    fluent: Fluent
    positive: bool = True

    def __invert__(self) -> "Literal":
        return Literal(self.fluent, not self.positive)

    def __str__(self):
        return str(self.fluent) if self.positive else f"neg({self.fluent})"


def pos(f: Fluent) -> Literal:
    return Literal(f, True)


def neg(f: Fluent) -> Literal:
    return Literal(f, False)


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]

    def __str__(self):
        return "(" + " & ".join(map(str, self.parts)) + ")"


@dataclass(frozen=True)
class Or:
    parts: tuple["Formula", ...]

    def __str__(self):
        return "(" + " | ".join(map(str, self.parts)) + ")"


Formula = Union[Literal, And, Or]


def conj(*parts: Formula) -> Formula:
    if not parts:
        raise ValueError("empty conjunction")
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def disj(*parts: Formula) -> Formula:
    if not parts:
        raise ValueError("empty disjunction")
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def formula_literals(f: Formula) -> Iterator[Literal]:
    if isinstance(f, Literal):
        yield f
    else:
        for part in f.parts:
            yield from formula_literals(part)


@dataclass(frozen=True)
class State:
    """A coherent, complete assignment: ``true`` holds exactly the fluents valued true."""

    universe: frozenset[Fluent]
    true: frozenset[Fluent]

    def __post_init__(self):
        if not self.true <= self.universe:
            extra = sorted(self.true - self.universe)
            raise UnknownFluent(f"valued fluents outside the universe: {', '.join(map(str, extra))}")

    @classmethod
    def from_literals(cls, universe: Iterable[Fluent], literals: Iterable[Literal]) -> "State":
        universe = frozenset(universe)
        values: dict[Fluent, bool] = {}
        for lit in literals:
            if lit.fluent not in universe:
                raise UnknownFluent(str(lit.fluent))
            if values.get(lit.fluent, lit.positive) != lit.positive:
                raise InvalidContext(f"incoherent literal set: {lit.fluent} and its negation")
            values[lit.fluent] = lit.positive
        missing = universe - values.keys()
        if missing:
            raise InvalidContext(f"incomplete literal set, missing {', '.join(map(str, sorted(missing)))}")
        return cls(universe, frozenset(f for f, v in values.items() if v))

    def holds(self, lit: Literal) -> bool:
        if lit.fluent not in self.universe:
            raise UnknownFluent(str(lit.fluent))
        return (lit.fluent in self.true) == lit.positive

    def __getitem__(self, f: Fluent) -> bool:
        return self.holds(pos(f))

    def literals(self) -> frozenset[Literal]:
        return frozenset(Literal(f, f in self.true) for f in self.universe)

    def __str__(self):
        return "{" + ", ".join(str(lit) for lit in sorted(self.literals())) + "}"


def eval_formula(s: State, f: Formula) -> bool:
    if isinstance(f, Literal):
        return s.holds(f)
    if isinstance(f, And):
        return all(eval_formula(s, p) for p in f.parts)
    return any(eval_formula(s, p) for p in f.parts)


class Event(NamedTuple):
    kind: str
    args: tuple

    def __str__(self):
        return f"{self.kind}({','.join(map(str, self.args))})"


def enunciate(x: str) -> Event:
    return Event("enunciate", (x,))


def makes_unacc(y: str, x: str) -> Event:
    return Event("makesUnacc", (y, x))


def makes_acc(x: str) -> Event:
    return Event("makesAcc", (x,))


def ini(lit: Literal) -> Event:
    return Event("ini", (lit,))


class EventClass(Enum):
    ACTION = "action"
    EXOGENOUS = "exogenous"
    # pseudo-events of the bounded past; they only occur at t = -1
    INITIAL = "initial"


@dataclass(frozen=True)
class EventSpec:
    id: Event
    cls: EventClass
    pre: Formula | None
    eff: tuple[Literal, ...]
    tri: Formula | None = None

    def __post_init__(self):
        object.__setattr__(self, "eff", tuple(self.eff))
        if not self.eff:
            raise InvalidContext(f"{self.id}: empty effect")
        fluents = [lit.fluent for lit in self.eff]
        if len(set(self.eff)) != len(set(fluents)):
            raise InvalidContext(f"{self.id}: effect contains a fluent and its complement")
        if self.cls is EventClass.INITIAL:
            return
        if self.pre is None:
            raise InvalidContext(f"{self.id}: missing precondition")
        if self.tri is None:
            object.__setattr__(self, "tri", self.pre)
        if self.cls is EventClass.EXOGENOUS and self.tri != self.pre:
            raise InvalidContext(f"{self.id}: exogenous events trigger on their precondition")
        if self.cls is EventClass.ACTION and not _entails_syntactically(self.tri, self.pre):
            raise InvalidContext(f"{self.id}: action trigger must include its precondition")

    def formulas(self) -> Iterator[Formula]:
        for f in (self.pre, self.tri):
            if f is not None:
                yield f


def _entails_syntactically(tri: Formula, pre: Formula) -> bool:
    return tri == pre or (isinstance(tri, And) and pre in tri.parts)


def ini_spec(lit: Literal) -> EventSpec:
    return EventSpec(ini(lit), EventClass.INITIAL, None, (lit,))


@dataclass(frozen=True)
class Context:
    """Fluent universe, event specifications, initial state, priority and time range.

    ``priority`` holds generating pairs ``(higher, lower)``; dominance uses
    their transitive closure.  ``horizon`` fixes the last event time N; None
    means dynamic, capped by :func:`safety_cap`.
    """

    fluents: frozenset[Fluent]
    events: Mapping[Event, EventSpec]
    initial_state: State
    priority: frozenset[tuple[Event, Event]] = frozenset()
    horizon: int | None = None
    _dominated: Mapping[Event, frozenset[Event]] = field(init=False, repr=False, compare=False)
    _exo_order: tuple[Event, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "fluents", frozenset(self.fluents))
        object.__setattr__(self, "priority", frozenset(self.priority))
        object.__setattr__(self, "events", dict(sorted(self.events.items())))
        if self.initial_state.universe != self.fluents:
            raise InvalidContext("initial state is not over the context's fluents")
        for spec in self.events.values():
            for f in spec.formulas():
                for lit in formula_literals(f):
                    if lit.fluent not in self.fluents:
                        raise UnknownFluent(f"{spec.id} mentions undeclared {lit.fluent}")
            for lit in spec.eff:
                if lit.fluent not in self.fluents:
                    raise UnknownFluent(f"{spec.id} affects undeclared {lit.fluent}")
        inis = {spec.eff[0] for spec in self.events.values() if spec.cls is EventClass.INITIAL}
        if inis != self.initial_state.literals():
            raise InvalidContext("initial events must cover exactly the literals of S(0)")
        for hi, lo in self.priority:
            if hi not in self.events or lo not in self.events:
                raise InvalidContext(f"priority pair mentions unknown event: {hi} > {lo}")
        dominated = _closure(self.priority)
        for e, below in dominated.items():
            if e in below:
                raise InvalidContext(f"priority relation is cyclic through {e}")
        object.__setattr__(self, "_dominated", dominated)
        exo = [e for e, spec in self.events.items() if spec.cls is EventClass.EXOGENOUS]
        object.__setattr__(self, "_exo_order", tuple(_topological(exo, self.priority)))

    @classmethod
    def create(cls, fluents, specs: Iterable[EventSpec], initial_state: State,
               priority=frozenset(), horizon=None) -> "Context":
        """Build a context, adding one initial event per literal of ``initial_state``."""
        events = {spec.id: spec for spec in specs}
        for lit in initial_state.literals():
            events[ini(lit)] = ini_spec(lit)
        return cls(frozenset(fluents), events, initial_state, frozenset(priority), horizon)

    def dominates(self, hi: Event, lo: Event) -> bool:
        return lo in self._dominated.get(hi, ())

    def exogenous_order(self, rng: random.Random | None = None) -> tuple[Event, ...]:
        """Exogenous events, every event after all events with priority over it."""
        if rng is None:
            return self._exo_order
        exo = list(self._exo_order)
        rng.shuffle(exo)
        return tuple(_topological(exo, self.priority, rng))

    def of_class(self, cls: EventClass) -> list[Event]:
        return [e for e, spec in self.events.items() if spec.cls is cls]

    def ini_events(self) -> frozenset[Event]:
        return frozenset(self.of_class(EventClass.INITIAL))


def _closure(pairs: Iterable[tuple[Event, Event]]) -> dict[Event, frozenset[Event]]:
    direct: dict[Event, set[Event]] = {}
    for hi, lo in pairs:
        direct.setdefault(hi, set()).add(lo)
    out: dict[Event, frozenset[Event]] = {}
    for start in direct:
        seen: set[Event] = set()
        todo = list(direct[start])
        while todo:
            e = todo.pop()
            if e in seen:
                continue
            seen.add(e)
            todo.extend(direct.get(e, ()))
        out[start] = frozenset(seen)
    return out


def _topological(nodes: Seq[Event], pairs, rng: random.Random | None = None) -> list[Event]:
    """Kahn's algorithm over ``nodes``; ties broken by input order or by ``rng``."""
    nodes = list(nodes)
    members = set(nodes)
    closure = _closure(pairs)
    indeg = dict.fromkeys(nodes, 0)
    below: dict[Event, list[Event]] = {e: [] for e in nodes}
    # edges of the closure restricted to ``nodes`` keep the order valid
    # when intermediate events are absent
    for hi in nodes:
        for lo in closure.get(hi, ()):
            if lo in members:
                below[hi].append(lo)
                indeg[lo] += 1
    ready = [e for e in nodes if indeg[e] == 0]
    out = []
    while ready:
        i = rng.randrange(len(ready)) if rng is not None else 0
        e = ready.pop(i)
        out.append(e)
        for lo in below[e]:
            indeg[lo] -= 1
            if indeg[lo] == 0:
                ready.append(lo)
    if len(out) != len(nodes):
        raise InvalidContext("priority relation is cyclic")
    return out


@dataclass(frozen=True)
class Sequence:
    """Ranked actions; only the relative order of ranks matters."""

    ranked: tuple[tuple[Event, int], ...]

    def __post_init__(self):
        ranked = tuple(sorted(((e, int(o)) for e, o in self.ranked), key=lambda p: (p[1], p[0])))
        seen = set()
        for e, o in ranked:
            if o < 0:
                raise InvalidContext(f"negative rank for {e}")
            if e in seen:
                raise InvalidContext(f"action {e} ranked more than once")
            seen.add(e)
        object.__setattr__(self, "ranked", ranked)

    def ranks(self) -> list[int]:
        return sorted({o for _, o in self.ranked})

    def at_rank(self, o: int) -> list[Event]:
        return [e for e, r in self.ranked if r == o]

    def rank_of(self) -> dict[Event, int]:
        return dict(self.ranked)

    def __len__(self):
        return len(self.ranked)


@dataclass(frozen=True)
class Setting:
    sequence: Sequence
    context: Context

    def __post_init__(self):
        for e, _ in self.sequence.ranked:
            spec = self.context.events.get(e)
            if spec is None or spec.cls is not EventClass.ACTION:
                raise InvalidContext(f"sequence entry {e} is not an action of the context")


@dataclass(frozen=True)
class Traces:
    """``event_trace[k]`` is E(k-1); ``state_trace[k]`` is S(k)."""

    event_trace: tuple[frozenset[Event], ...]
    state_trace: tuple[State, ...]

    def events_at(self, t: int) -> frozenset[Event]:
        if t < -1 or t + 1 >= len(self.event_trace):
            return frozenset()
        return self.event_trace[t + 1]

    def state_at(self, t: int) -> State:
        if t < 0 or t >= len(self.state_trace):
            raise IndexError(f"no state S({t}); trace ends at S({self.final_time})")
        return self.state_trace[t]

    @property
    def final_time(self) -> int:
        return len(self.state_trace) - 1

    @property
    def final_state(self) -> State:
        return self.state_trace[-1]

    def occurrences(self) -> Iterator[tuple[Event, int]]:
        for k, events in enumerate(self.event_trace):
            for e in sorted(events):
                yield e, k - 1

    def time_of(self, e: Event) -> list[int]:
        return [t for ev, t in self.occurrences() if ev == e]


def apply_effects(s: State, fired: Iterable[EventSpec]) -> State:
    """Successor state: inertia for every fluent no fired effect touches."""
    assigned: dict[Fluent, bool] = {}
    sources: dict[Fluent, list[Event]] = {}
    for spec in fired:
        for lit in spec.eff:
            sources.setdefault(lit.fluent, []).append(spec.id)
            if assigned.get(lit.fluent, lit.positive) != lit.positive:
                raise ConflictingEffects(lit.fluent, sources[lit.fluent])
            assigned[lit.fluent] = lit.positive
    for f in assigned:
        if f not in s.universe:
            raise UnknownFluent(str(f))
    true = (s.true - {f for f, v in assigned.items() if not v}) | {f for f, v in assigned.items() if v}
    return State(s.universe, frozenset(true))


def triggered_exogenous(s: State, ctx: Context, rng: random.Random | None = None) -> frozenset[Event]:
    """The unique firing set: triggered events not preempted by a firing higher-priority event."""
    fired: list[Event] = []
    for e in ctx.exogenous_order(rng):
        if eval_formula(s, ctx.events[e].tri) and not any(ctx.dominates(f, e) for f in fired):
            fired.append(e)
    return frozenset(fired)


def is_quiescent(s: State, ctx: Context) -> bool:
    return not any(eval_formula(s, ctx.events[e].tri) for e in ctx.of_class(EventClass.EXOGENOUS))


def cascade_bound(n_actions: int) -> int:
    """Steps allowed for an exogenous cascade to settle after one action step."""
    return n_actions * n_actions + 1


def safety_cap(setting: Setting) -> int:
    n = len(setting.context.of_class(EventClass.ACTION))
    return (len(setting.sequence.ranks()) + 1) * cascade_bound(n) + 1


def run(setting: Setting, rng: random.Random | None = None) -> Traces:
    """Execute a setting to its unique pair of traces.

    ``rng`` only perturbs internal iteration orders; the result must not
    depend on it.
    """
    ctx = setting.context
    cap = ctx.horizon if ctx.horizon is not None else safety_cap(setting)
    ranks = setting.sequence.ranks()
    events = [ctx.ini_events()]
    states = [ctx.initial_state]
    next_rank = 0
    t = 0
    while True:
        s = states[-1]
        fired = triggered_exogenous(s, ctx, rng)
        if not fired:
            if next_rank == len(ranks):
                break
            due = setting.sequence.at_rank(ranks[next_rank])
            if rng is not None:
                rng.shuffle(due)
            for e in due:
                if not eval_formula(s, ctx.events[e].pre):
                    raise PreconditionViolated(e, t)
            fired = frozenset(due)
            next_rank += 1
        if t > cap:
            raise HorizonExceeded(f"no quiescent end within the time cap {cap}")
        events.append(fired)
        states.append(apply_effects(s, (ctx.events[e] for e in sorted(fired))))
        t += 1
    return Traces(tuple(events), tuple(states))


@dataclass(frozen=True)
class Violation:
    t: int
    condition: str
    detail: str

    def __str__(self):
        return f"t={self.t} [{self.condition}] {self.detail}"


def validate_execution(tr: Traces, setting: Setting) -> list[Violation]:
    """Re-check every validity condition on a finished trace, independently of :func:`run`."""
    ctx = setting.context
    out: list[Violation] = []
    if len(tr.event_trace) != len(tr.state_trace) or not tr.state_trace:
        return [Violation(-1, "shape", "event and state traces differ in length")]
    for t, s in enumerate(tr.state_trace):
        if s.universe != ctx.fluents or not s.true <= s.universe:
            out.append(Violation(t, "1", "state is not complete over the context fluents"))
    if tr.events_at(-1) != ctx.ini_events():
        out.append(Violation(-1, "ini", "E(-1) is not the set of initial events"))
    ini_state = apply_effects(State(ctx.fluents, frozenset()), (ctx.events[e] for e in ctx.ini_events()))
    if tr.state_at(0) != ini_state or tr.state_at(0) != ctx.initial_state:
        out.append(Violation(0, "ini", "S(0) differs from the effects of E(-1)"))

    exogenous = ctx.of_class(EventClass.EXOGENOUS)
    in_sequence = {e for e, _ in setting.sequence.ranked}
    for t in range(tr.final_time):
        s, E = tr.state_at(t), tr.events_at(t)
        for e in sorted(E):
            spec = ctx.events.get(e)
            if spec is None:
                out.append(Violation(t, "event", f"{e} is not an event of the context"))
                continue
            if spec.cls is EventClass.INITIAL:
                out.append(Violation(t, "event", f"initial event {e} after t=-1"))
            elif not eval_formula(s, spec.pre):
                out.append(Violation(t, "2.a", f"precondition of {e} does not hold"))
            if spec.cls is EventClass.ACTION and e not in in_sequence:
                out.append(Violation(t, "seq.1", f"action {e} is not in the sequence"))
        for e in sorted(E):
            for f in sorted(E):
                if ctx.dominates(e, f):
                    out.append(Violation(t, "2.b", f"{e} has priority over co-occurring {f}"))
        triggered = [e for e in exogenous if eval_formula(s, ctx.events[e].tri)]
        for e in triggered:
            if e not in E and not any(ctx.dominates(f, e) for f in E):
                out.append(Violation(t, "2.c", f"triggered {e} neither occurs nor is preempted"))
        if triggered and any(ctx.events[e].cls is EventClass.ACTION for e in E if e in ctx.events):
            out.append(Violation(t, "2.d", "action occurs while an exogenous event is triggered"))
        if not E:
            out.append(Violation(t, "2.e", "empty event set"))
        known = [ctx.events[e] for e in E if e in ctx.events]
        expected = {lit for lit in s.literals() if not any(~lit in spec.eff for spec in known)}
        expected |= {lit for spec in known for lit in spec.eff}
        if expected != tr.state_at(t + 1).literals():
            out.append(Violation(t, "3", f"S({t + 1}) is not the frame successor of S({t})"))
    if tr.final_time >= 0 and tr.events_at(tr.final_time):
        out.append(Violation(tr.final_time, "shape", "events recorded after the final state"))

    when: dict[Event, list[int]] = {}
    for e, t in tr.occurrences():
        when.setdefault(e, []).append(t)
    ranked = setting.sequence.ranked
    for e, _ in ranked:
        if len(when.get(e, [])) != 1:
            out.append(Violation(-1, "seq", f"{e} occurs {len(when.get(e, []))} times, expected once"))
    for e, o in ranked:
        for f, o2 in ranked:
            te, tf = when.get(e, [None])[0], when.get(f, [None])[0]
            if te is None or tf is None:
                continue
            if o < o2 and not te < tf:
                out.append(Violation(te, "seq.2", f"{e} (rank {o}) does not precede {f} (rank {o2})"))
            if o == o2 and te != tf:
                out.append(Violation(te, "seq.3", f"{e} and {f} share rank {o} but not a time point"))
    return out
