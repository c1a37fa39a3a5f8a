"""Compile a dialogue over an attack graph into an argumentative context and sequence."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .actionlang import (
    Context,
    EventClass,
    EventSpec,
    Sequence,
    Setting,
    State,
    Traces,
    acceptable,
    can_attack,
    conj,
    disj,
    enunciate,
    makes_acc,
    makes_unacc,
    neg,
    pos,
    present,
)
from .errors import DuplicateArgument, InvalidContext, NotFinal, UnknownArgument
from .graph import ArgGraph, attackers, validate_graph


@dataclass(frozen=True)
class Dialogue:
    """Arguments with their order of enunciation; equal ranks are enunciated together."""

    entries: tuple[tuple[str, int], ...]

    def __post_init__(self):
        seen = set()
        for name, rank in self.entries:
            if name in seen:
                raise DuplicateArgument(name)
            if int(rank) < 0:
                raise InvalidContext(f"negative rank for {name}")
            seen.add(name)
        object.__setattr__(self, "entries", tuple((n, int(r)) for n, r in self.entries))

    @classmethod
    def from_order(cls, order: Iterable[str | Iterable[str]]) -> "Dialogue":
        """``["a", "b", ("h", "i"), "j"]`` gives consecutive ranks, groups sharing one."""
        entries = []
        for rank, item in enumerate(order):
            group = [item] if isinstance(item, str) else list(item)
            entries.extend((name, rank) for name in group)
        return cls(tuple(entries))

    @property
    def arguments(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.entries)

    def ranks(self) -> list[int]:
        return sorted({r for _, r in self.entries})

    def columns(self) -> list[tuple[int, list[str]]]:
        """Rank groups in order, each listing its arguments in dialogue order."""
        return [(r, [n for n, o in self.entries if o == r]) for r in self.ranks()]


def _check_coverage(d: Dialogue, g: ArgGraph, partial: bool) -> None:
    for name in sorted(d.arguments - g.arguments):
        raise UnknownArgument(name, "dialogue entry not in graph")
    missing = g.arguments - d.arguments
    if missing and not partial:
        raise InvalidContext(
            "dialogue does not enunciate " + ", ".join(sorted(missing)) + " (allow with partial=True)")


def build_context(d: Dialogue, g: ArgGraph, partial: bool = False) -> Context:
    validate_graph(g)
    _check_coverage(d, g, partial)
    fluents = {present(x) for x in g.arguments} | {acceptable(x) for x in g.arguments}
    fluents |= {can_attack(y, x) for y, x in g.attacks}
    specs = []
    for x in sorted(g.arguments):
        specs.append(EventSpec(enunciate(x), EventClass.ACTION,
                               pre=neg(present(x)), eff=(pos(present(x)), pos(acceptable(x)))))
        # non-attackers would contribute a constantly true clause, so only real attackers appear
        clauses = [disj(neg(can_attack(y, x)), neg(acceptable(y))) for y in sorted(attackers(g, x))]
        tri = conj(pos(present(x)), neg(acceptable(x)), *clauses)
        specs.append(EventSpec(makes_acc(x), EventClass.EXOGENOUS, pre=tri, eff=(pos(acceptable(x)),)))
    for y, x in sorted(g.attacks):
        tri = conj(pos(acceptable(x)), pos(acceptable(y)), pos(can_attack(y, x)))
        specs.append(EventSpec(makes_unacc(y, x), EventClass.EXOGENOUS, pre=tri, eff=(neg(acceptable(x)),)))
    priority = {(makes_unacc(y, x), makes_unacc(x, z))
                for y, x in g.attacks for x2, z in g.attacks if x2 == x}
    true = frozenset(can_attack(y, x) for y, x in g.attacks)
    return Context.create(fluents, specs, State(frozenset(fluents), true), priority)


def build_sequence(d: Dialogue) -> Sequence:
    return Sequence(tuple((enunciate(x), rank) for x, rank in d.entries))


def build_setting(d: Dialogue, g: ArgGraph, partial: bool = False) -> Setting:
    return Setting(build_sequence(d), build_context(d, g, partial))


def graph_arguments(ctx: Context) -> list[str]:
    return sorted(f.args[0] for f in ctx.fluents if f.kind == "p")


def context_attacks(ctx: Context) -> list[tuple[str, str]]:
    return sorted((f.args[0], f.args[1]) for f in ctx.fluents if f.kind == "cA")


@dataclass(frozen=True)
class ArgumentativeStateReport:
    t: int | None
    is_argumentative: bool
    # ("i", x, y): x accepted while present y can attack it and is accepted
    # ("ii", x): x present, every attacker out, yet x not accepted
    witnesses: tuple[tuple[str, ...], ...] = field(default_factory=tuple)


def is_argumentative_state(s: State, ctx: Context, t: int | None = None) -> ArgumentativeStateReport:
    args = graph_arguments(ctx)
    attacks = set(context_attacks(ctx))
    witnesses = []
    for x in args:
        for y in args:
            cA = (y, x) in attacks and s[can_attack(y, x)]
            if s[acceptable(x)] and s[present(y)] and cA and s[acceptable(y)]:
                witnesses.append(("i", x, y))
    for x in args:
        unopposed = all(not s[acceptable(y)] or not ((y, x) in attacks and s[can_attack(y, x)]) for y in args)
        if s[present(x)] and unopposed and not s[acceptable(x)]:
            witnesses.append(("ii", x))
    return ArgumentativeStateReport(t, not witnesses, tuple(witnesses))


def associated_graph(s: State, ctx: Context) -> ArgGraph:
    """Arguments present in ``s`` and the attack capabilities among them."""
    args = frozenset(x for x in graph_arguments(ctx) if s[present(x)])
    attacks = frozenset((y, x) for y, x in context_attacks(ctx)
                        if s[can_attack(y, x)] and y in args and x in args)
    return ArgGraph(args, attacks)


def final_argumentative_state(tr: Traces, ctx: Context, d: Dialogue) -> tuple[State, int]:
    t = tr.final_time
    s = tr.final_state
    missing = [x for x in graph_arguments(ctx) if not any(tt < t for tt in tr.time_of(enunciate(x)))]
    if missing:
        raise NotFinal("arguments never enunciated: " + ", ".join(missing))
    report = is_argumentative_state(s, ctx, t)
    if not report.is_argumentative:
        raise NotFinal(f"last state S({t}) is not argumentative: {report.witnesses}")
    return s, t
