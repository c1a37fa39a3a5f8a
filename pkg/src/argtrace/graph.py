"""Acyclic abstract argumentation graphs and the grounded-acceptability oracle."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from graphlib import TopologicalSorter
from itertools import combinations
from typing import Iterable, Mapping

from .errors import CycleFound, DuplicateArgument, InvalidArgumentId, TooLarge, UnknownArgument

ARG_ID = re.compile(r"^[A-Za-z0-9_]+$")

BRUTEFORCE_LIMIT = 16


class Label(Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"


@dataclass(frozen=True)
class ArgGraph:
    """Arguments plus attack pairs ``(attacker, target)``.

    Construction does not validate; use :func:`make_graph` or
    :func:`validate_graph`.
    """

    arguments: frozenset[str]
    attacks: frozenset[tuple[str, str]]

    def __post_init__(self):
        object.__setattr__(self, "arguments", frozenset(self.arguments))
        object.__setattr__(self, "attacks", frozenset((y, x) for y, x in self.attacks))

    def __len__(self):
        return len(self.arguments)

    def induced(self, keep: Iterable[str]) -> "ArgGraph":
        keep = frozenset(keep) & self.arguments
        return ArgGraph(keep, frozenset((y, x) for y, x in self.attacks if y in keep and x in keep))


def make_graph(arguments: Iterable[str], attacks: Iterable[tuple[str, str]]) -> ArgGraph:
    """Build a graph from an argument listing, rejecting duplicates and invalid structure."""
    seen: set[str] = set()
    for name in arguments:
        if name in seen:
            raise DuplicateArgument(name)
        seen.add(name)
    g = ArgGraph(frozenset(seen), frozenset(tuple(a) for a in attacks))
    validate_graph(g)
    return g


def validate_graph(g: ArgGraph) -> None:
    for name in g.arguments:
        if not isinstance(name, str) or not ARG_ID.match(name):
            raise InvalidArgumentId(f"invalid argument id {name!r}")
    for y, x in g.attacks:
        for end in (y, x):
            if end not in g.arguments:
                raise UnknownArgument(end, f"attack {y}->{x}")
    cycle = find_cycle(g)
    if cycle is not None:
        raise CycleFound(cycle)


def _successors(g: ArgGraph) -> dict[str, list[str]]:
    succ: dict[str, list[str]] = {x: [] for x in g.arguments}
    for y, x in sorted(g.attacks):
        succ.setdefault(y, []).append(x)
    return succ


def find_cycle(g: ArgGraph) -> list[str] | None:
    """Return one attack cycle as ``[x1, ..., xk, x1]``, or None if acyclic."""
    succ = _successors(g)
    WHITE, GREY, BLACK = 0, 1, 2
    colour = dict.fromkeys(succ, WHITE)
    for root in sorted(succ):
        if colour[root] != WHITE:
            continue
        path = [root]
        stack = [iter(succ[root])]
        colour[root] = GREY
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                colour[path.pop()] = BLACK
                stack.pop()
            elif colour.get(nxt, WHITE) == GREY:
                return path[path.index(nxt):] + [nxt]
            elif colour.get(nxt, WHITE) == WHITE:
                colour[nxt] = GREY
                path.append(nxt)
                stack.append(iter(succ.get(nxt, ())))
    return None


def attackers(g: ArgGraph, x: str) -> frozenset[str]:
    if x not in g.arguments:
        raise UnknownArgument(x)
    return frozenset(y for y, t in g.attacks if t == x)


def grounded_labeling(g: ArgGraph) -> dict[str, Label]:
    """Label every argument by walking the attack DAG in topological order.

    An argument is accepted iff all of its attackers are rejected.
    """
    cycle = find_cycle(g)
    if cycle is not None:
        raise CycleFound(cycle)
    preds: dict[str, set[str]] = {x: set() for x in g.arguments}
    for y, x in g.attacks:
        preds[x].add(y)
    labels: dict[str, Label] = {}
    for x in TopologicalSorter(preds).static_order():
        ok = all(labels[y] is Label.REJECTED for y in preds[x])
        labels[x] = Label.ACCEPTED if ok else Label.REJECTED
    return dict(sorted(labels.items()))


def accepted(labels: Mapping[str, Label]) -> frozenset[str]:
    return frozenset(x for x, lab in labels.items() if lab is Label.ACCEPTED)


def is_conflict_free(g: ArgGraph, s: Iterable[str]) -> bool:
    s = set(s)
    return not any(y in s and x in s for y, x in g.attacks)


def is_acceptable_by(g: ArgGraph, x: str, s: Iterable[str]) -> bool:
    s = set(s)
    defenders = {y: {z for z, t in g.attacks if t == y} for y in attackers(g, x)}
    return all(defenders[y] & s for y in defenders)


def admissible_sets_bruteforce(g: ArgGraph, limit: int = BRUTEFORCE_LIMIT) -> set[frozenset[str]]:
    """Every admissible subset, by exhaustive enumeration."""
    if len(g.arguments) > limit:
        raise TooLarge(f"{len(g.arguments)} arguments exceeds brute-force bound {limit}")
    args = sorted(g.arguments)
    out: set[frozenset[str]] = set()
    for k in range(len(args) + 1):
        for combo in combinations(args, k):
            if is_conflict_free(g, combo) and all(is_acceptable_by(g, x, combo) for x in combo):
                out.add(frozenset(combo))
    return out
