"""Self-audits of the engine against its own theory, plus random instance generators.

Each audit returns an :class:`AuditResult`; none of them raise on a failed
check, so a caller can collect a full report.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .actionlang import (
    Context,
    EventClass,
    Setting,
    State,
    Traces,
    acceptable,
    cascade_bound,
    is_quiescent,
    present,
    run,
    validate_execution,
)
from .graph import ArgGraph, accepted, grounded_labeling
from .translate import (
    Dialogue,
    associated_graph,
    build_setting,
    graph_arguments,
    is_argumentative_state,
)


@dataclass
class AuditResult:
    name: str
    passed: bool
    checked: int = 0
    failures: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "ok" if self.passed else "FAIL"
        text = f"{status:4} {self.name} ({self.checked} checked)"
        return text + "".join(f"\n     {f}" for f in self.failures[:5])


def _result(name: str, checked: int, failures: list[str]) -> AuditResult:
    return AuditResult(name, not failures, checked, failures)


# generators

def random_graph(rng: random.Random, n: int, density: float) -> ArgGraph:
    """Acyclic graph on ``n`` arguments: edges only go from later to earlier in a hidden order."""
    names = [f"x{k}" for k in range(n)]
    rng.shuffle(names)
    attacks = {(names[j], names[i]) for i in range(n) for j in range(i + 1, n) if rng.random() < density}
    return ArgGraph(frozenset(names), frozenset(attacks))


def random_dialogue(g: ArgGraph, rng: random.Random, share: float = 0.25) -> Dialogue:
    """Random enunciation order; each argument joins the previous rank with probability ``share``."""
    names = sorted(g.arguments)
    rng.shuffle(names)
    entries, rank = [], -1
    for k, name in enumerate(names):
        if k == 0 or rng.random() >= share:
            rank += 1
        entries.append((name, rank))
    return Dialogue(tuple(entries))


def permute_ranks(d: Dialogue, rng: random.Random) -> Dialogue:
    """Same rank groups, enunciated in a shuffled group order."""
    groups = [names for _, names in d.columns()]
    rng.shuffle(groups)
    return Dialogue.from_order(groups)


def random_state(ctx: Context, rng: random.Random) -> State:
    """Random coherent, complete assignment in which every acceptable argument is present."""
    true = set()
    for f in ctx.fluents:
        if f.kind != "a" and rng.random() < 0.5:
            true.add(f)
    for x in graph_arguments(ctx):
        if present(x) in true and rng.random() < 0.5:
            true.add(acceptable(x))
    return State(ctx.fluents, frozenset(true))


# audits

def audit_execution(tr: Traces, setting: Setting) -> AuditResult:
    violations = validate_execution(tr, setting)
    return _result("trace validity", tr.final_time + 1, [str(v) for v in violations])


def audit_quiescence(tr: Traces, ctx: Context, rng: random.Random, samples: int = 1000) -> AuditResult:
    """Argumentative states are exactly the states where no exogenous event is triggered."""
    failures = []
    states = [(f"S({t})", s) for t, s in enumerate(tr.state_trace)]
    states += [(f"random #{k}", random_state(ctx, rng)) for k in range(samples)]
    for name, s in states:
        arg = is_argumentative_state(s, ctx).is_argumentative
        if arg != is_quiescent(s, ctx):
            failures.append(f"{name}: argumentative={arg}, quiescent={not arg}")
    return _result("argumentative iff quiescent", len(states), failures)


def audit_grounded_states(tr: Traces, ctx: Context) -> AuditResult:
    """In each argumentative state, acceptability agrees with the grounded labeling of its graph."""
    failures, checked = [], 0
    for t, s in enumerate(tr.state_trace):
        if not is_argumentative_state(s, ctx).is_argumentative:
            continue
        checked += 1
        g = associated_graph(s, ctx)
        want = accepted(grounded_labeling(g))
        got = frozenset(x for x in g.arguments if s[acceptable(x)])
        if want != got:
            failures.append(f"S({t}): engine {sorted(got)} oracle {sorted(want)}")
    return _result("argumentative states match grounded labeling", checked, failures)


def audit_final_state(tr: Traces, ctx: Context, g: ArgGraph, d: Dialogue) -> AuditResult:
    """The final state's graph is the (enunciated part of the) input, with grounded acceptability."""
    target = g.induced(d.arguments)
    s = tr.final_state
    failures = []
    found = associated_graph(s, ctx)
    if found != target:
        failures.append(f"final graph differs: {len(found.arguments)} args/{len(found.attacks)} attacks, "
                        f"expected {len(target.arguments)}/{len(target.attacks)}")
    want = accepted(grounded_labeling(target))
    got = frozenset(x for x in graph_arguments(ctx) if s[acceptable(x)])
    if want != got:
        failures.append(f"final acceptability {sorted(got)}, grounded {sorted(want)}")
    return _result("final state is sound and complete", 1, failures)


def audit_order_independence(g: ArgGraph, d: Dialogue, rng: random.Random, permutations: int = 5,
                partial: bool = False) -> AuditResult:
    """Reordering the rank groups does not change the final state."""
    base = run(build_setting(d, g, partial)).final_state
    failures = []
    for k in range(permutations):
        other = permute_ranks(d, rng)
        final = run(build_setting(other, g, partial)).final_state
        if final != base:
            order = " ".join(",".join(n) for _, n in other.columns())
            failures.append(f"order {order}: final state differs")
    return _result("final state independent of order", permutations, failures)


def audit_determinism(setting: Setting, tr: Traces, rng: random.Random, repeats: int = 3) -> AuditResult:
    """Runs with shuffled internal iteration give the same traces."""
    failures = []
    for k in range(repeats):
        other = run(setting, random.Random(rng.random()))
        if other != tr:
            failures.append(f"repeat {k}: traces differ")
    return _result("deterministic under shuffled iteration", repeats, failures)


def cascade_lengths(tr: Traces, setting: Setting) -> list[int]:
    """Number of exogenous steps following each action step."""
    actions = set(setting.context.of_class(EventClass.ACTION))
    lengths = []
    for t in range(tr.final_time):
        E = tr.events_at(t)
        if E & actions:
            lengths.append(0)
        elif lengths:
            lengths[-1] += 1
    return lengths


def audit_cascades(tr: Traces, setting: Setting) -> AuditResult:
    n = len(setting.context.of_class(EventClass.ACTION))
    bound = cascade_bound(n)
    lengths = cascade_lengths(tr, setting)
    failures = [f"cascade #{k} took {m} steps, bound {bound}" for k, m in enumerate(lengths) if m > bound]
    return _result(f"cascades settle within {bound} steps", len(lengths), failures)


def run_audits(g: ArgGraph, d: Dialogue, setting: Setting, tr: Traces, seed: int = 0,
               partial: bool = False, samples: int = 1000) -> list[AuditResult]:
    rng = random.Random(seed)
    ctx = setting.context
    return [
        audit_execution(tr, setting),
        audit_cascades(tr, setting),
        audit_determinism(setting, tr, rng),
        audit_quiescence(tr, ctx, rng, samples),
        audit_grounded_states(tr, ctx),
        audit_final_state(tr, ctx, g, d),
        audit_order_independence(g, d, rng, partial=partial),
    ]
