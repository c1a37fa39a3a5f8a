"""Acceptability tables and event/state timelines (Graphviz DOT)."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum

from .actionlang import Event, Literal, Traces, acceptable, enunciate
from .causality import CausalGraph, CauseKind, Occurrence, TimedFormula
from .errors import WindowOutOfRange
from .translate import Dialogue


class Cell(Enum):
    ACCEPTED = "accepted"
    NOT_ACCEPTED = "not-accepted"
    NOT_YET = "not-yet-enunciated"


GLYPHS = {Cell.ACCEPTED: "●", Cell.NOT_ACCEPTED: "○", Cell.NOT_YET: "░"}
CSV_MARKS = {Cell.ACCEPTED: "1", Cell.NOT_ACCEPTED: "0", Cell.NOT_YET: "-"}


@dataclass(frozen=True)
class AcceptabilityTable:
    rows: tuple[str, ...]
    columns: tuple[tuple[str, ...], ...]
    # sample_times[k] is the index of the quiescent state column k reads
    sample_times: tuple[int, ...]
    cells: tuple[tuple[Cell, ...], ...]

    def column_labels(self) -> list[str]:
        return [",".join(group) for group in self.columns]

    def row(self, name: str) -> tuple[Cell, ...]:
        return self.cells[self.rows.index(name)]


def build_table(tr: Traces, d: Dialogue) -> AcceptabilityTable:
    """One column per rank, read at the quiescent state that precedes the next rank."""
    groups = d.columns()
    action_times = []
    for _, names in groups:
        times = tr.time_of(enunciate(names[0]))
        if not times:
            raise ValueError(f"{names[0]} is never enunciated in this trace")
        action_times.append(times[0])
    samples = [action_times[k + 1] if k + 1 < len(groups) else tr.final_time for k in range(len(groups))]
    rows = [name for _, names in groups for name in names]
    cells = []
    for name in rows:
        said_at = tr.time_of(enunciate(name))[0]
        line = []
        for t in samples:
            if said_at >= t:
                line.append(Cell.NOT_YET)
            elif tr.state_at(t)[acceptable(name)]:
                line.append(Cell.ACCEPTED)
            else:
                line.append(Cell.NOT_ACCEPTED)
        cells.append(tuple(line))
    return AcceptabilityTable(tuple(rows), tuple(tuple(n) for _, n in groups), tuple(samples), tuple(cells))


def render_table_text(t: AcceptabilityTable, format: str = "unicode") -> str:
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["argument", *t.column_labels()])
        for name, line in zip(t.rows, t.cells):
            w.writerow([name, *(CSV_MARKS[c] for c in line)])
        return buf.getvalue()
    if format != "unicode":
        raise ValueError(f"unknown table format {format!r}")
    labels = t.column_labels()
    first = max([len(r) for r in t.rows] + [1])
    widths = [max(len(l), 1) for l in labels]
    out = [" ".join([" " * first, "│", *(l.center(w) for l, w in zip(labels, widths))]).rstrip()]
    for name, line in zip(t.rows, t.cells):
        out.append(" ".join([name.ljust(first), "│", *(GLYPHS[c].center(w) for c, w in zip(line, widths))]).rstrip())
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class FluentNode:
    lit: Literal
    time: int
    # negated fluents are drawn in a lighter shade
    shaded: bool = False

    @property
    def key(self) -> str:
        return f"{self.lit}@{self.time}"

    @property
    def label(self) -> str:
        f = self.lit.fluent
        name = ",".join(f.args)
        return name if f.kind == "a" else f"{f.kind}_{name}"


@dataclass(frozen=True)
class EventNode:
    event: Event
    time: int

    @property
    def key(self) -> str:
        return f"{self.event}@{self.time}"

    @property
    def label(self) -> str:
        return short_event_name(self.event)


@dataclass
class TimelineGraph:
    start: int
    end: int
    states: dict[int, list[FluentNode]] = field(default_factory=dict)
    events: list[EventNode] = field(default_factory=list)
    causal_edges: list[tuple[str, str, CauseKind]] = field(default_factory=list)

    def node_keys(self) -> set[str]:
        keys = {n.key for nodes in self.states.values() for n in nodes}
        return keys | {e.key for e in self.events}


_SHORT = {"enunciate": "enu", "makesUnacc": "una", "makesAcc": "acc"}


def short_event_name(e: Event) -> str:
    return f"{_SHORT.get(e.kind, e.kind)}_{','.join(map(str, e.args))}"


def build_timeline(tr: Traces, start: int, end: int, causal: CausalGraph | None = None) -> TimelineGraph:
    """Acceptability fluents and events between S(start) and S(end).

    A false acceptability fluent is drawn, shaded, only after an event
    inside the window made it false.
    """
    if not 0 <= start <= end <= tr.final_time:
        raise WindowOutOfRange(f"window {start}-{end} outside trace 0-{tr.final_time}")
    g = TimelineGraph(start, end)
    args = sorted(f.args[0] for f in tr.final_state.universe if f.kind == "a")
    negated_in_window: dict[str, int] = {}
    for t in range(start, end + 1):
        s = tr.state_at(t)
        nodes = []
        for x in args:
            if s[acceptable(x)]:
                nodes.append(FluentNode(Literal(acceptable(x)), t))
            elif x in negated_in_window:
                nodes.append(FluentNode(Literal(acceptable(x), False), t, shaded=True))
        g.states[t] = nodes
        if t < tr.final_time:
            for e in sorted(tr.events_at(t)):
                g.events.append(EventNode(e, t))
            nxt = tr.state_at(t + 1)
            for x in args:
                if s[acceptable(x)] and not nxt[acceptable(x)]:
                    negated_in_window[x] = t
    if causal is not None:
        _overlay(g, causal)
    return g


def _overlay(g: TimelineGraph, causal: CausalGraph) -> None:
    events = {(e.event, e.time): e.key for e in g.events}
    fluents = {(n.lit, n.time): n.key for nodes in g.states.values() for n in nodes}

    def endpoint(x) -> str | None:
        if isinstance(x, Occurrence):
            return events.get((x.event, x.time))
        if isinstance(x, TimedFormula) and isinstance(x.formula, Literal) and g.start <= x.time <= g.end:
            key = fluents.get((x.formula, x.time))
            if key is None:
                node = FluentNode(x.formula, x.time, shaded=not x.formula.positive)
                g.states[x.time].append(node)
                fluents[(x.formula, x.time)] = key = node.key
            return key
        return None

    # links with an endpoint outside the window are not drawn
    for link in causal.sorted_links():
        src = endpoint(link.cause)
        dst = endpoint(link.effect) if src is not None else None
        if dst is not None:
            g.causal_edges.append((src, dst, link.kind))


def window_links(causal: CausalGraph, start: int, end: int) -> list:
    """The causal links :func:`build_timeline` draws for this window."""
    def drawable(x) -> bool:
        if isinstance(x, TimedFormula) and not isinstance(x.formula, Literal):
            return False
        return start <= x.time <= end

    return [l for l in causal.sorted_links() if drawable(l.cause) and drawable(l.effect)]


EDGE_STYLE = {CauseKind.DIRECT: "bold", CauseKind.NESS: "dashed", CauseKind.ACTUAL: "dotted"}
SHADE = "#9b9b9b"


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_dot(g: TimelineGraph) -> str:
    lines = ["digraph timeline {", "  rankdir=LR;", "  compound=true;", "  node [fontsize=10];"]
    for t in sorted(g.states):
        lines.append(f"  subgraph cluster_t{t} {{")
        lines.append(f"    label={_q(f't={t}')};")
        lines.append("    style=dashed;")
        lines.append(f"    {_q(f'S{t}')} [shape=point, style=invis];")
        for n in g.states[t]:
            attrs = f"shape=hexagon, label={_q(n.label)}"
            if n.shaded:
                attrs += f", color={_q(SHADE)}, fontcolor={_q(SHADE)}"
            lines.append(f"    {_q(n.key)} [{attrs}];")
        lines.append("  }")
    for e in g.events:
        lines.append(f"  {_q(e.key)} [shape=box, label={_q(e.label)}];")
        lines.append(f"  {_q(f'S{e.time}')} -> {_q(e.key)} [arrowhead=none];")
        if e.time + 1 in g.states:
            lines.append(f"  {_q(e.key)} -> {_q(f'S{e.time + 1}')};")
    for src, dst, kind in g.causal_edges:
        lines.append(f"  {_q(src)} -> {_q(dst)} [style={EDGE_STYLE[kind]}, class={_q('causal-' + kind.value)}, "
                     f"constraint=false];")
    lines.append("  subgraph cluster_legend {")
    lines.append(f"    label={_q('legend')};")
    lines.append(f"    {_q('legend_fluent')} [shape=hexagon, label={_q('fluent')}];")
    lines.append(f"    {_q('legend_event')} [shape=box, label={_q('event')}];")
    for kind in CauseKind:
        a, b = f"legend_{kind.value}_from", f"legend_{kind.value}_to"
        lines.append(f"    {_q(a)} [shape=plaintext, label={_q('')}];")
        lines.append(f"    {_q(b)} [shape=plaintext, label={_q(kind.value)}];")
        lines.append(f"    {_q(a)} -> {_q(b)} [style={EDGE_STYLE[kind]}, class={_q('legend')}];")
    lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


# trace dumps

def _names(s, kind: str) -> list[str]:
    return sorted(f.args[0] for f in s.true if f.kind == kind)


def trace_records(tr: Traces) -> list[dict]:
    """One record per state: what is present and acceptable, and what happens next."""
    out = []
    for t, s in enumerate(tr.state_trace):
        out.append({
            "t": t,
            "present": _names(s, "p"),
            "acceptable": _names(s, "a"),
            "events": [str(e) for e in sorted(tr.events_at(t))],
        })
    return out


def render_trace_text(tr: Traces, show_ini: bool = False) -> str:
    lines = [f"final state: S({tr.final_time})"]
    initial = sorted(tr.events_at(-1))
    if show_ini:
        lines += [f"E(-1)  {e}" for e in initial]
    else:
        lines.append(f"E(-1)  {len(initial)} initial events")
    for rec in trace_records(tr):
        acc = " ".join(rec["acceptable"]) or "-"
        pres = " ".join(rec["present"]) or "-"
        lines.append(f"S({rec['t']})  present: {pres}  acceptable: {acc}")
        if rec["events"]:
            lines.append(f"E({rec['t']})  " + " ".join(rec["events"]))
    return "\n".join(lines) + "\n"
