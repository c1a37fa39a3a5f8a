"""Command-line entry point: ``argtrace <command> FILE [options]``.

Exit codes: 0 success, 1 unreadable input or bad usage, 2 validation
error, 3 failed self-audit or internal invariant, 4 solver unavailable or
disagreeing.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .actionlang import EventClass, Literal, run
from .asp import check_against_engine, emit_program, solver_bridge, solver_command
from .audit import run_audits
from .causality import CausalAnalyzer, CauseKind, parse_query, persistence_span
from .dialogue_file import load_dialogue
from .errors import ArgTraceError, SolverUnavailable
from .render import build_table, build_timeline, render_dot, render_table_text, render_trace_text, trace_records
from .translate import build_setting

EXIT_OK, EXIT_INPUT, EXIT_AUDIT = 0, 1, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _load(args):
    f = load_dialogue(args.file)
    setting = build_setting(f.dialogue, f.graph, partial=args.partial)
    return f, setting, run(setting)


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_run(args) -> int:
    _, _, tr = _load(args)
    if args.json:
        doc = {"final_time": tr.final_time, "states": trace_records(tr)}
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(render_trace_text(tr, show_ini=args.show_ini))
    return EXIT_OK


def cmd_table(args) -> int:
    f, _, tr = _load(args)
    sys.stdout.write(render_table_text(build_table(tr, f.dialogue), args.format))
    return EXIT_OK


def cmd_timeline(args) -> int:
    _, setting, tr = _load(args)
    end = tr.final_time if args.to is None else args.to
    causal = None
    if args.causes:
        causal = CausalAnalyzer(tr, setting).causal_graph(parse_query(args.causes, tr))
    _write(render_dot(build_timeline(tr, args.start, end, causal)), args.output)
    return EXIT_OK


def _kinds(text: str) -> list[CauseKind]:
    try:
        return [CauseKind(k.strip()) for k in text.split(",") if k.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"kinds must be drawn from direct, ness, actual: {text!r}")


def cmd_causes(args) -> int:
    _, setting, tr = _load(args)
    target = parse_query(args.query, tr)
    analyzer = CausalAnalyzer(tr, setting)
    graph = analyzer.causal_graph(target)
    initial = setting.context.ini_events()

    def shown(occ) -> bool:
        return args.show_ini or occ.event not in initial

    lines = [f"causes of {target}"]
    for kind in args.kinds:
        if kind is CauseKind.DIRECT:
            for occ in sorted(analyzer.direct_ness_causes(target), key=lambda o: (o.time, str(o))):
                if shown(occ) and isinstance(target.formula, Literal):
                    lo, hi = persistence_span(tr, occ, target.formula, target.time)
                    span = f"{lo}" if lo == hi else f"{lo}-{hi}"
                    lines.append(f"direct  {occ}  establishes {target.formula}@{span}")
        elif kind is CauseKind.NESS:
            for occ in sorted(analyzer.ness_causes(target), key=lambda o: (o.time, str(o))):
                if shown(occ):
                    lines.append(f"ness    {occ}")
        else:
            links = [l for l in graph.links if l.kind is CauseKind.ACTUAL and shown(l.cause)]
            for link in sorted(links, key=lambda l: (l.effect.time, str(l.effect), l.cause.time, str(l.cause))):
                lines.append(f"actual  {link.cause} -> {link.effect}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_emit_asp(args) -> int:
    _, setting, tr = _load(args)
    prog = emit_program(setting, horizon=tr.final_time)
    _write(prog.text, args.output)
    if args.solve is None:
        return EXIT_OK
    command = solver_command(args.solve or None)
    if command is None:
        raise SolverUnavailable("no solver configured (use --solve CMD or ARGTRACE_SOLVER)")
    answer = solver_bridge(prog, command, timeout=args.timeout)
    check_against_engine(answer, tr, setting)
    print(f"solver agrees with the engine: {len(answer.occurrences)} occurrences, "
          f"{len(answer.ness)} ness atoms", file=sys.stderr)
    return EXIT_OK


def cmd_check(args) -> int:
    f, setting, tr = _load(args)
    results = run_audits(f.graph, f.dialogue, setting, tr, seed=args.seed, partial=args.partial,
                         samples=args.samples)
    n_actions = len(setting.context.of_class(EventClass.ACTION))
    print(f"{args.file}: {n_actions} arguments, final state S({tr.final_time})")
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print("all audits passed" if not failed else f"{len(failed)} audit(s) failed")
    return EXIT_AUDIT if failed else EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("file", help="dialogue file (JSON)")
    p.add_argument("--partial", action="store_true", help="allow a dialogue that skips graph arguments")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="argtrace", description="Trace, explain and render argumentation dialogues.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("run", help="dump the event and state traces")
    _add_common(s)
    s.add_argument("--json", action="store_true")
    s.add_argument("--show-ini", action="store_true", help="list the initial pseudo-events")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("table", help="acceptability per enunciation rank")
    _add_common(s)
    s.add_argument("--format", choices=["unicode", "csv"], default="unicode")
    s.set_defaults(func=cmd_table)

    s = sub.add_parser("timeline", help="DOT timeline of a time window")
    _add_common(s)
    s.add_argument("--from", dest="start", type=int, default=0)
    s.add_argument("--to", type=int, default=None)
    s.add_argument("--causes", metavar="QUERY", help="overlay the causes of QUERY")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_timeline)

    s = sub.add_parser("causes", help="causes of acc(x)@t, not-acc(x)@t or present(x)@t")
    s.add_argument("query")
    _add_common(s)
    s.add_argument("--kinds", type=_kinds, default=list(CauseKind), help="comma list of direct,ness,actual")
    s.add_argument("--show-ini", action="store_true", help="include initial pseudo-events")
    s.set_defaults(func=cmd_causes)

    s = sub.add_parser("emit-asp", help="write the logic program")
    _add_common(s)
    s.add_argument("-o", "--output")
    s.add_argument("--solve", nargs="?", const="", metavar="CMD",
                   help="solve and compare; CMD may contain {program}; default from ARGTRACE_SOLVER")
    s.add_argument("--timeout", type=float, default=120.0)
    s.set_defaults(func=cmd_emit_asp)

    s = sub.add_parser("check", help="run the self-audits")
    _add_common(s)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--samples", type=int, default=1000, help="random states for the quiescence audit")
    s.set_defaults(func=cmd_check)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ArgTraceError as exc:
        print(f"argtrace: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
