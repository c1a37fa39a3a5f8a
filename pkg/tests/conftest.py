from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pytest
from hypothesis import strategies as st

from argtrace.actionlang import Setting, Traces, run
from argtrace.dialogue_file import load_dialogue
from argtrace.graph import ArgGraph
from argtrace.translate import Dialogue, build_setting

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
GOLDEN = Path(__file__).resolve().parent / "golden"


@dataclass
class Loaded:
    path: Path
    graph: ArgGraph
    dialogue: Dialogue
    setting: Setting
    trace: Traces


def load_example(name: str) -> Loaded:
    path = DATA / name
    f = load_dialogue(path)
    setting = build_setting(f.dialogue, f.graph)
    return Loaded(path, f.graph, f.dialogue, setting, run(setting))


@pytest.fixture(scope="session")
def ex1() -> Loaded:
    return load_example("example1.json")


@pytest.fixture(scope="session")
def ex2() -> Loaded:
    return load_example("example2.json")


@st.composite
def dags(draw, max_size: int = 8, min_size: int = 1) -> ArgGraph:
    """Acyclic graphs: attacks only run from a later to an earlier name in a hidden order."""
    n = draw(st.integers(min_size, max_size))
    names = draw(st.permutations([f"x{k}" for k in range(n)]))
    pairs = [(names[j], names[i]) for i in range(n) for j in range(i + 1, n)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return ArgGraph(frozenset(names), frozenset(p for p, k in zip(pairs, keep) if k))


@st.composite
def dialogues(draw, g: ArgGraph) -> Dialogue:
    names = draw(st.permutations(sorted(g.arguments)))
    joins = draw(st.lists(st.booleans(), min_size=len(names), max_size=len(names)))
    entries, rank = [], -1
    for k, (name, join) in enumerate(zip(names, joins)):
        if k == 0 or not join:
            rank += 1
        entries.append((name, rank))
    return Dialogue(tuple(entries))


@st.composite
def graph_and_dialogue(draw, max_size: int = 8):
    g = draw(dags(max_size))
    return g, draw(dialogues(g))


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
