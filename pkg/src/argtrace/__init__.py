"""Argumentation dialogues as action-language traces, with causal explanations."""

from .actionlang import Setting, Traces, run, validate_execution
from .asp import emit_program, solver_bridge
from .causality import CausalAnalyzer, CauseKind, Occurrence, TimedFormula, parse_query
from .dialogue_file import DialogueFile, load_dialogue
from .errors import ArgTraceError
from .graph import ArgGraph, Label, grounded_labeling, make_graph
from .render import build_table, build_timeline, render_dot, render_table_text
from .translate import Dialogue, build_setting, final_argumentative_state

__version__ = "0.1.0"

__all__ = [
    "ArgGraph", "ArgTraceError", "CausalAnalyzer", "CauseKind", "Dialogue", "DialogueFile",
    "Label", "Occurrence", "Setting", "TimedFormula", "Traces", "build_setting", "build_table",
    "build_timeline", "emit_program", "final_argumentative_state", "grounded_labeling",
    "load_dialogue", "make_graph", "parse_query", "render_dot", "render_table_text", "run",
    "solver_bridge", "validate_execution",
]
