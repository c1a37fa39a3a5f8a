"""Reading and writing dialogue files.

A dialogue file is a JSON object::

    {"metadata": {"title": "...", "notes": "..."},       # optional
     "arguments": [{"id": "a", "rank": 0}, ...],
     "attacks": [["b", "a"], ...]}

A rank of ``null`` keeps an argument in the graph without enunciating it
(a partial dialogue).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import DuplicateArgument, InputError, UnknownArgument
from .graph import ArgGraph, make_graph
from .translate import Dialogue


@dataclass(frozen=True)
class DialogueFile:
    graph: ArgGraph
    dialogue: Dialogue
    metadata: dict[str, str] = field(default_factory=dict)


def _fail(msg: str):
    raise InputError(f"invalid dialogue file: {msg}")


def _check_shape(doc: Any) -> None:
    if not isinstance(doc, dict):
        _fail("top level must be an object")
    extra = set(doc) - {"metadata", "arguments", "attacks"}
    if extra:
        _fail(f"unexpected keys {sorted(extra)}")
    for key in ("arguments", "attacks"):
        if not isinstance(doc.get(key), list):
            _fail(f"{key!r} must be a list")
    meta = doc.get("metadata", {})
    if not isinstance(meta, dict) or set(meta) - {"title", "notes"}:
        _fail("metadata may only hold 'title' and 'notes'")
    if not all(isinstance(v, str) for v in meta.values()):
        _fail("metadata values must be strings")
    for k, item in enumerate(doc["arguments"]):
        if not isinstance(item, dict) or set(item) != {"id", "rank"}:
            _fail(f"arguments[{k}] must be an object with exactly 'id' and 'rank'")
        if not isinstance(item["id"], str):
            _fail(f"arguments[{k}].id must be a string")
        rank = item["rank"]
        # bool is an int subclass; reject it explicitly
        if rank is not None and (isinstance(rank, bool) or not isinstance(rank, int) or rank < 0):
            _fail(f"arguments[{k}].rank must be a nonnegative integer or null")
    for k, pair in enumerate(doc["attacks"]):
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(p, str) for p in pair)):
            _fail(f"attacks[{k}] must be a pair [attacker, target] of ids")


def parse_dialogue(doc: Any) -> DialogueFile:
    """Build graph and dialogue from an already decoded JSON document."""
    _check_shape(doc)
    names = [a["id"] for a in doc["arguments"]]
    seen: set[str] = set()
    for n in names:
        if n in seen:
            raise DuplicateArgument(n)
        seen.add(n)
    for y, x in doc["attacks"]:
        for end in (y, x):
            if end not in seen:
                raise UnknownArgument(end, f"attack ({y}, {x})")
    g = make_graph(names, [tuple(p) for p in doc["attacks"]])
    d = Dialogue(tuple((a["id"], a["rank"]) for a in doc["arguments"] if a["rank"] is not None))
    return DialogueFile(g, d, dict(doc.get("metadata", {})))


def load_dialogue(path: str | Path) -> DialogueFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from exc
    return parse_dialogue(doc)


def dump_dialogue(g: ArgGraph, d: Dialogue, metadata: dict[str, str] | None = None) -> str:
    doc: dict[str, Any] = {}
    if metadata:
        doc["metadata"] = metadata
    doc["arguments"] = [{"id": n, "rank": r} for n, r in d.entries]
    doc["arguments"] += [{"id": n, "rank": None} for n in sorted(g.arguments - d.arguments)]
    doc["attacks"] = [list(p) for p in sorted(g.attacks)]
    return json.dumps(doc, indent=2) + "\n"
