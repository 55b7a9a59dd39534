"""Event (.ev), grouping (.grp) and injection (.inj) formats.

    event E1 "description" nodes a, b, c [time "label"]
    super Registration: E1, E2, E3
    inject NODE THING a=1, b="x"
"""

from __future__ import annotations

from tmkit.core.model import StaticModel, ThingInstance
from tmkit.dsl.lexer import DslError, LineCursor, LineFailure, ParseError, SourceSpan, iter_lines
from tmkit.dsl.model import parse_assignments
from tmkit.events import Event, EventsError, EventsModel, make_events
from tmkit.expr import _unquote, format_value
from tmkit.util import natural_key


def parse_events(text: str, model: StaticModel, file: str = "<events>") -> EventsModel:
    errors: list[ParseError] = []
    events: list[Event] = []
    where: dict[str, int] = {}
    for lineno, raw in iter_lines(text):
        cur = LineCursor(file, lineno, raw)
        try:
            cur.keyword("event")
            name = cur.word("event name")
            desc_tok = cur.next()
            if desc_tok.kind != "str":
                raise cur.fail(desc_tok, "expected quoted description", ["string"])
            cur.keyword("nodes")
            nodes = []
            while True:
                t = cur.next()
                if t.kind != "word":
                    raise cur.fail(t, "expected node id", ["node id"])
                if t.text not in model.node_index:
                    raise cur.fail(t, f"unknown node {t.text!r} in event {name}")
                nodes.append(t.text)
                if not cur.accept(","):
                    break
            time = None
            if cur.accept("time"):
                tt = cur.next()
                if tt.kind not in ("str", "word"):
                    raise cur.fail(tt, "expected time label", ["label"])
                time = _unquote(tt.text) if tt.kind == "str" else tt.text
            cur.expect_end()
            if name in where:
                raise cur.fail(cur.toks[1], f"duplicate event {name!r} (first on line {where[name]})")
            where[name] = lineno
            events.append(Event(name, _unquote(desc_tok.text), frozenset(nodes), time))
        except LineFailure as exc:
            errors.append(exc.error)
    if errors:
        raise DslError(errors)
    try:
        return make_events(model, events)
    except EventsError as exc:
        raise DslError([ParseError(SourceSpan(file, 0, 1, 1), m) for m in exc.errors]) from None


def _quote(s: str) -> str:
    return format_value(s)


def serialize_events(em: EventsModel) -> str:
    lines = []
    for ev in em.events:
        line = f"event {ev.name} {_quote(ev.description)} nodes {', '.join(sorted(ev.region))}"
        if ev.time is not None:
            line += f" time {_quote(ev.time)}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def parse_groups(text: str, file: str = "<groups>") -> list[tuple[str, list[str]]]:
    errors: list[ParseError] = []
    groups = []
    for lineno, raw in iter_lines(text):
        cur = LineCursor(file, lineno, raw)
        try:
            cur.keyword("super")
            name_parts = []
            while True:
                t = cur.next()
                if t.text == ":" and t.kind == "sym":
                    break
                if t.kind == "eol":
                    raise cur.fail(t, "expected ':' after super-event name", [":"])
                name_parts.append(_unquote(t.text) if t.kind == "str" else t.text)
            if not name_parts:
                raise cur.fail(cur.peek(), "expected super-event name", ["name"])
            members = []
            while not cur.at_end():
                members.append(cur.word("event name"))
                if not cur.accept(","):
                    cur.expect_end()
            groups.append((" ".join(name_parts), members))
        except LineFailure as exc:
            errors.append(exc.error)
    if errors:
        raise DslError(errors)
    return groups


def serialize_groups(carving) -> str:
    return "".join(
        f"super {se.name}: {', '.join(se.ordered_members())}\n" for se in carving.super_events
    )


def parse_injections(text: str, model: StaticModel | None = None, file: str = "<injections>"):
    """Lines ``inject NODE THING a=..`` -> [(node id, ThingInstance)]."""
    errors: list[ParseError] = []
    out = []
    for lineno, raw in iter_lines(text):
        cur = LineCursor(file, lineno, raw)
        try:
            cur.keyword("inject")
            node_tok = cur.peek()
            node = cur.word("node id")
            if model is not None and node not in model.node_index:
                raise cur.fail(node_tok, f"unknown node {node!r}")
            thing = cur.word("thing name")
            out.append((node, ThingInstance.of(thing, parse_assignments(cur))))
        except LineFailure as exc:
            errors.append(exc.error)
    if errors:
        raise DslError(errors)
    return out


def serialize_injections(injections) -> str:
    lines = []
    for node, inst in injections:
        body = ", ".join(f"{k}={format_value(v)}" for k, v in inst.attrs)
        lines.append(f"inject {node} {inst.thing_type} {body}".rstrip())
    return "\n".join(lines) + "\n"


__all__ = [
    "parse_events", "serialize_events", "parse_groups", "serialize_groups",
    "parse_injections", "serialize_injections", "natural_key",
]
