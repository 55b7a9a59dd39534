"""The .sc scenario format.

    scenario NAME
    super SUPER-EVENT NAME
    max-steps N
    each V in {1, 2, "x"} | each V in LO..HI
    each V from store STORE
    each V multiset of 25, 50, 100 size LO..HI
    each V from SCENARIO.OUTPUT
    inject NODE THING attr=ORACLE, ...
    expect [if ORACLE:] fires TARGET [thing.attr = ORACLE; ...]
    expect [if ORACLE:] never TARGET
    expect [if ORACLE:] count TARGET <= ORACLE
    expect [if ORACLE:] stores STORE = ORACLE
    output NAME from NODE thing.attr

ORACLE is an arithmetic expression over the generated variables. A file may
hold several scenarios, each opened by a ``scenario`` line.
"""

from __future__ import annotations

import re
from typing import Optional

from tmkit.dsl.lexer import DslError, LineCursor, LineFailure, ParseError, SourceSpan, iter_lines
from tmkit.harness.oracle import OracleError, compile_oracle
from tmkit.harness.scenario import (
    DEFAULT_SCENARIO_STEPS,
    Assertion,
    AttrCheck,
    InjectionTemplate,
    IntRange,
    Multisets,
    OutputSpec,
    Scenario,
    StoreItems,
    UpstreamOutput,
    ValueSet,
)
from tmkit.expr import ExprSyntaxError, format_value, parse_literal

_RANGE = re.compile(r"^(-?\d+)?\.\.(-?\d+)?$")
_DOTTED = re.compile(r"^([A-Za-z_][\w\-]*)\.([A-Za-z_]\w*)$")


def _split_top(text: str, sep: str) -> list[tuple[str, int]]:
    """Split on ``sep`` outside brackets and strings; yields (piece, offset)."""
    out, depth, start, in_str, esc = [], 0, 0, False, False
    for i, ch in enumerate(text):
        if in_str:
            if esc:
                esc = False
            elif ch == "\\":
                esc = True
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
        elif ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        elif ch == sep and depth == 0:
            out.append((text[start:i], start))
            start = i + 1
    out.append((text[start:], start))
    return out


def _find_top(text: str, target: str) -> int:
    """Index of the first top-level ``target`` character, or -1."""
    pieces = _split_top(text, target)
    return -1 if len(pieces) == 1 else len(pieces[0][0])


class _Line:
    def __init__(self, cur: LineCursor):
        self.cur = cur

    def err(self, col: int, message: str, width: int = 1) -> LineFailure:
        return LineFailure(ParseError(SourceSpan(self.cur.file, self.cur.lineno, col, col + max(width, 1) - 1), message))

    def oracle(self, text: str, col: int):
        stripped = text.strip()
        if not stripped:
            raise self.err(col, "expected an oracle expression")
        try:
            return compile_oracle(stripped)
        except OracleError as exc:
            raise self.err(col + len(text) - len(text.lstrip()), str(exc), len(stripped)) from None

    def range_(self, text: str, col: int) -> tuple[Optional[int], Optional[int]]:
        m = _RANGE.match(text)
        if not m:
            raise self.err(col, f"expected a range LO..HI, got {text!r}", len(text))
        lo = int(m.group(1)) if m.group(1) is not None else None
        hi = int(m.group(2)) if m.group(2) is not None else None
        if lo is not None and hi is not None and lo > hi:
            raise self.err(col, f"empty range {text}", len(text))
        return lo, hi


def _generator(ln: _Line):
    cur = ln.cur
    var = cur.word("variable name")
    how = cur.keyword("in", "from", "multiset")
    if how == "in":
        if cur.accept("{"):
            text, col = cur.rest()
            if not text.endswith("}"):
                raise ln.err(col + len(text), "expected '}'")
            values = []
            body = text[:-1]
            if body.strip():
                for piece, off in _split_top(body, ","):
                    try:
                        values.append(parse_literal(piece.strip()))
                    except ExprSyntaxError:
                        raise ln.err(col + off, f"expected literal value, got {piece.strip()!r}") from None
            return ValueSet(var, tuple(values))
        tok = cur.peek()
        lo, hi = ln.range_(cur.word("range"), tok.col)
        cur.expect_end()
        return IntRange(var, lo, hi)
    if how == "multiset":
        cur.keyword("of")
        text, col = cur.rest()
        idx = text.rfind(" size ")
        if idx < 0:
            raise ln.err(col + len(text), "expected 'size LO..HI'")
        items = []
        for piece, off in _split_top(text[:idx], ","):
            try:
                items.append(int(piece.strip()))
            except ValueError:
                raise ln.err(col + off, f"expected integer, got {piece.strip()!r}") from None
        rtext = text[idx + 6:].strip()
        lo, hi = ln.range_(rtext, col + idx + 6)
        return Multisets(var, tuple(items), 0 if lo is None else lo, hi)
    # from
    if cur.accept("store"):
        store = cur.word("store name")
        cur.expect_end()
        return StoreItems(var, store)
    tok = cur.peek()
    ref = cur.word("SCENARIO.OUTPUT")
    m = _DOTTED.match(ref)
    if not m:
        raise ln.err(tok.col, f"expected 'store NAME' or SCENARIO.OUTPUT, got {ref!r}", len(ref))
    cur.expect_end()
    return UpstreamOutput(var, m.group(1), m.group(2))


def _injection(ln: _Line):
    cur = ln.cur
    node = cur.word("node id")
    thing = cur.word("thing name")
    text, col = cur.rest()
    attrs = []
    if text.strip():
        for piece, off in _split_top(text, ","):
            eq = piece.find("=")
            if eq < 0:
                raise ln.err(col + off, "expected attr=expression")
            name = piece[:eq].strip()
            if not re.fullmatch(r"[A-Za-z_]\w*", name):
                raise ln.err(col + off, f"bad attribute name {name!r}")
            attrs.append((name, ln.oracle(piece[eq + 1:], col + off + eq + 1)))
    return InjectionTemplate(node, thing, tuple(attrs))


def _expectation(ln: _Line):
    cur = ln.cur
    condition = None
    if cur.accept("if"):
        text, col = cur.rest()
        colon = _find_top(text, ":")
        if colon < 0:
            raise ln.err(col + len(text), "expected ':' after condition")
        condition = ln.oracle(text[:colon], col)
        # re-tokenize what follows the colon
        cur = LineCursor(cur.file, cur.lineno, " " * (col + colon) + text[colon + 1:])
        ln = _Line(cur)
    kind = cur.keyword("fires", "never", "count", "stores")
    tok = cur.peek()
    target = cur.word("node, event or store")
    if kind == "never":
        cur.expect_end()
        return Assertion("never", target, condition=condition)
    if kind == "fires":
        text, col = cur.rest()
        checks = []
        if text.strip():
            for piece, off in _split_top(text, ";"):
                eq = piece.find("=")
                lhs = piece[:eq].strip() if eq >= 0 else ""
                m = _DOTTED.match(lhs)
                if eq < 0 or not m or piece[eq:eq + 2] == "==":
                    raise ln.err(col + off, "expected thing.attr = expression")
                checks.append(AttrCheck(m.group(1), m.group(2), ln.oracle(piece[eq + 1:], col + off + eq + 1)))
        return Assertion("fires", target, tuple(checks), condition=condition)
    op = "<=" if kind == "count" else "="
    text, col = cur.rest()
    if not text.startswith(op) or (op == "=" and text.startswith("==")):
        raise ln.err(col, f"expected {op!r} after {tok.text}")
    bound = ln.oracle(text[len(op):], col + len(op))
    return Assertion(kind, target, bound=bound, condition=condition)


def _output(ln: _Line):
    cur = ln.cur
    name = cur.word("output name")
    cur.keyword("from")
    node = cur.word("node id")
    tok = cur.peek()
    ref = cur.word("thing.attr")
    m = _DOTTED.match(ref)
    if not m:
        raise ln.err(tok.col, f"expected thing.attr, got {ref!r}", len(ref))
    cur.expect_end()
    return OutputSpec(name, node, m.group(1), m.group(2))


def parse_scenarios(text: str, file: str = "<scenario>") -> list[Scenario]:
    errors: list[ParseError] = []
    done: list[Scenario] = []
    cur_s: Optional[dict] = None

    def close():
        if cur_s is None:
            return
        if cur_s["super"] is None:
            errors.append(ParseError(cur_s["span"], f"scenario {cur_s['name']} has no 'super' line"))
            return
        done.append(Scenario(
            cur_s["name"], cur_s["super"], tuple(cur_s["gens"]), tuple(cur_s["inj"]),
            tuple(cur_s["asserts"]), tuple(cur_s["outs"]), cur_s["steps"],
        ))

    for lineno, raw in iter_lines(text):
        cur = LineCursor(file, lineno, raw)
        ln = _Line(cur)
        try:
            head = cur.keyword("scenario", "super", "max-steps", "each", "inject", "expect", "output")
            if head == "scenario":
                close()
                tok = cur.peek()
                name = cur.word("scenario name")
                cur.expect_end()
                cur_s = {"name": name, "super": None, "gens": [], "inj": [], "asserts": [], "outs": [],
                         "steps": DEFAULT_SCENARIO_STEPS, "span": cur.span(tok)}
                continue
            if cur_s is None:
                raise cur.fail(cur.toks[0], "expected a 'scenario' line first", ["scenario"])
            if head == "super":
                name, col = cur.rest()
                if not name:
                    raise cur.fail(cur.eol_tok(), "expected super-event name")
                cur_s["super"] = name.strip()
            elif head == "max-steps":
                tok = cur.peek()
                word = cur.word("step count")
                if not word.isdigit() or int(word) < 1:
                    raise cur.fail(tok, "max-steps must be a positive integer")
                cur.expect_end()
                cur_s["steps"] = int(word)
            elif head == "each":
                cur_s["gens"].append(_generator(ln))
            elif head == "inject":
                cur_s["inj"].append(_injection(ln))
            elif head == "expect":
                cur_s["asserts"].append(_expectation(ln))
            else:
                cur_s["outs"].append(_output(ln))
        except LineFailure as exc:
            errors.append(exc.error)
    close()
    if errors:
        raise DslError(errors)
    return done


def _range(lo, hi) -> str:
    return f"{'' if lo is None else lo}..{'' if hi is None else hi}"


def serialize_scenarios(scenarios) -> str:
    blocks = []
    for s in scenarios:
        lines = [f"scenario {s.name}", f"super {s.super_event}"]
        if s.max_steps != DEFAULT_SCENARIO_STEPS:
            lines.append(f"max-steps {s.max_steps}")
        for g in s.generators:
            if isinstance(g, ValueSet):
                lines.append(f"each {g.var} in {{{', '.join(format_value(v) for v in g.values)}}}")
            elif isinstance(g, IntRange):
                lines.append(f"each {g.var} in {_range(g.lo, g.hi)}")
            elif isinstance(g, StoreItems):
                lines.append(f"each {g.var} from store {g.store}")
            elif isinstance(g, Multisets):
                lines.append(f"each {g.var} multiset of {', '.join(map(str, g.items))} size {_range(g.lo, g.hi)}")
            else:
                lines.append(f"each {g.var} from {g.scenario}.{g.output}")
        for inj in s.injections:
            body = ", ".join(f"{a}={o}" for a, o in inj.attrs)
            lines.append(f"inject {inj.node} {inj.thing} {body}".rstrip())
        for a in s.assertions:
            lines.append(f"expect {a}")
        for o in s.outputs:
            lines.append(f"output {o.name} from {o.node} {o.thing}.{o.attr}")
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


__all__ = ["parse_scenarios", "serialize_scenarios"]
