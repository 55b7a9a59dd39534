"""The .tm static-model format.

    model NAME
    thing NAME [attrs a:int, b:text]
    thimac NAME [in PARENT] [store]
    put STORE THING a=1, b="x"
    node ID: KIND [in|out] THING in THIMAC [effect STMT; STMT]
    flow A -> B
    trigger A -> B [when GUARD | otherwise]
"""

from __future__ import annotations

from tmkit.core.model import (
    ActionNode,
    Declarations,
    FlowEdge,
    Kind,
    ModelError,
    StaticModel,
    Thimac,
    ThingDecl,
    ThingInstance,
    TriggerEdge,
    build_model,
)
from tmkit.dsl.lexer import DslError, LineCursor, LineFailure, ParseError, SourceSpan, iter_lines
from tmkit.expr import ExprSyntaxError, format_value, parse_effect, parse_guard, parse_literal

KINDS = {k.value: k for k in Kind}


def _sub_parse(cur: LineCursor, fn, what: str):
    text, col = cur.rest()
    if not text:
        raise cur.fail(cur.eol_tok(), f"expected {what}", [what])
    try:
        return fn(text)
    except ExprSyntaxError as exc:
        at = col + exc.column
        raise LineFailure(ParseError(SourceSpan(cur.file, cur.lineno, at, at), f"{what}: {exc}", (what,)))


def parse_assignments(cur: LineCursor) -> dict:
    """``a=LIT, b=LIT`` until end of line."""
    out = {}
    while not cur.at_end():
        name = cur.word("attribute name")
        eq = cur.next()
        if eq.text != "=":
            raise cur.fail(eq, "expected '='", ["="])
        tok = cur.next()
        try:
            out[name] = parse_literal(tok.text)
        except ExprSyntaxError:
            raise cur.fail(tok, f"expected literal value for {name!r}", ["literal"]) from None
        if not cur.accept(","):
            cur.expect_end()
    return out


def parse_model(text: str, file: str = "<model>") -> StaticModel:
    """Parse a .tm document. Raises DslError listing every error with its span."""
    decls = Declarations()
    errors: list[ParseError] = []
    puts: list[tuple[LineCursor, str, ThingInstance]] = []
    saw_model = False

    for lineno, raw in iter_lines(text):
        cur = LineCursor(file, lineno, raw)
        try:
            kw = cur.keyword("model", "thing", "thimac", "put", "node", "flow", "trigger")
            if kw == "model":
                if saw_model:
                    raise cur.fail(cur.toks[0], "duplicate 'model' line")
                saw_model = True
                decls.name = cur.word("model name")
                cur.expect_end()
            elif kw == "thing":
                name = cur.word("thing name")
                attrs = []
                if cur.accept("attrs"):
                    while True:
                        attr = cur.word("attribute name")
                        typ = "int"
                        if cur.accept(":"):
                            typ = cur.keyword("int", "text")
                        attrs.append((attr, typ))
                        if not cur.accept(","):
                            break
                cur.expect_end()
                decls.things.append(ThingDecl(name, tuple(attrs)))
            elif kw == "thimac":
                name = cur.word("thimac name")
                parent = None
                is_store = False
                if cur.accept("in"):
                    parent = cur.word("parent thimac")
                if cur.accept("store"):
                    is_store = True
                cur.expect_end()
                decls.thimacs.append(Thimac(name, parent, is_store))
            elif kw == "put":
                store = cur.word("store name")
                thing = cur.word("thing name")
                attrs = parse_assignments(cur)
                puts.append((cur, store, ThingInstance.of(thing, attrs)))
            elif kw == "node":
                nid = cur.word("node id")
                colon = cur.next()
                if colon.text != ":":
                    raise cur.fail(colon, "expected ':' after node id", [":"])
                kt = cur.next()
                if kt.text not in KINDS:
                    raise cur.fail(kt, f"unknown action kind {kt.text!r}", sorted(KINDS))
                kind = KINDS[kt.text]
                direction = None
                if kind is Kind.TRANSFER:
                    direction = cur.keyword("in", "out")
                thing = cur.word("thing name")
                cur.keyword("in")
                thimac = cur.word("thimac name")
                effect = None
                if not cur.at_end():
                    cur.keyword("effect")
                    effect = _sub_parse(cur, parse_effect, "effect")
                decls.nodes.append(ActionNode(nid, kind, thing, thimac, direction, effect))
            elif kw == "flow":
                a = cur.word("source node")
                cur.keyword("->")
                b = cur.word("target node")
                cur.expect_end()
                decls.flows.append(FlowEdge(a, b))
            else:
                a = cur.word("source node")
                cur.keyword("->")
                b = cur.word("target node")
                guard = None
                otherwise = False
                if cur.accept("otherwise"):
                    otherwise = True
                    cur.expect_end()
                elif not cur.at_end():
                    cur.keyword("when")
                    guard = _sub_parse(cur, parse_guard, "guard")
                decls.triggers.append(TriggerEdge(a, b, guard, otherwise))
        except LineFailure as exc:
            errors.append(exc.error)

    # store contents attach to their thimac in declaration order
    contents: dict[str, list] = {}
    names = {t.name for t in decls.thimacs}
    for cur, store, inst in puts:
        if store not in names:
            errors.append(ParseError(SourceSpan(file, cur.lineno, 1, len(cur.text)), f"unknown store {store!r}"))
            continue
        contents.setdefault(store, []).append(inst)
    decls.thimacs = [
        Thimac(t.name, t.parent, t.is_store, tuple(contents.get(t.name, ()))) for t in decls.thimacs
    ]

    if errors:
        raise DslError(errors)
    try:
        return build_model(decls)
    except ModelError as exc:
        raise DslError([ParseError(SourceSpan(file, 0, 1, 1), msg) for msg in exc.errors]) from None


def _assignments(inst: ThingInstance) -> str:
    return ", ".join(f"{k}={format_value(v)}" for k, v in inst.attrs)


def serialize_model(model: StaticModel) -> str:
    lines = [f"model {model.name}"]
    for t in model.things:
        line = f"thing {t.name}"
        if t.attrs:
            line += " attrs " + ", ".join(f"{a}:{typ}" for a, typ in t.attrs)
        lines.append(line)
    for t in model.thimacs:
        line = f"thimac {t.name}"
        if t.parent:
            line += f" in {t.parent}"
        if t.is_store:
            line += " store"
        lines.append(line)
        for inst in t.contents:
            lines.append(f"put {t.name} {inst.thing_type} {_assignments(inst)}".rstrip())
    for n in model.nodes:
        stage = n.kind.value + (f" {n.direction}" if n.direction else "")
        line = f"node {n.id}: {stage} {n.thing_type} in {n.thimac}"
        if n.effect is not None:
            line += f" effect {n.effect}"
        lines.append(line)
    for f in model.flows:
        lines.append(f"flow {f.src} -> {f.dst}")
    for t in model.triggers:
        line = f"trigger {t.src} -> {t.dst}"
        if t.guard is not None:
            line += f" when {t.guard}"
        elif t.otherwise:
            line += " otherwise"
        lines.append(line)
    return "\n".join(lines) + "\n"
