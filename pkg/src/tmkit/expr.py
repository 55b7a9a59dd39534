"""Attribute expressions, guards and effect statements used inside static models.

Values are ints or text. A list-valued attribute is text of comma-separated
integers (``"25,50,50"``); ``sum()`` and ``count()`` read it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

Value = Union[int, str]
Env = dict  # thing type -> {attr: value}


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, column: int):
        super().__init__(message)
        self.column = column


class EvalError(Exception):
    """Raised when an expression refers to something the environment lacks."""


# --- AST -----------------------------------------------------------------


@dataclass(frozen=True)
class Lit:
    value: Value

    def __str__(self) -> str:
        if isinstance(self.value, str):
            return '"' + self.value.replace("\\", "\\\\").replace('"', '\\"') + '"'
        return str(self.value)


@dataclass(frozen=True)
class Ref:
    thing: str
    attr: str

    def __str__(self) -> str:
        return f"{self.thing}.{self.attr}"


@dataclass(frozen=True)
class Call:
    func: str  # sum | count
    arg: Ref
    extra: tuple = ()

    def __str__(self) -> str:
        args = [str(self.arg)] + [str(e) for e in self.extra]
        return f"{self.func}({', '.join(args)})"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} {self.op} {_wrap(self.right)}"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"

    def __str__(self) -> str:
        return f"-{_wrap(self.operand)}"


Expr = Union[Lit, Ref, Call, BinOp, Neg]


def _wrap(e: Expr) -> str:
    return f"({e})" if isinstance(e, (BinOp, Neg)) else str(e)


GUARD_OPS = ("=", "!=", "<", "<=", ">", ">=")
_OP_ALIASES = {"≠": "!=", "≤": "<=", "≥": ">=", "==": "="}


@dataclass(frozen=True)
class Guard:
    lhs: Union[Lit, Ref]
    op: str
    rhs: Union[Lit, Ref]

    def __str__(self) -> str:
        return f"{self.lhs} {self.op} {self.rhs}"


# Effect statements


@dataclass(frozen=True)
class SetAttr:
    attr: str
    expr: Expr

    def __str__(self) -> str:
        return f"set {self.attr} = {self.expr}"


@dataclass(frozen=True)
class Pop:
    store: str

    def __str__(self) -> str:
        return f"pop {self.store}"


@dataclass(frozen=True)
class Append:
    store: str

    def __str__(self) -> str:
        return f"append {self.store}"


@dataclass(frozen=True)
class Distribute:
    """Split a list attribute into single things, each appended to the store
    mapped to its value."""

    source: Ref
    item_thing: str
    item_attr: str
    targets: tuple  # ((store, int value), ...)

    def __str__(self) -> str:
        bins = ", ".join(f"{s}={v}" for s, v in self.targets)
        return f"distribute {self.source} as {self.item_thing}.{self.item_attr} into {bins}"


@dataclass(frozen=True)
class Emit:
    thing: str
    assigns: tuple  # ((attr, Expr), ...)

    def __str__(self) -> str:
        body = ", ".join(f"{a}={e}" for a, e in self.assigns)
        return f"emit {self.thing} {body}".rstrip()


Statement = Union[SetAttr, Pop, Append, Distribute, Emit]


@dataclass(frozen=True)
class Effect:
    statements: tuple

    def __str__(self) -> str:
        return "; ".join(str(s) for s in self.statements)

    def stores(self) -> list[str]:
        out = []
        for s in self.statements:
            if isinstance(s, (Pop, Append)):
                out.append(s.store)
            elif isinstance(s, Distribute):
                out.extend(t for t, _ in s.targets)
        return out

    def refs(self) -> list[Ref]:
        out: list[Ref] = []
        for s in self.statements:
            if isinstance(s, SetAttr):
                out.extend(expr_refs(s.expr))
            elif isinstance(s, Distribute):
                out.append(s.source)
            elif isinstance(s, Emit):
                for _, e in s.assigns:
                    out.extend(expr_refs(e))
        return out


def expr_refs(e: Expr) -> list[Ref]:
    if isinstance(e, Ref):
        return [e]
    if isinstance(e, Call):
        return [e.arg]
    if isinstance(e, BinOp):
        return expr_refs(e.left) + expr_refs(e.right)
    if isinstance(e, Neg):
        return expr_refs(e.operand)
    return []


# --- tokenizer / parser --------------------------------------------------

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>\d+)
      | (?P<str>"(?:[^"\\]|\\.)*")
      | (?P<ident>[A-Za-z_][A-Za-z0-9_\-]*)
      | (?P<op>!=|<=|>=|==|≠|≤|≥|[-+*/().,=<>;])
    )""",
    re.VERBOSE,
)


def tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos:].strip()[:1]!r}", pos)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, offset=0):
        j = self.i + offset
        return self.toks[j] if j < len(self.toks) else ("eof", "", len(self.text))

    def next(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, value: str):
        t = self.next()
        if t[1] != value:
            got = t[1] or "end of input"
            raise ExprSyntaxError(f"expected {value!r}, got {got!r}", t[2])
        return t

    def at_end(self) -> bool:
        return self.i >= len(self.toks)

    def ident(self, what="identifier") -> str:
        t = self.next()
        if t[0] != "ident":
            raise ExprSyntaxError(f"expected {what}, got {t[1] or 'end of input'!r}", t[2])
        return t[1]

    # expr := term (('+'|'-') term)*
    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.next()[1]
            left = BinOp(op, left, self.factor())
        return left

    def factor(self) -> Expr:
        kind, val, col = self.peek()
        if val == "-":
            self.next()
            return Neg(self.factor())
        if val == "(":
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        return self.atom(allow_call=True)

    def atom(self, allow_call=False):
        kind, val, col = self.next()
        if kind == "num":
            return Lit(int(val))
        if kind == "str":
            return Lit(_unquote(val))
        if kind == "ident":
            if allow_call and val in ("sum", "count") and self.peek()[1] == "(":
                self.next()
                arg = self.ref()
                extra = ()
                if val == "count":
                    self.expect(",")
                    extra = (self.atom(),)
                self.expect(")")
                return Call(val, arg, extra)
            self.expect(".")
            return Ref(val, self.ident("attribute name"))
        raise ExprSyntaxError(f"expected value, got {val or 'end of input'!r}", col)

    def ref(self) -> Ref:
        thing = self.ident("thing name")
        self.expect(".")
        return Ref(thing, self.ident("attribute name"))

    def guard(self) -> Guard:
        lhs = self.atom()
        kind, op, col = self.next()
        op = _OP_ALIASES.get(op, op)
        if op not in GUARD_OPS:
            raise ExprSyntaxError(f"expected comparison operator, got {op or 'end of input'!r}", col)
        rhs = self.atom()
        return Guard(lhs, op, rhs)

    def statement(self) -> Statement:
        word = self.ident("effect statement")
        if word == "set":
            attr = self.ident("attribute name")
            self.expect("=")
            return SetAttr(attr, self.expr())
        if word == "pop":
            return Pop(self.ident("store name"))
        if word == "append":
            return Append(self.ident("store name"))
        if word == "distribute":
            src = self.ref()
            if self.ident("'as'") != "as":
                raise ExprSyntaxError("expected 'as'", self.peek(-1)[2])
            item = self.ref()
            if self.ident("'into'") != "into":
                raise ExprSyntaxError("expected 'into'", self.peek(-1)[2])
            targets = []
            while True:
                store = self.ident("store name")
                self.expect("=")
                kind, val, col = self.next()
                if kind != "num":
                    raise ExprSyntaxError("expected integer bin value", col)
                targets.append((store, int(val)))
                if self.peek()[1] != ",":
                    break
                self.next()
            return Distribute(src, item.thing, item.attr, tuple(targets))
        if word == "emit":
            thing = self.ident("thing name")
            assigns = []
            while not self.at_end() and self.peek()[1] != ";":
                attr = self.ident("attribute name")
                self.expect("=")
                assigns.append((attr, self.expr()))
                if self.peek()[1] == ",":
                    self.next()
            return Emit(thing, tuple(assigns))
        raise ExprSyntaxError(f"unknown effect statement {word!r}", self.peek(-1)[2])

    def effect(self) -> Effect:
        stmts = [self.statement()]
        while self.peek()[1] == ";":
            self.next()
            stmts.append(self.statement())
        return Effect(tuple(stmts))

    def finish(self):
        if not self.at_end():
            kind, val, col = self.peek()
            raise ExprSyntaxError(f"unexpected {val!r}", col)


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s[1:-1])


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    p.finish()
    return e


def parse_guard(text: str) -> Guard:
    p = _Parser(text)
    g = p.guard()
    p.finish()
    return g


def parse_effect(text: str) -> Effect:
    p = _Parser(text)
    e = p.effect()
    p.finish()
    return e


def parse_literal(text: str) -> Value:
    p = _Parser(text)
    kind, val, col = p.next()
    neg = False
    if val == "-":
        neg = True
        kind, val, col = p.next()
    p.finish()
    if kind == "num":
        return -int(val) if neg else int(val)
    if kind == "str" and not neg:
        return _unquote(val)
    raise ExprSyntaxError(f"expected literal, got {val!r}", col)


def format_value(v: Value) -> str:
    return str(Lit(v))


# --- evaluation ----------------------------------------------------------


def split_list(v: Value) -> list[int]:
    if isinstance(v, int):
        return [v]
    if not v.strip():
        return []
    try:
        return [int(p) for p in v.split(",")]
    except ValueError:
        raise EvalError(f"not a list of integers: {v!r}") from None


def lookup(ref: Ref, env: Env) -> Value:
    try:
        return env[ref.thing][ref.attr]
    except KeyError:
        raise EvalError(f"missing attribute {ref}") from None


def evaluate(e: Expr, env: Env) -> Value:
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Ref):
        return lookup(e, env)
    if isinstance(e, Call):
        items = split_list(lookup(e.arg, env))
        if e.func == "sum":
            return sum(items)
        return items.count(evaluate(e.extra[0], env))
    if isinstance(e, Neg):
        v = evaluate(e.operand, env)
        if not isinstance(v, int):
            raise EvalError(f"cannot negate text in {e}")
        return -v
    a, b = evaluate(e.left, env), evaluate(e.right, env)
    if e.op == "+" and isinstance(a, str) and isinstance(b, str):
        return a + b
    if not (isinstance(a, int) and isinstance(b, int)):
        raise EvalError(f"arithmetic on text in {e}")
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if b == 0:
        raise EvalError(f"division by zero in {e}")
    return a // b


def check_guard(g: Guard, env: Env) -> bool:
    a, b = evaluate(g.lhs, env), evaluate(g.rhs, env)
    if type(a) is not type(b):
        raise EvalError(f"guard compares int with text: {g}")
    return {
        "=": a == b,
        "!=": a != b,
        "<": a < b,
        "<=": a <= b,
        ">": a > b,
        ">=": a >= b,
    }[g.op]
