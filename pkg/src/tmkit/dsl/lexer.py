"""Line tokenizer and error types shared by all the text formats."""

from __future__ import annotations

import re
from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    start: int  # 1-based columns
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError("span start after end")

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.start}"


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    message: str
    expected: tuple = ()

    def __post_init__(self):
        if not self.message:
            raise ValueError("parse error needs a message")

    def __str__(self) -> str:
        extra = f" (expected {', '.join(self.expected)})" if self.expected else ""
        return f"{self.span}: {self.message}{extra}"


class DslError(Exception):
    """Raised with every ParseError found in a document."""

    def __init__(self, errors: list[ParseError]):
        self.errors = list(errors)
        super().__init__("\n".join(str(e) for e in self.errors))


@dataclass(frozen=True)
class Tok:
    kind: str  # word | str | sym | eol
    text: str
    col: int  # 1-based

    @property
    def end(self) -> int:
        return self.col + max(len(self.text), 1) - 1


_TOK = re.compile(
    r"""\s*(?:
        (?P<str>"(?:[^"\\]|\\.)*")
      | (?P<sym>->|[:,={}();])
      | (?P<word>(?:[^\s:,={}();"\-]|-(?!>))+)
    )""",
    re.VERBOSE,
)


def strip_comment(line: str) -> str:
    in_str = False
    esc = False
    for i, ch in enumerate(line):
        if esc:
            esc = False
        elif ch == "\\" and in_str:
            esc = True
        elif ch == '"':
            in_str = not in_str
        elif ch == "#" and not in_str:
            return line[:i]
    return line


class LineCursor:
    """Token cursor over one source line; errors carry precise spans."""

    def __init__(self, file: str, lineno: int, text: str):
        self.file = file
        self.lineno = lineno
        self.text = strip_comment(text).rstrip()
        self.toks: list[Tok] = []
        pos = 0
        while pos < len(self.text):
            m = _TOK.match(self.text, pos)
            if not m or m.end() == pos:
                col = len(self.text[:pos]) + len(self.text[pos:]) - len(self.text[pos:].lstrip()) + 1
                self.toks.append(Tok("bad", self.text[col - 1:], col))
                break
            kind = m.lastgroup
            self.toks.append(Tok(kind, m.group(kind), m.start(kind) + 1))
            pos = m.end()
        self.i = 0

    def span(self, tok: Tok) -> SourceSpan:
        return SourceSpan(self.file, self.lineno, tok.col, tok.end)

    def eol_tok(self) -> Tok:
        return Tok("eol", "", len(self.text) + 1)

    def peek(self) -> Tok:
        return self.toks[self.i] if self.i < len(self.toks) else self.eol_tok()

    def at_end(self) -> bool:
        return self.i >= len(self.toks)

    def next(self) -> Tok:
        t = self.peek()
        self.i += 1
        return t

    def fail(self, tok: Tok, message: str, expected=()) -> "LineFailure":
        return LineFailure(ParseError(self.span(tok), message, tuple(expected)))

    def word(self, what: str) -> str:
        t = self.next()
        if t.kind != "word":
            got = "end of line" if t.kind == "eol" else repr(t.text)
            raise self.fail(t, f"expected {what}, got {got}", [what])
        return t.text

    def keyword(self, *options: str) -> str:
        t = self.next()
        if t.text not in options:
            got = "end of line" if t.kind == "eol" else repr(t.text)
            raise self.fail(t, f"expected {' or '.join(repr(o) for o in options)}, got {got}", options)
        return t.text

    def accept(self, text: str) -> bool:
        if self.peek().text == text and self.peek().kind != "str":
            self.i += 1
            return True
        return False

    def rest(self) -> tuple[str, int]:
        """Remaining raw text and its 1-based starting column."""
        t = self.peek()
        if t.kind == "eol":
            return "", t.col
        self.i = len(self.toks)
        return self.text[t.col - 1:], t.col

    def expect_end(self):
        if not self.at_end():
            t = self.peek()
            raise self.fail(t, f"unexpected {t.text!r}", ["end of line"])


class LineFailure(Exception):
    def __init__(self, error: ParseError):
        self.error = error
        super().__init__(str(error))


def iter_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if strip_comment(raw).strip():
            yield lineno, raw
