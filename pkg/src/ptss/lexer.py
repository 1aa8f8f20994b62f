"""Tokenizer shared by the spec and formula parsers."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .terms import PtssError


class SpecSyntaxError(PtssError):
    def __init__(self, msg, line=None, col=None):
        self.msg, self.line, self.col = msg, line, col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + msg)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<negarrow>-/(?P<nact>[A-Za-z][A-Za-z0-9_]*)->)
  | (?P<arrow>-(?P<act>[A-Za-z][A-Za-z0-9_]*)->)
  | (?P<to>->)
  | (?P<implies>=>)
  | (?P<oplus>\(\+\))
  | (?P<cmp>>=|<=)
  | (?P<wedge>/\\)
  | (?P<num>\d+\.\d+|\d+)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*'*)
  | (?P<sym>\|\||[()\[\]{},:.$=<>~/_+|;*])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise SpecSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind in ("nact", "act"):
            kind = "negarrow" if m.group("negarrow") else "arrow"
        col = pos - line_start + 1
        frag = m.group(0)
        if kind == "negarrow":
            out.append(Token("negarrow", m.group("nact"), line, col))
        elif kind == "arrow":
            out.append(Token("arrow", m.group("act"), line, col))
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, frag, line, col))
        nl = frag.count("\n")
        if nl:
            line += nl
            line_start = pos + frag.rfind("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class TokenStream:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text=None, kind=None) -> bool:
        t = self.cur
        return (text is None or t.text == text) and (kind is None or t.kind == kind)

    def next(self) -> Token:
        t = self.cur
        if t.kind != "eof":
            self.i += 1
        return t

    def accept(self, text=None, kind=None):
        if self.at(text, kind):
            return self.next()
        return None

    def expect(self, text=None, kind=None) -> Token:
        if not self.at(text, kind):
            self.error(f"expected {text or kind}, found {self.cur.text or self.cur.kind!r}")
        return self.next()

    def error(self, msg, tok=None):
        tok = tok or self.cur
        raise SpecSyntaxError(msg, tok.line, tok.col)
