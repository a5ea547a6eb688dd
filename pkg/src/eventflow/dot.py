"""A small DOT reader and writer.

Only the part of the language that CFG dumps use is accepted: one or more
``digraph`` blocks with node, edge and attribute-default statements.
Subgraphs, ports and undirected graphs are rejected with a positioned
diagnostic instead of being half-supported.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .errors import IngestError

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*|/\*.*?\*/|\#[^\n]*)
  | (?P<arrow>->)
  | (?P<undirected>--)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<number>-?(?:\.[0-9]+|[0-9]+(?:\.[0-9]*)?))
  | (?P<ident>[A-Za-z_\u0080-\uffff][A-Za-z_0-9\u0080-\uffff]*)
  | (?P<punct>[{}\[\];,=:])
    """,
    re.VERBOSE | re.DOTALL,
)

KEYWORDS = {"strict", "graph", "digraph", "node", "edge", "subgraph"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str, source: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise IngestError(
                "parse-error",
                f"unexpected character {text[pos]!r}",
                line=line,
                column=pos - line_start + 1,
                source=source,
            )
        kind = m.lastgroup
        value = m.group()
        column = pos - line_start + 1
        if value.startswith("#") and text[line_start:pos].strip():
            # '#' only starts a comment (preprocessor output) at the start of a line.
            raise IngestError("parse-error", "unexpected character '#'", line=line, column=column, source=source)
        if kind == "string":
            tokens.append(Token("id", _unquote(value), line, column))
        elif kind in ("number", "ident"):
            low = value.lower()
            tokens.append(Token(low if low in KEYWORDS else "id", value, line, column))
        elif kind in ("arrow", "undirected", "punct"):
            tokens.append(Token(value, value, line, column))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def _unquote(value: str) -> str:
    body = value[1:-1]
    # DOT only defines \" as an escape; a backslash-newline continues the line.
    return body.replace("\\\n", "").replace('\\"', '"')


@dataclass
class NodeStmt:
    node: str
    attrs: dict[str, str]
    line: int
    column: int


@dataclass
class EdgeStmt:
    source: str
    target: str
    attrs: dict[str, str]
    line: int
    column: int


@dataclass
class DotGraph:
    name: Optional[str]
    line: int
    statements: list = field(default_factory=list)


class _Parser:
    def __init__(self, tokens: list[Token], source: str) -> None:
        self.tokens = tokens
        self.i = 0
        self.source = source

    def peek(self) -> Token:
        return self.tokens[self.i]

    def take(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, tok: Token, message: str) -> IngestError:
        return IngestError("parse-error", message, line=tok.line, column=tok.column, source=self.source)

    def expect(self, kind: str, what: Optional[str] = None) -> Token:
        tok = self.take()
        if tok.kind != kind:
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise self.error(tok, f"expected {what or repr(kind)}, found {found}")
        return tok

    def graphs(self) -> Iterator[DotGraph]:
        while self.peek().kind != "eof":
            yield self.graph()

    def graph(self) -> DotGraph:
        tok = self.take()
        if tok.kind == "strict":
            tok = self.take()
        if tok.kind == "graph":
            raise self.error(tok, "undirected graphs are not supported; use 'digraph'")
        if tok.kind != "digraph":
            raise self.error(tok, f"expected 'digraph', found {tok.text!r}")
        name = None
        if self.peek().kind == "id":
            name = self.take().text
        self.expect("{")
        g = DotGraph(name, tok.line)
        defaults = {"node": {}, "edge": {}}
        while self.peek().kind != "}":
            self.statement(g, defaults)
            while self.peek().kind == ";":
                self.take()
        self.take()
        return g

    def statement(self, g: DotGraph, defaults: dict[str, dict[str, str]]) -> None:
        tok = self.peek()
        if tok.kind in ("node", "edge", "graph"):
            self.take()
            attrs = self.attr_lists()
            if tok.kind != "graph":
                defaults[tok.kind].update(attrs)
            return
        if tok.kind == "subgraph" or tok.kind == "{":
            raise self.error(tok, "subgraphs are not supported")
        if tok.kind == "eof":
            raise self.error(tok, "unterminated digraph body, expected '}'")
        first = self.expect("id", "a node id")
        if self.peek().kind == "=":
            self.take()
            self.expect("id", "an attribute value")
            return
        if self.peek().kind == ":":
            raise self.error(self.peek(), "node ports are not supported")
        if self.peek().kind == "--":
            raise self.error(self.peek(), "'--' is an undirected edge; use '->'")
        chain = [first]
        while self.peek().kind == "->":
            self.take()
            nxt = self.peek()
            if nxt.kind in ("subgraph", "{"):
                raise self.error(nxt, "subgraphs are not supported")
            chain.append(self.expect("id", "a node id"))
        attrs = self.attr_lists()
        if len(chain) == 1:
            g.statements.append(NodeStmt(first.text, {**defaults["node"], **attrs}, first.line, first.column))
            return
        merged = {**defaults["edge"], **attrs}
        for a, b in zip(chain, chain[1:]):
            g.statements.append(EdgeStmt(a.text, b.text, dict(merged), a.line, a.column))

    def attr_lists(self) -> dict[str, str]:
        attrs: dict[str, str] = {}
        while self.peek().kind == "[":
            self.take()
            while self.peek().kind != "]":
                key = self.expect("id", "an attribute name")
                self.expect("=", "'='")
                value = self.expect("id", "an attribute value")
                attrs[key.text] = value.text
                if self.peek().kind in (",", ";"):
                    self.take()
            self.take()
        return attrs


def parse_dot(text: str, source: str = "<input>") -> list[DotGraph]:
    """Parse every digraph in ``text``."""
    parser = _Parser(tokenize(text, source), source)
    graphs = list(parser.graphs())
    if not graphs:
        raise IngestError("parse-error", "no digraph found", line=1, column=1, source=source)
    return graphs


_PLAIN_ID = re.compile(r"[A-Za-z_][A-Za-z_0-9]*\Z")


def quote(value: str) -> str:
    if _PLAIN_ID.match(value) and value.lower() not in KEYWORDS:
        return value
    return '"' + value.replace('"', '\\"') + '"'


def format_attrs(attrs: list[tuple[str, str]]) -> str:
    if not attrs:
        return ""
    return " [" + ", ".join(f"{k}={quote(v)}" for k, v in attrs) + "]"
