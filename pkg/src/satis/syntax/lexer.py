"""Tokenizer shared by the Turtle-lite, SPARQL-lite and map DSL readers."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..terms import Iri
from ..diagnostics import ParseError

_LOCAL = r"[A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?"
_PNAME = r"[A-Za-z](?:[A-Za-z0-9_\-]*)"

_SPEC = [
    ("WS", r"[ \t\r]+"),
    ("NL", r"\n"),
    ("COMMENT", r"#[^\n]*"),
    ("IRI", r"<[^<>\"{}|^`\\\s]*>"),
    ("OP", r"<=:|=:|[<>!]=|=|>|<(?=\s)"),
    ("STRING", r'"(?:[^"\\\n]|\\.)*"'),
    ("BLANK", r"_:" + _LOCAL),
    ("VAR", r"\?" + _LOCAL),
    ("QNAME", rf"(?:{_PNAME})?:(?:{_LOCAL})?"),
    ("AT", r"@[A-Za-z]+"),
    ("NAME", r"[A-Za-z_][A-Za-z0-9_\-]*"),
    ("PUNCT", r"[{}().;,]"),
]
_MASTER = re.compile("|".join(f"(?P<{k}>{v})" for k, v in _SPEC))
_UNESCAPE = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int

    def is_word(self, *words: str, ci: bool = False) -> bool:
        if self.kind != "NAME":
            return False
        text = self.text.lower() if ci else self.text
        return text in words

    def is_punct(self, ch: str) -> bool:
        return self.kind == "PUNCT" and self.text == ch


def unescape(body: str) -> str:
    return re.sub(r"\\(.)", lambda m: _UNESCAPE.get(m.group(1), m.group(1)), body)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _MASTER.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            ch = text[pos]
            if ch == "<":
                raise ParseError.at(line, col, "unterminated IRI")
            if ch == '"':
                raise ParseError.at(line, col, "unterminated string")
            raise ParseError.at(line, col, f"unexpected character {ch!r}")
        kind = m.lastgroup
        if kind == "NL":
            line += 1
            line_start = m.end()
        elif kind not in ("WS", "COMMENT"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, tok: Token, message: str) -> ParseError:
        return ParseError.at(tok.line, tok.column, message)

    def expect_punct(self, ch: str) -> Token:
        tok = self.next()
        if not tok.is_punct(ch):
            raise self.error(tok, f"expected {ch!r}, found {tok.text or 'end of input'!r}")
        return tok

    def expect_word(self, word: str, ci: bool = False) -> Token:
        tok = self.next()
        if not tok.is_word(word, ci=ci):
            raise self.error(tok, f"expected {word!r}, found {tok.text or 'end of input'!r}")
        return tok

    def expect_kind(self, kind: str, what: str) -> Token:
        tok = self.next()
        if tok.kind != kind:
            raise self.error(tok, f"expected {what}, found {tok.text or 'end of input'!r}")
        return tok


def resolve_qname(tok: Token, prefixes: dict[str, str]) -> Iri:
    prefix, _, local = tok.text.partition(":")
    if prefix not in prefixes:
        raise ParseError.at(tok.line, tok.column, f"unknown prefix {prefix}")
    return Iri(prefixes[prefix] + local)


def resolve_iri(tok: Token, prefixes: dict[str, str]) -> Iri:
    if tok.kind == "IRI":
        return Iri(tok.text[1:-1])
    if tok.kind == "QNAME":
        return resolve_qname(tok, prefixes)
    raise ParseError.at(tok.line, tok.column, f"expected an IRI, found {tok.text or 'end of input'!r}")


def read_prefix_decl(ts: TokenStream, prefixes: dict[str, str]) -> None:
    """Consume ``PNAME: <iri>`` after the prefix keyword."""
    name = ts.next()
    if name.kind != "QNAME" or not name.text.endswith(":") or name.text.count(":") != 1:
        raise ts.error(name, "expected a prefix name like 'dom:'")
    iri = ts.expect_kind("IRI", "an IRI reference")
    prefixes[name.text[:-1]] = iri.text[1:-1]
