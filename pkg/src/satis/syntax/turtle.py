"""Turtle-lite reader and canonical writer."""

from __future__ import annotations

from ..graph import Graph
from ..terms import RDF_TYPE, WELL_KNOWN, Blank, Literal, Term, TermError, Triple, compact
from ..diagnostics import WARNING, ParseDiagnostic, SourceSpan
from .lexer import Token, TokenStream, read_prefix_decl, resolve_iri, unescape


class _Reader:
    def __init__(self, text: str, scope: str):
        self.ts = TokenStream(text)
        self.scope = scope
        self.prefixes = dict(WELL_KNOWN)
        self.declared: dict[str, str] = {}
        self.blanks: dict[str, Blank] = {}
        self.graph = Graph()
        self.warnings: list[ParseDiagnostic] = []

    def blank(self, tok: Token) -> Blank:
        label = tok.text[2:]
        if label not in self.blanks:
            self.blanks[label] = Blank(f"{self.scope}b{len(self.blanks) + 1}")
        return self.blanks[label]

    def term(self, tok: Token, position: str) -> Term:
        try:
            if tok.kind in ("IRI", "QNAME"):
                return resolve_iri(tok, self.prefixes)
        except TermError as exc:
            raise self.ts.error(tok, str(exc)) from None
        if tok.kind == "BLANK":
            if position == "predicate":
                raise self.ts.error(tok, "predicate must be an IRI")
            return self.blank(tok)
        if tok.kind == "STRING":
            if position != "object":
                raise self.ts.error(tok, f"literal not allowed in {position} position")
            return Literal(unescape(tok.text[1:-1]))
        if position == "predicate" and tok.is_word("a"):
            return RDF_TYPE
        if position == "predicate" and tok.kind != "EOF":
            raise self.ts.error(tok, "predicate must be an IRI")
        raise self.ts.error(tok, f"expected {position}, found {tok.text or 'end of input'!r}")

    def parse(self) -> Graph:
        ts = self.ts
        while ts.peek().kind != "EOF":
            tok = ts.peek()
            if tok.kind == "AT":
                if tok.text != "@prefix":
                    raise ts.error(tok, f"unknown directive {tok.text}")
                ts.next()
                name = ts.peek()
                before = dict(self.prefixes)
                read_prefix_decl(ts, self.prefixes)
                pname = name.text[:-1]
                if pname in self.declared and before.get(pname) != self.prefixes[pname]:
                    self.warnings.append(ParseDiagnostic(
                        SourceSpan(name.line, name.column), f"prefix {pname} redefined", WARNING))
                self.declared[pname] = self.prefixes[pname]
                ts.expect_punct(".")
                continue
            subject = self.term(ts.next(), "subject")
            while True:
                predicate = self.term(ts.next(), "predicate")
                obj = self.term(ts.next(), "object")
                self.graph.insert(Triple(subject, predicate, obj))
                sep = ts.next()
                if sep.is_punct("."):
                    break
                if not sep.is_punct(";"):
                    raise ts.error(sep, f"expected ';' or '.', found {sep.text or 'end of input'!r}")
        self.graph.namespaces.update(self.declared)
        return self.graph


def parse_turtle(text: str, scope: str = "") -> tuple[Graph, list[ParseDiagnostic]]:
    """Parse Turtle-lite text.

    Blank node labels are rewritten to ``<scope>b1``, ``<scope>b2``, ... in
    order of first appearance, so documents loaded with distinct scopes never
    share blank nodes. Raises ``ParseError`` on the first error; the returned
    diagnostics hold warnings only.
    """
    reader = _Reader(text, scope)
    graph = reader.parse()
    return graph, reader.warnings


def serialize_turtle(graph: Graph) -> str:
    namespaces = {**WELL_KNOWN, **graph.namespaces}
    lines = [f"@prefix {p}: <{base}> ." for p, base in sorted(graph.namespaces.items())]
    if lines:
        lines.append("")
    for t in graph:
        lines.append(" ".join(compact(term, namespaces) for term in t) + " .")
    return "\n".join(lines) + "\n"
