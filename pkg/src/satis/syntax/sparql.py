"""SPARQL-lite reader and writer.

Only ``select`` and ``construct`` forms over a single basic graph pattern
with ``filter(?v OP target)`` constraints, where OP is ``=`` (term
identity), ``=:`` (exact asserted type) or ``<=:`` (asserted type or any
subclass of it). A trailing ``pragma { ... }`` block is accepted and dropped.
"""

from __future__ import annotations

from ..query import (
    OPERATORS,
    ConstructQuery,
    FilterConstraint,
    GraphPattern,
    PatternTerm,
    Query,
    SelectQuery,
    TriplePattern,
    Var,
)
from ..terms import RDF_TYPE, WELL_KNOWN, Blank, Iri, Literal, TermError, compact
from .lexer import Token, TokenStream, read_prefix_decl, resolve_iri, unescape


class _Reader:
    def __init__(self, text: str):
        self.ts = TokenStream(text)
        self.prefixes = dict(WELL_KNOWN)
        self.declared: dict[str, str] = {}

    def term(self, tok: Token) -> PatternTerm:
        if tok.kind == "VAR":
            return Var(tok.text[1:])
        if tok.kind == "BLANK":
            return Blank(tok.text[2:])
        if tok.kind == "STRING":
            return Literal(unescape(tok.text[1:-1]))
        if tok.kind in ("IRI", "QNAME"):
            try:
                return resolve_iri(tok, self.prefixes)
            except TermError as exc:
                raise self.ts.error(tok, str(exc)) from None
        if tok.is_word("a"):
            return RDF_TYPE
        raise self.ts.error(tok, f"expected a term, found {tok.text or 'end of input'!r}")

    def triple(self) -> tuple[TriplePattern, Token]:
        first = self.ts.peek()
        s = self.term(self.ts.next())
        ptok = self.ts.next()
        p = self.term(ptok)
        if not isinstance(p, (Iri, Var)):
            raise self.ts.error(ptok, "predicate must be an IRI or variable")
        o = self.term(self.ts.next())
        if isinstance(s, Literal):
            raise self.ts.error(first, "literal not allowed in subject position")
        if self.ts.peek().is_punct("."):
            self.ts.next()
        return TriplePattern(s, p, o), first

    def group(self) -> GraphPattern:
        ts = self.ts
        open_tok = ts.expect_punct("{")
        patterns: list[TriplePattern] = []
        filters: list[tuple[FilterConstraint, Token]] = []
        while not ts.peek().is_punct("}"):
            tok = ts.peek()
            if tok.kind == "EOF":
                raise ts.error(tok, "unterminated group, expected '}'")
            if tok.is_word("filter", ci=True):
                ts.next()
                ts.expect_punct("(")
                var_tok = ts.expect_kind("VAR", "a variable")
                op = ts.next()
                if op.kind != "OP" or op.text not in OPERATORS:
                    raise ts.error(op, f"unknown filter operator {op.text!r}")
                target_tok = ts.next()
                if target_tok.kind not in ("IRI", "QNAME"):
                    raise ts.error(target_tok, "filter target must be an IRI")
                target = resolve_iri(target_tok, self.prefixes)
                ts.expect_punct(")")
                filters.append((FilterConstraint(Var(var_tok.text[1:]), op.text, target), var_tok))
            else:
                patterns.append(self.triple()[0])
        ts.expect_punct("}")
        if not patterns:
            raise ts.error(open_tok, "empty where-block")
        bound: set[Var] = set()
        for tp in patterns:
            bound |= {_visible(t) for t in tp if isinstance(t, (Var, Blank))}
        for f, tok in filters:
            if f.variable not in bound:
                raise ts.error(tok, f"filter variable {f.variable} does not occur in any triple pattern")
        return GraphPattern(tuple(patterns), tuple(f for f, _ in filters))

    def pragma(self) -> None:
        ts = self.ts
        ts.next()
        ts.expect_punct("{")
        depth = 1
        while depth:
            tok = ts.next()
            if tok.kind == "EOF":
                raise ts.error(tok, "unterminated pragma block")
            if tok.is_punct("{"):
                depth += 1
            elif tok.is_punct("}"):
                depth -= 1

    def parse(self) -> Query:
        ts = self.ts
        while ts.peek().is_word("prefix", ci=True):
            ts.next()
            name = ts.peek()
            read_prefix_decl(ts, self.prefixes)
            self.declared[name.text[:-1]] = self.prefixes[name.text[:-1]]
        head = ts.next()
        query: Query
        if head.is_word("select", ci=True):
            projection: list[tuple[Var, Token]] = []
            while ts.peek().kind == "VAR":
                tok = ts.next()
                projection.append((Var(tok.text[1:]), tok))
            if not projection:
                raise ts.error(ts.peek(), "select needs at least one variable")
            ts.expect_word("where", ci=True)
            where = self.group()
            for var, tok in projection:
                if var not in where.variables:
                    raise ts.error(tok, f"projected variable {var} is not bound in the where-block")
            query = SelectQuery(tuple(v for v, _ in projection), where, dict(self.declared))
        elif head.is_word("construct", ci=True):
            ts.expect_punct("{")
            template: list[TriplePattern] = []
            while not ts.peek().is_punct("}"):
                if ts.peek().kind == "EOF":
                    raise ts.error(ts.peek(), "unterminated construct template")
                template.append(self.triple()[0])
            ts.expect_punct("}")
            if not template:
                raise ts.error(head, "empty construct template")
            ts.expect_word("where", ci=True)
            query = ConstructQuery(tuple(template), self.group(), dict(self.declared))
        else:
            raise ts.error(head, f"expected 'select' or 'construct', found {head.text or 'end of input'!r}")
        if ts.peek().is_word("pragma", ci=True):
            self.pragma()
        if ts.peek().kind != "EOF":
            raise ts.error(ts.peek(), f"unexpected {ts.peek().text!r} after query")
        return query


def _visible(t: Var | Blank) -> Var:
    return Var("_:" + t.label) if isinstance(t, Blank) else t


def parse_query(text: str) -> Query:
    return _Reader(text).parse()


def format_term(t: PatternTerm, namespaces: dict[str, str]) -> str:
    return str(t) if isinstance(t, Var) else compact(t, namespaces)


def format_group(gp: GraphPattern, namespaces: dict[str, str], indent: str = "    ") -> list[str]:
    """Lines of a where-block.

    Filters keep their relative order; each is written as soon as its
    variable is bound and the filter before it has been written.
    """
    pending = list(gp.filters)
    bound: set = set()
    lines = []
    for tp in gp.patterns:
        lines.append(indent + " ".join(format_term(t, namespaces) for t in tp))
        bound |= {_visible(t) for t in tp if isinstance(t, (Var, Blank))}
        while pending and pending[0].variable in bound:
            f = pending.pop(0)
            lines.append(f"{indent}filter({f.variable} {f.operator} {compact(f.target, namespaces)})")
    for f in pending:
        lines.append(f"{indent}filter({f.variable} {f.operator} {compact(f.target, namespaces)})")
    return lines


def used_prefixes(iris, namespaces: dict[str, str]) -> dict[str, str]:
    """Subset of ``namespaces`` actually needed to compact ``iris``."""
    used = {}
    for iri in iris:
        text = compact(iri, namespaces)
        if not text.startswith("<"):
            prefix = text.split(":", 1)[0]
            used[prefix] = namespaces[prefix]
    return used


def query_iris(q: Query):
    pats = list(q.where.patterns) + (list(q.template) if isinstance(q, ConstructQuery) else [])
    for tp in pats:
        yield from (t for t in tp if isinstance(t, Iri))
    for f in q.where.filters:
        yield f.target


def serialize_query(q: Query) -> str:
    namespaces = {**WELL_KNOWN, **q.prefixes}
    used = used_prefixes(query_iris(q), namespaces)
    lines = [f"prefix {p}: <{base}>" for p, base in sorted(used.items())]
    if isinstance(q, SelectQuery):
        lines.append("select " + " ".join(str(v) for v in q.projection))
    else:
        lines.append("construct")
        lines.append("{")
        lines += ["    " + " ".join(format_term(t, namespaces) for t in tp) for tp in q.template]
        lines.append("}")
    lines.append("where")
    lines.append("{")
    lines += format_group(q.where, namespaces)
    lines.append("}")
    return "\n".join(lines) + "\n"
