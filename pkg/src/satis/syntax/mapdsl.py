"""Reader and writer for the map DSL.

    @prefix dom: <http://example.org/dom#> .
    map "Preprocessing" {
        start Start
        stop Stop
        goal { verb dom:Preprocessing object dom:Image }
        intention BiasCorrection { verb dom:Debiasing object dom:Image }
        section s1 { from Start to BiasCorrection strategy "by bias field estimation" }
        operationalise s1 with query "debias"
        refine s2 with map "Other"
    }

Names are resolved later, by ``maps.validate``.
"""

from __future__ import annotations

from ..maps import Intention, MapDocument, MapModel, Section, Strategy
from ..signature import ANY
from ..terms import WELL_KNOWN, Iri, TermError, compact, escape_string
from ..diagnostics import SourceSpan
from .lexer import Token, TokenStream, read_prefix_decl, resolve_iri, unescape


class _Reader:
    def __init__(self, text: str):
        self.ts = TokenStream(text)
        self.prefixes = dict(WELL_KNOWN)
        self.declared: dict[str, str] = {}

    def iri(self) -> Iri:
        tok = self.ts.next()
        try:
            return resolve_iri(tok, self.prefixes)
        except TermError as exc:
            raise self.ts.error(tok, str(exc)) from None

    def name(self, what: str) -> Token:
        return self.ts.expect_kind("NAME", what)

    def string(self) -> str:
        return unescape(self.ts.expect_kind("STRING", "a quoted string").text[1:-1])

    def verb_object(self) -> tuple[Iri, Iri]:
        ts = self.ts
        ts.expect_punct("{")
        ts.expect_word("verb")
        verb = self.iri()
        ts.expect_word("object")
        obj = self.iri()
        ts.expect_punct("}")
        return verb, obj

    def map_block(self) -> MapModel:
        ts = self.ts
        map_tok = ts.expect_word("map")
        map_id = self.string()
        if not map_id:
            raise ts.error(map_tok, "map id must not be empty")
        ts.expect_punct("{")
        spans = {"map": SourceSpan(map_tok.line, map_tok.column)}
        intentions: dict[str, Intention] = {}
        sections: dict[str, Section] = {}
        refinements: dict[str, str] = {}
        attachments: dict[str, list[str]] = {}
        start = stop = None
        goal = None

        def declare(tok: Token, intention: Intention) -> None:
            if intention.name in intentions:
                raise ts.error(tok, f"duplicate intention name {intention.name}")
            intentions[intention.name] = intention
            spans[f"intention:{intention.name}"] = SourceSpan(tok.line, tok.column)

        while not ts.peek().is_punct("}"):
            kw = ts.next()
            if kw.is_word("start", "stop"):
                tok = self.name("an intention name")
                if (start if kw.text == "start" else stop) is not None:
                    raise ts.error(kw, f"{kw.text} declared twice")
                declare(tok, Intention(tok.text))
                spans[kw.text] = SourceSpan(kw.line, kw.column)
                if kw.text == "start":
                    start = tok.text
                else:
                    stop = tok.text
            elif kw.is_word("goal"):
                if goal is not None:
                    raise ts.error(kw, "goal declared twice")
                goal = self.verb_object()
                spans["goal"] = SourceSpan(kw.line, kw.column)
            elif kw.is_word("intention"):
                tok = self.name("an intention name")
                verb, obj = self.verb_object()
                declare(tok, Intention(tok.text, verb, obj))
            elif kw.is_word("section"):
                tok = self.name("a section id")
                if tok.text in sections:
                    raise ts.error(tok, f"duplicate section id {tok.text}")
                ts.expect_punct("{")
                ts.expect_word("from")
                source = self.name("an intention name").text
                ts.expect_word("to")
                target = self.name("an intention name").text
                label_tok = ts.expect_word("strategy")
                label = self.string()
                if not label:
                    raise ts.error(label_tok, "strategy label must not be empty")
                manner = ANY
                if ts.peek().is_word("manner"):
                    ts.next()
                    manner = self.iri()
                ts.expect_punct("}")
                sections[tok.text] = Section(tok.text, source, target, Strategy(label, manner))
                spans[f"section:{tok.text}"] = SourceSpan(tok.line, tok.column)
            elif kw.is_word("refine"):
                tok = self.name("a section id")
                ts.expect_word("with")
                ts.expect_word("map")
                if tok.text in refinements:
                    raise ts.error(tok, f"section {tok.text} is already refined")
                refinements[tok.text] = self.string()
                spans[f"refine:{tok.text}"] = SourceSpan(tok.line, tok.column)
            elif kw.is_word("operationalise"):
                tok = self.name("a section id")
                ts.expect_word("with")
                ts.expect_word("query")
                attachments.setdefault(tok.text, []).append(self.string())
                spans.setdefault(f"operationalise:{tok.text}", SourceSpan(tok.line, tok.column))
            elif kw.kind == "EOF":
                raise ts.error(kw, f"unterminated map {map_id!r}, expected '}}'")
            else:
                raise ts.error(kw, f"unexpected {kw.text!r} in map body")
        close = ts.expect_punct("}")
        if start is None:
            raise ts.error(close, f"map {map_id!r} has no start declaration")
        if stop is None:
            raise ts.error(close, f"map {map_id!r} has no stop declaration")
        return MapModel(
            id=map_id,
            intentions=intentions,
            sections=sections,
            start=start,
            stop=stop,
            refinements=refinements,
            attachments={k: tuple(v) for k, v in attachments.items()},
            goal=goal,
            prefixes=dict(self.declared),
            spans=spans,
        )

    def parse(self) -> MapDocument:
        ts = self.ts
        while ts.peek().kind == "AT":
            tok = ts.next()
            if tok.text != "@prefix":
                raise ts.error(tok, f"unknown directive {tok.text}")
            name = ts.peek()
            read_prefix_decl(ts, self.prefixes)
            self.declared[name.text[:-1]] = self.prefixes[name.text[:-1]]
            ts.expect_punct(".")
        maps: list[MapModel] = []
        seen: set[str] = set()
        while ts.peek().kind != "EOF":
            tok = ts.peek()
            m = self.map_block()
            if m.id in seen:
                raise ts.error(tok, f"duplicate map id {m.id!r}")
            seen.add(m.id)
            maps.append(m)
        if not maps:
            raise ts.error(ts.peek(), "expected at least one map")
        return MapDocument(tuple(maps), dict(self.declared))


def parse_map_dsl(text: str) -> MapDocument:
    return _Reader(text).parse()


def serialize_map_dsl(doc: MapDocument) -> str:
    ns = {**WELL_KNOWN, **doc.prefixes}
    q = lambda iri: compact(iri, ns)  # noqa: E731
    lines = [f"@prefix {p}: <{base}> ." for p, base in sorted(doc.prefixes.items())]
    for m in doc.maps:
        if lines:
            lines.append("")
        lines.append(f'map "{escape_string(m.id)}" {{')
        lines.append(f"    start {m.start}")
        lines.append(f"    stop {m.stop}")
        if m.goal is not None:
            lines.append(f"    goal {{ verb {q(m.goal[0])} object {q(m.goal[1])} }}")
        for name, it in m.intentions.items():
            if name in (m.start, m.stop):
                continue
            lines.append(f"    intention {name} {{ verb {q(it.verb)} object {q(it.object)} }}")
        for sid, sec in m.sections.items():
            manner = "" if sec.strategy.manner is ANY else f" manner {q(sec.strategy.manner)}"
            lines.append(f"    section {sid} {{ from {sec.source} to {sec.target} "
                         f'strategy "{escape_string(sec.strategy.label)}"{manner} }}')
        for sid, ref in m.refinements.items():
            lines.append(f'    refine {sid} with map "{escape_string(ref)}"')
        for sid, refs in m.attachments.items():
            for ref in refs:
                lines.append(f'    operationalise {sid} with query "{escape_string(ref)}"')
        lines.append("}")
    return "\n".join(lines) + "\n"
