"""Map-to-rule compilation and the CONSTRUCT rule text format.

Rule text layout (one rule per ``.rq`` file)::

    # @id: Preprocessing#s1#q1
    prefix dom: <...>
    prefix map: <...>
    construct
    {
        _:s map:hasStrategy _:g
        _:g map:hasParameter map:AnyParameter
        _:s map:hasSource _:o
        _:o map:hasObject map:AnyObject
        _:o map:hasVerb map:AnyVerb
        _:s map:hasTarget _:i
        _:i map:hasObject dom:Image
        _:i map:hasVerb dom:Debiasing
        _:s map:hasResource ?service
    }
    where
    { ...service query body, or one section-shaped group per subgoal... }

Concrete rules carry ``hasResource`` in the template; abstract rules do not
and instead require one ``hasResource`` per subgoal group in the body.
"""

from __future__ import annotations

import re
from typing import Mapping

from .diagnostics import ParseError
from .engine import AbstractBody, ConcreteBody, Rule, RuleError
from .maps import ANY_OBJECT, ANY_PARAMETER, ANY_VERB, MapModel, enumerate_paths, section_signature
from .query import ConstructQuery, GraphPattern, Query, SelectQuery, TriplePattern, Var
from .signature import ANY, SectionPattern, Slot
from .syntax.sparql import format_group, format_term, parse_query, query_iris, used_prefixes
from .terms import MAP, WELL_KNOWN, Blank, Iri, mapv

HAS_STRATEGY = mapv("hasStrategy")
HAS_PARAMETER = mapv("hasParameter")
HAS_SOURCE = mapv("hasSource")
HAS_TARGET = mapv("hasTarget")
HAS_OBJECT = mapv("hasObject")
HAS_VERB = mapv("hasVerb")
HAS_RESOURCE = mapv("hasResource")

_ID_COMMENT = re.compile(r"^\s*#\s*@id:\s*(\S+)\s*$", re.MULTILINE)


class CompileError(ValueError):
    pass


def compile_map(
    m: MapModel,
    queries: Mapping[str, Query],
    heads: list[SectionPattern] | None = None,
    max_paths: int = 64,
    origin: str | None = None,
) -> list[Rule]:
    """Abstract rules, one per start-to-stop path and head, then concrete rules per attachment.

    ``heads`` are the signatures of the sections this map refines; when not
    given, the map's own ``goal`` declaration supplies the head.
    """
    if heads is None:
        heads = [m.goal_head()] if m.goal is not None else []
    unique: list[SectionPattern] = []
    for h in heads:
        if h not in unique:
            unique.append(h)
    prefixes = {**m.prefixes, "map": MAP}
    rules: list[Rule] = []

    paths = enumerate_paths(m, max_paths).paths
    if paths and not unique:
        raise CompileError(f"map {m.id!r} refines no section and declares no goal; it has no rule head")
    for j, head in enumerate(unique, 1):
        for k, path in enumerate(paths, 1):
            rid = f"{m.id}#p{k}" if len(unique) == 1 else f"{m.id}#h{j}#p{k}"
            subgoals = tuple(section_signature(m, s.id) for s in path.sections if not m.closing(s))
            try:
                body = AbstractBody(subgoals)
            except RuleError as exc:
                raise CompileError(f"{rid}: {exc}") from None
            rules.append(Rule(rid, head, body, prefixes, origin))

    for sid in sorted(m.attachments):
        head = section_signature(m, sid)
        for j, ref in enumerate(m.attachments[sid], 1):
            rid = f"{m.id}#{sid}#q{j}"
            if ref not in queries:
                raise CompileError(f"{rid}: unresolvable query reference {ref!r}")
            q = queries[ref]
            if not isinstance(q, SelectQuery) or len(q.projection) != 1:
                raise CompileError(f"{rid}: query {ref!r} must be a select with exactly one projected variable")
            body = ConcreteBody(q.where, q.projection[0])
            rules.append(Rule(rid, head, body, {**prefixes, **q.prefixes}, origin))
    return rules


def _enc(slot: Slot, wildcard: Iri) -> Iri:
    return wildcard if slot is ANY else slot


def _section_triples(s, g, o, i, sig: SectionPattern) -> list[TriplePattern]:
    return [
        TriplePattern(s, HAS_STRATEGY, g),
        TriplePattern(g, HAS_PARAMETER, _enc(sig.strategy_param, ANY_PARAMETER)),
        TriplePattern(s, HAS_SOURCE, o),
        TriplePattern(o, HAS_OBJECT, _enc(sig.source_object, ANY_OBJECT)),
        TriplePattern(o, HAS_VERB, _enc(sig.source_verb, ANY_VERB)),
        TriplePattern(s, HAS_TARGET, i),
        TriplePattern(i, HAS_OBJECT, _enc(sig.target_object, ANY_OBJECT)),
        TriplePattern(i, HAS_VERB, _enc(sig.target_verb, ANY_VERB)),
    ]


def rule_query(r: Rule) -> ConstructQuery:
    """The CONSTRUCT query equivalent of ``r``."""
    template = _section_triples(Blank("s"), Blank("g"), Blank("o"), Blank("i"), r.head)
    if isinstance(r.body, ConcreteBody):
        template.append(TriplePattern(Blank("s"), HAS_RESOURCE, r.body.service_var))
        where = r.body.pattern
    else:
        patterns: list[TriplePattern] = []
        for k, sg in enumerate(r.body.subgoals, 1):
            patterns += _section_triples(Var(f"s{k}"), Var(f"g{k}"), Var(f"o{k}"), Var(f"i{k}"), sg)
            patterns.append(TriplePattern(Var(f"s{k}"), HAS_RESOURCE, Var(f"r{k}")))
        where = GraphPattern(tuple(patterns))
    return ConstructQuery(tuple(template), where, {**r.prefixes, "map": MAP})


def emit_rule_text(r: Rule) -> str:
    q = rule_query(r)
    namespaces = {**WELL_KNOWN, **q.prefixes}
    used = used_prefixes(query_iris(q), namespaces)
    lines = [f"# @id: {r.id}"]
    lines += [f"prefix {p}: <{base}>" for p, base in sorted(used.items())]
    lines.append("construct")
    lines.append("{")
    lines += ["        " + " ".join(format_term(t, namespaces) for t in tp) for tp in q.template]
    lines.append("}")
    lines.append("where")
    lines.append("{")
    lines += format_group(q.where, namespaces)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _locate(text: str, word: str) -> tuple[int, int]:
    m = re.search(rf"\b{word}\b", text, re.IGNORECASE)
    if m is None:
        return 1, 1
    line = text.count("\n", 0, m.start()) + 1
    col = m.start() - (text.rfind("\n", 0, m.start()) + 1) + 1
    return line, col


def _dec(term, wildcard: Iri) -> Slot:
    if not isinstance(term, Iri):
        raise ValueError("slot value must be an IRI")
    return ANY if term == wildcard else term


def _read_section(triples: list[TriplePattern], s) -> tuple[SectionPattern, list, list[TriplePattern]]:
    """Decode the section rooted at ``s``; returns (signature, resources, consumed)."""

    def one(subject, predicate) -> TriplePattern:
        found = [tp for tp in triples if tp.subject == subject and tp.predicate == predicate]
        if len(found) != 1:
            raise ValueError(f"expected exactly one {predicate} for {subject}")
        return found[0]

    used = [one(s, HAS_STRATEGY), one(s, HAS_SOURCE), one(s, HAS_TARGET)]
    g, o, i = used[0].object, used[1].object, used[2].object
    for node in (g, o, i):
        if not isinstance(node, (Blank, Var)):
            raise ValueError("section nodes must be blank nodes or variables")
    if len({g, o, i, s}) != 4:
        raise ValueError("section nodes must be distinct")
    param, so, sv, to, tv = (one(g, HAS_PARAMETER), one(o, HAS_OBJECT), one(o, HAS_VERB),
                             one(i, HAS_OBJECT), one(i, HAS_VERB))
    used += [param, so, sv, to, tv]
    sig = SectionPattern(
        source_verb=_dec(sv.object, ANY_VERB),
        source_object=_dec(so.object, ANY_OBJECT),
        strategy_param=_dec(param.object, ANY_PARAMETER),
        target_verb=_dec(tv.object, ANY_VERB),
        target_object=_dec(to.object, ANY_OBJECT),
    )
    resources = [tp for tp in triples if tp.subject == s and tp.predicate == HAS_RESOURCE]
    return sig, resources, used + resources


def parse_rule_text(text: str, rule_id: str | None = None, origin: str | None = None) -> Rule:
    """Inverse of ``emit_rule_text``.

    The id comes from a ``# @id:`` comment, falling back to ``rule_id``.
    """
    m = _ID_COMMENT.search(text)
    if m is not None:
        rule_id = m.group(1)
    if not rule_id:
        raise ParseError.at(1, 1, "rule has no id")
    q = parse_query(text)
    if not isinstance(q, ConstructQuery):
        raise ParseError.at(*_locate(text, "select"), "rule must be a construct query")

    template = list(q.template)
    roots = [tp.subject for tp in template if tp.predicate == HAS_TARGET]
    try:
        if len(roots) != 1:
            raise ValueError("expected exactly one map:hasTarget")
        head, resources, used = _read_section(template, roots[0])
        if len(used) != len(template):
            raise ValueError("unexpected triples")
    except ValueError as exc:
        raise ParseError.at(*_locate(text, "construct"), f"template not section-shaped: {exc}") from None

    prefixes = dict(q.prefixes)
    if resources:
        service_vars = {tp.object for tp in resources}
        if len(service_vars) != 1:
            raise ParseError.at(*_locate(text, "construct"), "ambiguous service variable")
        (var,) = service_vars
        if not isinstance(var, Var):
            raise ParseError.at(*_locate(text, "construct"), "map:hasResource must point to a variable")
        try:
            body = ConcreteBody(q.where, var)
        except RuleError as exc:
            raise ParseError.at(*_locate(text, "where"), str(exc)) from None
        return Rule(rule_id, head, body, prefixes, origin)

    where = list(q.where.patterns)
    where_at = _locate(text, "where")
    if q.where.filters:
        raise ParseError.at(*where_at, "abstract rule bodies take no filters")
    roots = []
    for tp in where:
        if tp.predicate == HAS_TARGET and tp.subject not in roots:
            roots.append(tp.subject)
    subgoals: list[SectionPattern] = []
    consumed = 0
    for root in roots:
        try:
            sig, resources, used = _read_section(where, root)
        except ValueError as exc:
            raise ParseError.at(*where_at, f"where-block not section-shaped: {exc}") from None
        if not resources:
            raise ParseError.at(*where_at, "missing map:hasResource for a subgoal section")
        if len(resources) > 1:
            raise ParseError.at(*where_at, "ambiguous resource variable for a subgoal section")
        subgoals.append(sig)
        consumed += len(used)
    if consumed != len(where):
        raise ParseError.at(*where_at, "where-block not section-shaped: unexpected triples")
    try:
        body = AbstractBody(tuple(subgoals))
    except RuleError as exc:
        raise ParseError.at(*where_at, str(exc)) from None
    return Rule(rule_id, head, body, prefixes, origin)
