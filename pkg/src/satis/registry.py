"""The community memory: a directory of ontologies, services, maps, queries and rules.

    <root>/ontology/*.ttl   domain ontology
    <root>/services/*.ttl   service descriptions (process:hasInput / hasOutput)
    <root>/maps/*.map       intentional maps
    <root>/queries/*.rq     generic service descriptions (select queries)
    <root>/rules/*.rq       hand-written rules (construct queries)
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .compiler import CompileError, compile_map, parse_rule_text
from .diagnostics import ERROR, WARNING, ParseDiagnostic, ParseError, SourceSpan
from .engine import ConcreteBody, EngineConfig, RenderingReport, Rule, RuleError, matches, render
from .graph import ClassHierarchy, Graph, subclass_closure, types_of
from .maps import MapModel, section_signature, to_triples, validate
from .query import Query, SelectQuery
from .signature import ANY, SectionPattern
from .syntax import parse_map_dsl, parse_query, parse_turtle
from .syntax.lexer import Token, resolve_iri
from .terms import (
    GROUNDING,
    HAS_INPUT,
    HAS_OUTPUT,
    MAP,
    PROCESS,
    RDF_TYPE,
    RDFS_LABEL,
    SERVICE,
    WELL_KNOWN,
    Blank,
    Iri,
    Literal,
)

log = logging.getLogger(__name__)

_SIGNATURE = re.compile(r"^\s*#\s*@signature:(.*)$", re.MULTILINE)


@dataclass(frozen=True)
class Parameter:
    iri: Iri | Blank
    types: frozenset[Iri]

    def __post_init__(self):
        if not self.types:
            raise ValueError(f"parameter {self.iri} has no type")


@dataclass(frozen=True)
class ServiceDescription:
    iri: Iri
    label: str = ""
    grounding: str = ""
    inputs: tuple[Parameter, ...] = ()
    outputs: tuple[Parameter, ...] = ()


@dataclass(frozen=True)
class FragmentSummary:
    rule_id: str
    kind: str
    signature: SectionPattern
    origin: str


@dataclass
class KnowledgeBase:
    graph: Graph = field(default_factory=Graph)
    hierarchy: ClassHierarchy = field(default_factory=ClassHierarchy)
    rules: dict[str, Rule] = field(default_factory=dict)
    maps: dict[str, MapModel] = field(default_factory=dict)
    services: dict[Iri, ServiceDescription] = field(default_factory=dict)
    queries: dict[str, Query] = field(default_factory=dict)

    @property
    def namespaces(self) -> dict[str, str]:
        return {**WELL_KNOWN, "map": MAP, **self.graph.namespaces}

    def render(self, goal: SectionPattern, cfg: EngineConfig | None = None) -> RenderingReport:
        return render(goal, self.graph, self.hierarchy, self.rules.values(), cfg)


def service_to_triples(sd: ServiceDescription) -> Graph:
    g = Graph(namespaces={"process": PROCESS, "service": SERVICE})
    for predicate, params in ((HAS_INPUT, sd.inputs), (HAS_OUTPUT, sd.outputs)):
        for p in params:
            g.add(sd.iri, predicate, p.iri)
            for t in p.types:
                g.add(p.iri, RDF_TYPE, t)
    if sd.grounding:
        g.add(sd.iri, GROUNDING, Literal(sd.grounding))
    if sd.label:
        g.add(sd.iri, RDFS_LABEL, Literal(sd.label))
    return g


def services_from_graph(graph: Graph) -> list[ServiceDescription]:
    """Every IRI with inputs, outputs or a grounding, as a ServiceDescription.

    Raises ValueError for an untyped parameter.
    """
    subjects = {t.subject for p in (HAS_INPUT, HAS_OUTPUT, GROUNDING) for t in graph.iter_match(None, p, None)}
    out = []
    for s in sorted(x for x in subjects if isinstance(x, Iri)):

        def params(pred: Iri) -> tuple[Parameter, ...]:
            return tuple(Parameter(p, frozenset(types_of(graph, p)))
                         for p in sorted(graph.objects(s, pred)) if isinstance(p, (Iri, Blank)))

        def literal(pred: Iri) -> str:
            vals = sorted(v.value for v in graph.objects(s, pred) if isinstance(v, Literal))
            return vals[0] if vals else ""

        out.append(ServiceDescription(s, literal(RDFS_LABEL), literal(GROUNDING), params(HAS_INPUT), params(HAS_OUTPUT)))
    return out


def refinement_heads(maps: Iterable[MapModel]) -> dict[str, list[SectionPattern]]:
    """Map id -> signatures of the sections (in other maps) that it refines."""
    heads: dict[str, list[SectionPattern]] = {}
    for m in sorted(maps, key=lambda m: m.id):
        for sid in sorted(m.refinements):
            if sid in m.sections:
                heads.setdefault(m.refinements[sid], []).append(section_signature(m, sid))
    return heads


def _rel(root: Path, path: Path) -> str:
    return path.relative_to(root).as_posix()


def _signature_comment(text: str, prefixes: dict[str, str]) -> SectionPattern | None:
    m = _SIGNATURE.search(text)
    if m is None:
        return None
    parts = m.group(1).split()
    if len(parts) != 5:
        raise ValueError("@signature needs five slots: source-verb source-object strategy target-verb target-object")
    ns = {**WELL_KNOWN, "map": MAP, **prefixes}
    slots = [ANY if p == "*" else resolve_iri(Token("QNAME" if not p.startswith("<") else "IRI", p, 1, 1), ns)
             for p in parts]
    return SectionPattern(*slots)


class _Loader:
    def __init__(self, root: Path):
        self.root = root
        self.diags: list[ParseDiagnostic] = []
        self.kb = KnowledgeBase()
        self.origins: dict[str, str] = {}

    def error(self, source: str, message: str, span: SourceSpan | None = None, severity: str = ERROR) -> None:
        self.diags.append(ParseDiagnostic(span or SourceSpan(1, 1), message, severity, source))

    def files(self, folder: str, pattern: str) -> list[Path]:
        d = self.root / folder
        return sorted(p for p in d.glob(pattern) if p.is_file()) if d.is_dir() else []

    def read(self, path: Path) -> str | None:
        try:
            return path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            self.error(_rel(self.root, path), f"cannot read file: {exc}")
            return None

    def parse_failed(self, source: str, exc: ParseError) -> None:
        self.diags.extend(d.with_source(source) for d in exc.diagnostics)

    def load(self) -> tuple[KnowledgeBase, list[ParseDiagnostic]]:
        kb = self.kb
        ontology = Graph()
        turtle_files = [("ontology", p) for p in self.files("ontology", "*.ttl")]
        turtle_files += [("services", p) for p in self.files("services", "*.ttl")]
        for n, (kind, path) in enumerate(turtle_files):
            source = _rel(self.root, path)
            text = self.read(path)
            if text is None:
                continue
            try:
                g, warnings = parse_turtle(text, scope=f"f{n}_")
            except ParseError as exc:
                self.parse_failed(source, exc)
                continue
            self.diags.extend(w.with_source(source) for w in warnings)
            if kind == "ontology":
                ontology.update(g)
            else:
                self.add_services(source, g)
            kb.graph.update(g)

        attached: set[str] = set()
        maps: dict[str, tuple[MapModel, str]] = {}
        for path in self.files("maps", "*.map"):
            source = _rel(self.root, path)
            text = self.read(path)
            if text is None:
                continue
            try:
                doc = parse_map_dsl(text)
            except ParseError as exc:
                self.parse_failed(source, exc)
                continue
            for m in doc.maps:
                if m.id in maps:
                    self.error(source, f"duplicate map id {m.id!r} (first defined in {maps[m.id][1]})", m.span("map"))
                    continue
                maps[m.id] = (m, source)
                for refs in m.attachments.values():
                    attached.update(refs)

        standalone: list[Rule] = []
        for path in self.files("queries", "*.rq"):
            source = _rel(self.root, path)
            text = self.read(path)
            if text is None:
                continue
            try:
                q = parse_query(text)
            except ParseError as exc:
                self.parse_failed(source, exc)
                continue
            kb.queries[path.stem] = q
            try:
                sig = _signature_comment(text, q.prefixes)
            except (ValueError, ParseError) as exc:
                self.error(source, f"bad @signature comment: {exc}")
                continue
            if sig is not None:
                if not isinstance(q, SelectQuery) or len(q.projection) != 1:
                    self.error(source, "a query with @signature must select exactly one variable")
                    continue
                try:
                    standalone.append(Rule(path.stem, sig, ConcreteBody(q.where, q.projection[0]),
                                           dict(q.prefixes), source))
                except RuleError as exc:
                    self.error(source, str(exc))
            elif path.stem not in attached:
                self.error(source, f"query {path.stem!r} is attached to no section and has no @signature; it is inert",
                           severity=WARNING)

        broken: set[str] = set()
        for mid in sorted(maps):
            m, source = maps[mid]
            diags = [d.with_source(source) for d in validate(m, ontology)]
            self.diags.extend(diags)
            if any(d.is_error for d in diags):
                broken.add(mid)
                continue
            for sid in sorted(m.refinements):
                child = m.refinements[sid]
                if child not in maps:
                    self.error(source, f"section {sid} of map {mid!r} refines unknown map {child!r}",
                               m.span(f"refine:{sid}"))
                    broken.add(mid)
            for sid in sorted(m.attachments):
                for ref in m.attachments[sid]:
                    if ref not in kb.queries:
                        self.error(source, f"section {sid} of map {mid!r} is operationalised by unknown query {ref!r}",
                                   m.span(f"operationalise:{sid}"))
                        broken.add(mid)

        heads = refinement_heads(m for mid, (m, _) in maps.items() if mid not in broken)
        compiled: list[Rule] = []
        for n, mid in enumerate(sorted(maps)):
            m, source = maps[mid]
            kb.maps[mid] = m
            kb.graph.update(to_triples(m, scope=f"m{n}_"))
            if mid in broken:
                continue
            map_heads = heads.get(mid, []) + ([m.goal_head()] if m.goal is not None else [])
            if not map_heads:
                self.error(source, f"map {mid!r} is refined by no section and declares no goal", m.span("map"))
                continue
            try:
                compiled += compile_map(m, kb.queries, map_heads, origin=source)
            except CompileError as exc:
                self.error(source, str(exc), m.span("map"))

        for path in self.files("rules", "*.rq"):
            source = _rel(self.root, path)
            text = self.read(path)
            if text is None:
                continue
            try:
                compiled.append(parse_rule_text(text, rule_id=path.stem, origin=source))
            except ParseError as exc:
                self.parse_failed(source, exc)

        for rule in compiled + standalone:
            if rule.id in kb.rules:
                self.error(rule.origin or "", f"duplicate rule id {rule.id!r} (also in {kb.rules[rule.id].origin})")
                continue
            kb.rules[rule.id] = rule

        kb.graph.seal()
        kb.hierarchy = subclass_closure(kb.graph)
        log.info("loaded %d rules, %d maps, %d services from %s", len(kb.rules), len(kb.maps), len(kb.services), self.root)
        return kb, self.diags

    def add_services(self, source: str, g: Graph) -> None:
        try:
            found = services_from_graph(g)
        except ValueError as exc:
            self.error(source, str(exc))
            return
        for sd in found:
            if sd.iri in self.kb.services:
                self.error(source, f"duplicate service {sd.iri} (also in {self.origins[sd.iri.value]})")
                continue
            self.kb.services[sd.iri] = sd
            self.origins[sd.iri.value] = source


def load_memory(root: str | Path) -> tuple[KnowledgeBase, list[ParseDiagnostic]]:
    """Load and compile the memory under ``root``.

    Raises ``FileNotFoundError`` when ``root`` is not a directory; every
    other problem is reported as a diagnostic.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"memory directory not found: {root}")
    return _Loader(root).load()


def list_fragments(kb: KnowledgeBase, verb: Iri | None = None, obj: Iri | None = None) -> list[FragmentSummary]:
    goal = SectionPattern(target_verb=verb or ANY, target_object=obj or ANY)
    out = []
    for rid in sorted(kb.rules):
        rule = kb.rules[rid]
        if (verb is not None or obj is not None) and not matches(rule.head, goal, kb.hierarchy):
            continue
        out.append(FragmentSummary(rid, rule.kind, rule.head, rule.origin or ""))
    return out


__all__ = [
    "FragmentSummary",
    "KnowledgeBase",
    "Parameter",
    "ServiceDescription",
    "list_fragments",
    "load_memory",
    "refinement_heads",
    "service_to_triples",
    "services_from_graph",
]
