"""Intentional maps: intentions linked by strategies, grouped into sections."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .graph import Graph
from .signature import ANY, SectionPattern, Slot
from .diagnostics import ERROR, WARNING, ParseDiagnostic, SourceSpan
from .terms import MAP, RDF_TYPE, RDFS_LABEL, Blank, Iri, Literal, compact, mapv

ANY_VERB = mapv("AnyVerb")
ANY_OBJECT = mapv("AnyObject")
ANY_PARAMETER = mapv("AnyParameter")


class MapError(ValueError):
    pass


@dataclass(frozen=True)
class Intention:
    name: str
    verb: Slot = ANY
    object: Slot = ANY


@dataclass(frozen=True)
class Strategy:
    label: str
    manner: Slot = ANY

    def __post_init__(self):
        if not self.label:
            raise MapError("strategy label must not be empty")


@dataclass(frozen=True)
class Section:
    id: str
    source: str
    target: str
    strategy: Strategy


@dataclass(frozen=True)
class MapModel:
    id: str
    intentions: dict[str, Intention]
    sections: dict[str, Section]
    start: str
    stop: str
    refinements: dict[str, str] = field(default_factory=dict)
    attachments: dict[str, tuple[str, ...]] = field(default_factory=dict)
    goal: tuple[Iri, Iri] | None = None
    prefixes: dict[str, str] = field(default_factory=dict, compare=False)
    spans: dict[str, SourceSpan] = field(default_factory=dict, compare=False)

    def span(self, key: str) -> SourceSpan:
        return self.spans.get(key) or self.spans.get("map") or SourceSpan(1, 1)

    def goal_head(self) -> SectionPattern | None:
        if self.goal is None:
            return None
        return SectionPattern.goal(*self.goal)

    def closing(self, section: Section) -> bool:
        """True for sections that reach the stop intention."""
        return section.target == self.stop


@dataclass(frozen=True)
class MapDocument:
    maps: tuple[MapModel, ...]
    prefixes: dict[str, str] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class Path:
    sections: tuple[Section, ...]

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.sections)


class Paths(NamedTuple):
    paths: list[Path]
    truncated: bool


def _diag(m: MapModel, key: str, message: str, severity: str = ERROR) -> ParseDiagnostic:
    return ParseDiagnostic(m.span(key), message, severity)


def validate(m: MapModel, domain: Graph) -> list[ParseDiagnostic]:
    """Structural and vocabulary checks; vocabulary gaps are warnings."""
    out: list[ParseDiagnostic] = []
    if m.start not in m.intentions:
        out.append(_diag(m, "map", f"start intention {m.start} is not declared"))
    if m.stop not in m.intentions:
        out.append(_diag(m, "map", f"stop intention {m.stop} is not declared"))
    if m.start == m.stop:
        out.append(_diag(m, "start", "start and stop must be distinct intentions"))

    for sid in sorted(m.sections):
        sec = m.sections[sid]
        key = f"section:{sid}"
        for end in (sec.source, sec.target):
            if end not in m.intentions:
                out.append(_diag(m, key, f"section {sid} refers to undeclared intention {end}"))
        if sec.target == m.start:
            out.append(_diag(m, key, f"start intention {m.start} has incoming section {sid}"))
        if sec.source == m.stop:
            out.append(_diag(m, key, f"stop intention {m.stop} has outgoing section {sid}"))
        if sec.source == m.start and sec.target == m.stop:
            out.append(_diag(m, key, f"section {sid} links start directly to stop"))

    for sid in sorted(m.refinements):
        if sid not in m.sections:
            out.append(_diag(m, f"refine:{sid}", f"refinement names unknown section {sid}"))
        elif m.closing(m.sections[sid]):
            out.append(_diag(m, f"refine:{sid}", f"section {sid} reaches the stop intention and cannot be refined"))
    for sid in sorted(m.attachments):
        if sid not in m.sections:
            out.append(_diag(m, f"operationalise:{sid}", f"query attachment names unknown section {sid}"))
        elif m.closing(m.sections[sid]):
            out.append(_diag(m, f"operationalise:{sid}",
                             f"section {sid} reaches the stop intention and cannot be operationalised"))

    for name in (m.start, m.stop):
        it = m.intentions.get(name)
        if it is not None and (it.verb is not ANY or it.object is not ANY):
            out.append(_diag(m, f"intention:{name}", f"start/stop intention {name} must not be qualified"))

    reachable = {m.start}
    frontier = [m.start]
    while frontier:
        node = frontier.pop()
        for sec in m.sections.values():
            if sec.source == node and sec.target not in reachable:
                reachable.add(sec.target)
                frontier.append(sec.target)
    for name in m.intentions:
        if name not in reachable:
            out.append(_diag(m, f"intention:{name}", f"intention {name} is unreachable from {m.start}", WARNING))

    mentioned = domain.terms()
    ns = {**m.prefixes}

    def check(slot: Slot, role: str, key: str) -> None:
        if slot is not ANY and slot not in mentioned:
            out.append(_diag(m, key, f"{role} {compact(slot, ns)} is not mentioned in the domain ontology", WARNING))

    for name, it in m.intentions.items():
        check(it.verb, "verb", f"intention:{name}")
        check(it.object, "object", f"intention:{name}")
    for sid, sec in m.sections.items():
        check(sec.strategy.manner, "manner", f"section:{sid}")
    if m.goal is not None:
        check(m.goal[0], "verb", "goal")
        check(m.goal[1], "object", "goal")
    return sorted(out, key=lambda d: (d.span.line, d.span.column, d.message))


def enumerate_paths(m: MapModel, max_paths: int = 64) -> Paths:
    """Start-to-stop paths that never reuse a section, in depth-first order.

    Outgoing sections are tried in id order, so paths come out sorted by
    their section-id sequences.
    """
    outgoing: dict[str, list[Section]] = {}
    for sid in sorted(m.sections):
        sec = m.sections[sid]
        outgoing.setdefault(sec.source, []).append(sec)

    found: list[Path] = []
    trail: list[Section] = []
    used: set[str] = set()
    truncated = False

    def walk(node: str) -> bool:
        nonlocal truncated
        if node == m.stop and trail:
            if len(found) == max_paths:
                truncated = True
                return False
            found.append(Path(tuple(trail)))
            return True
        for sec in outgoing.get(node, ()):
            if sec.id in used:
                continue
            used.add(sec.id)
            trail.append(sec)
            keep_going = walk(sec.target)
            trail.pop()
            used.discard(sec.id)
            if not keep_going:
                return False
        return True

    if m.start != m.stop:
        walk(m.start)
    return Paths(found, truncated)


def section_signature(m: MapModel, section_id: str) -> SectionPattern:
    try:
        sec = m.sections[section_id]
    except KeyError:
        raise MapError(f"map {m.id!r} has no section {section_id!r}") from None
    src = m.intentions.get(sec.source, Intention(sec.source))
    tgt = m.intentions.get(sec.target, Intention(sec.target))
    return SectionPattern(src.verb, src.object, sec.strategy.manner, tgt.verb, tgt.object)


def _slot(slot: Slot, wildcard: Iri) -> Iri:
    return wildcard if slot is ANY else slot


def to_triples(m: MapModel, scope: str = "") -> Graph:
    """Encode ``m`` against the map ontology; every node is a blank node."""
    g = Graph(namespaces={"map": MAP})
    node = Blank(f"{scope}map")
    add = g.add

    def intention_node(name: str) -> Blank:
        return Blank(f"{scope}i_{name}")

    add(node, RDF_TYPE, mapv("Map"))
    add(node, RDFS_LABEL, Literal(m.id))
    add(node, mapv("hasStart"), intention_node(m.start))
    add(node, mapv("hasStop"), intention_node(m.stop))
    if m.goal is not None:
        goal = Blank(f"{scope}goal")
        add(node, mapv("hasGoal"), goal)
        add(goal, mapv("hasVerb"), m.goal[0])
        add(goal, mapv("hasObject"), m.goal[1])
    for name, it in m.intentions.items():
        i = intention_node(name)
        add(i, RDF_TYPE, mapv("Intention"))
        add(i, RDFS_LABEL, Literal(name))
        add(i, mapv("hasVerb"), _slot(it.verb, ANY_VERB))
        add(i, mapv("hasObject"), _slot(it.object, ANY_OBJECT))
    for sid, sec in m.sections.items():
        s = Blank(f"{scope}s_{sid}")
        g_node = Blank(f"{scope}g_{sid}")
        add(node, mapv("hasSection"), s)
        add(s, RDF_TYPE, mapv("Section"))
        add(s, RDFS_LABEL, Literal(sid))
        add(s, mapv("hasSource"), intention_node(sec.source))
        add(s, mapv("hasTarget"), intention_node(sec.target))
        add(s, mapv("hasStrategy"), g_node)
        add(g_node, RDF_TYPE, mapv("Strategy"))
        add(g_node, RDFS_LABEL, Literal(sec.strategy.label))
        add(g_node, mapv("hasParameter"), _slot(sec.strategy.manner, ANY_PARAMETER))
        if sid in m.refinements:
            add(s, mapv("refinedBy"), Literal(m.refinements[sid]))
        for ref in m.attachments.get(sid, ()):
            add(s, mapv("operationalisedBy"), Literal(ref))
    return g

