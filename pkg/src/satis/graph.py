"""In-memory triple store and subclass reasoning."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .terms import RDF_TYPE, RDFS_SUBCLASS, Blank, Iri, Term, Triple


class SealedGraphError(RuntimeError):
    pass


class Graph:
    """A set of triples with S/P/O indexes and deterministic iteration.

    Iteration, ``match`` results and ``len`` never depend on insertion order.
    Once ``seal`` is called the graph rejects further inserts.
    """

    def __init__(self, triples: Iterable[Triple] = (), namespaces: dict[str, str] | None = None):
        self._triples: set[Triple] = set()
        self._spo: dict[Term, dict[Term, set[Term]]] = defaultdict(lambda: defaultdict(set))
        self._pos: dict[Term, dict[Term, set[Term]]] = defaultdict(lambda: defaultdict(set))
        self._osp: dict[Term, dict[Term, set[Term]]] = defaultdict(lambda: defaultdict(set))
        self._sorted: list[Triple] | None = None
        self.namespaces: dict[str, str] = dict(namespaces or {})
        self.sealed = False
        for t in triples:
            self.insert(t)

    def insert(self, triple: Triple) -> bool:
        """Add ``triple``; returns False when it was already present."""
        if self.sealed:
            raise SealedGraphError("graph is sealed")
        if not isinstance(triple, Triple):
            triple = Triple(*triple)
        if triple in self._triples:
            return False
        s, p, o = triple
        self._triples.add(triple)
        self._spo[s][p].add(o)
        self._pos[p][o].add(s)
        self._osp[o][s].add(p)
        self._sorted = None
        return True

    def add(self, s: Iri | Blank, p: Iri, o: Term) -> bool:
        return self.insert(Triple(s, p, o))

    def update(self, other: Graph) -> None:
        for t in other:
            self.insert(t)
        for prefix, base in other.namespaces.items():
            self.namespaces.setdefault(prefix, base)

    def seal(self) -> Graph:
        self.sealed = True
        return self

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __iter__(self) -> Iterator[Triple]:
        if self._sorted is None:
            self._sorted = sorted(self._triples, key=lambda t: t.key)
        return iter(self._sorted)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples

    def __repr__(self) -> str:
        return f"<Graph {len(self)} triples>"

    def iter_match(self, s: Term | None, p: Term | None, o: Term | None) -> Iterator[Triple]:
        """Unordered matching; ``None`` is a wildcard."""
        if s is not None:
            by_p = self._spo.get(s)
            if not by_p:
                return
            preds = [p] if p is not None else list(by_p)
            for pred in preds:
                objs = by_p.get(pred)
                if not objs:
                    continue
                if o is not None:
                    if o in objs:
                        yield Triple(s, pred, o)
                else:
                    for obj in objs:
                        yield Triple(s, pred, obj)
        elif p is not None:
            by_o = self._pos.get(p)
            if not by_o:
                return
            objs = [o] if o is not None else list(by_o)
            for obj in objs:
                for subj in by_o.get(obj, ()):
                    yield Triple(subj, p, obj)
        elif o is not None:
            for subj, preds in self._osp.get(o, {}).items():
                for pred in preds:
                    yield Triple(subj, pred, o)
        else:
            yield from self._triples

    def match(self, s: Term | None = None, p: Term | None = None, o: Term | None = None) -> list[Triple]:
        return sorted(self.iter_match(s, p, o), key=lambda t: t.key)

    def objects(self, s: Term, p: Term) -> set[Term]:
        by_p = self._spo.get(s)
        return set(by_p.get(p, ())) if by_p else set()

    def terms(self) -> set[Term]:
        out: set[Term] = set()
        for t in self._triples:
            out.update(t)
        return out


def types_of(graph: Graph, resource: Term) -> set[Iri]:
    return {o for o in graph.objects(resource, RDF_TYPE) if isinstance(o, Iri)}


@dataclass(frozen=True)
class ClassHierarchy:
    """Reflexive-transitive ``rdfs:subClassOf`` relation.

    ``ancestors[c]`` holds every class reachable from ``c`` including ``c``.
    """

    ancestors: dict[Iri, frozenset[Iri]] = field(default_factory=dict)

    @property
    def classes(self) -> frozenset[Iri]:
        return frozenset(self.ancestors)

    def pairs(self) -> set[tuple[Iri, Iri]]:
        return {(c, a) for c, anc in self.ancestors.items() for a in anc}


def is_subclass(h: ClassHierarchy, c1: Iri, c2: Iri) -> bool:
    if c1 == c2:
        return True
    anc = h.ancestors.get(c1)
    return anc is not None and c2 in anc


def subclass_closure(graph: Graph) -> ClassHierarchy:
    # Tarjan SCC over the subclass edges, then ancestor sets propagate over the
    # condensation in reverse topological order (Tarjan emits sinks first).
    edges: dict[Iri, set[Iri]] = defaultdict(set)
    classes: set[Iri] = set()
    for t in graph.iter_match(None, RDFS_SUBCLASS, None):
        if isinstance(t.subject, Iri) and isinstance(t.object, Iri):
            edges[t.subject].add(t.object)
            classes.update((t.subject, t.object))
    for t in graph.iter_match(None, RDF_TYPE, None):
        if isinstance(t.object, Iri):
            classes.add(t.object)

    index: dict[Iri, int] = {}
    low: dict[Iri, int] = {}
    on_stack: set[Iri] = set()
    stack: list[Iri] = []
    comp_of: dict[Iri, int] = {}
    comps: list[list[Iri]] = []
    counter = 0

    for root in sorted(classes):
        if root in index:
            continue
        work = [(root, iter(sorted(edges.get(root, ()))))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(sorted(edges.get(nxt, ())))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp: list[Iri] = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    comp_of[member] = len(comps)
                    comp.append(member)
                    if member == node:
                        break
                comps.append(comp)

    comp_anc: list[frozenset[Iri]] = []
    for cid, members in enumerate(comps):
        acc: set[Iri] = set(members)
        for m in members:
            for parent in edges.get(m, ()):
                pc = comp_of[parent]
                if pc != cid:
                    acc |= comp_anc[pc]
        comp_anc.append(frozenset(acc))

    return ClassHierarchy({c: comp_anc[comp_of[c]] for c in classes})
