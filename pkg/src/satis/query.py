"""Graph-pattern evaluation with subsumption-aware type filters."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

from .graph import ClassHierarchy, Graph, is_subclass, types_of
from .terms import Blank, Iri, Literal, Term


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("empty variable name")

    def __str__(self) -> str:
        return f"?{self.name}"


PatternTerm = Union[Term, Var]

EQ = "="
TYPE_EQ = "=:"
TYPE_SUB = "<=:"
OPERATORS = (EQ, TYPE_EQ, TYPE_SUB)


@dataclass(frozen=True)
class TriplePattern:
    subject: PatternTerm
    predicate: PatternTerm
    object: PatternTerm

    def __iter__(self):
        return iter((self.subject, self.predicate, self.object))

    @property
    def variables(self) -> set[Var]:
        return {t for t in self if isinstance(t, Var)}


@dataclass(frozen=True)
class FilterConstraint:
    variable: Var
    operator: str
    target: Iri

    def __post_init__(self):
        if self.operator not in OPERATORS:
            raise ValueError(f"unknown filter operator {self.operator!r}")


@dataclass(frozen=True)
class GraphPattern:
    patterns: tuple[TriplePattern, ...]
    filters: tuple[FilterConstraint, ...] = ()

    @property
    def variables(self) -> set[Var]:
        out: set[Var] = set()
        for tp in self.patterns:
            out |= tp.variables
        return out


@dataclass(frozen=True)
class SelectQuery:
    projection: tuple[Var, ...]
    where: GraphPattern
    prefixes: dict[str, str] = field(default_factory=dict, compare=False, hash=False)


@dataclass(frozen=True)
class ConstructQuery:
    template: tuple[TriplePattern, ...]
    where: GraphPattern
    prefixes: dict[str, str] = field(default_factory=dict, compare=False, hash=False)


Query = Union[SelectQuery, ConstructQuery]
Binding = Mapping[Var, Term]


def eval_filter(b: Binding, f: FilterConstraint, graph: Graph, h: ClassHierarchy) -> bool:
    value = b[f.variable]
    if f.operator == EQ:
        return value == f.target
    if isinstance(value, Literal):
        return False
    types = types_of(graph, value)
    if f.operator == TYPE_EQ:
        return f.target in types
    return any(is_subclass(h, t, f.target) for t in types)


def _hidden(var: Var) -> bool:
    return var.name.startswith("_:")


def _as_var(t: PatternTerm) -> PatternTerm:
    # blank nodes in a where-block behave as variables that are never projected
    return Var("_:" + t.label) if isinstance(t, Blank) else t


def _binding_key(b: dict[Var, Term]) -> tuple[str, ...]:
    return tuple(b[v].key for v in sorted(b))


def eval_pattern(graph: Graph, h: ClassHierarchy, gp: GraphPattern) -> list[dict[Var, Term]]:
    """All solutions of ``gp`` over ``graph``, distinct and sorted.

    Backtracking join: the next pattern is always the one with the most
    positions already bound, and each filter fires as soon as its variable is.
    """
    patterns = [TriplePattern(*map(_as_var, tp)) for tp in gp.patterns]
    filters_by_var: dict[Var, list[FilterConstraint]] = {}
    for f in gp.filters:
        filters_by_var.setdefault(f.variable, []).append(f)

    results: dict[tuple[str, ...], dict[Var, Term]] = {}

    def bound_count(tp: TriplePattern, b: dict[Var, Term]) -> int:
        return sum(1 for t in tp if not isinstance(t, Var) or t in b)

    def solve(remaining: list[TriplePattern], b: dict[Var, Term]) -> None:
        if not remaining:
            visible = {v: t for v, t in b.items() if not _hidden(v)}
            results.setdefault(_binding_key(visible), visible)
            return
        best = max(range(len(remaining)), key=lambda i: (bound_count(remaining[i], b), -i))
        tp = remaining[best]
        rest = remaining[:best] + remaining[best + 1:]
        query = [b.get(t) if isinstance(t, Var) else t for t in tp]
        if isinstance(query[1], (Blank, Literal)) or isinstance(query[0], Literal):
            return
        for triple in graph.iter_match(*query):
            extended = dict(b)
            ok = True
            for slot, value in zip(tp, triple):
                if isinstance(slot, Var):
                    prev = extended.get(slot)
                    if prev is None:
                        extended[slot] = value
                        if not all(eval_filter(extended, f, graph, h) for f in filters_by_var.get(slot, ())):
                            ok = False
                            break
                    elif prev != value:
                        ok = False
                        break
            if ok:
                solve(rest, extended)

    if patterns:
        solve(patterns, {})
    return [results[k] for k in sorted(results)]


def eval_select(graph: Graph, h: ClassHierarchy, q: SelectQuery) -> list[tuple[Term, ...]]:
    rows = {tuple(b[v] for v in q.projection) for b in eval_pattern(graph, h, q.where)}
    return sorted(rows, key=lambda row: tuple(t.key for t in row))

