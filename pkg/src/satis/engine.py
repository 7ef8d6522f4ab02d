"""Backward chaining over fragment rules.

A goal is a ``SectionPattern`` with a concrete target. Rules whose head
matches the goal are tried in rule-id order: a concrete rule succeeds when
its graph pattern binds at least one service, an abstract rule when every
subgoal in its body is proved in turn. Failures are values carrying one of
four reasons, never exceptions.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Union

from .graph import ClassHierarchy, Graph, is_subclass
from .query import GraphPattern, Var, eval_pattern
from .signature import ANY, SectionPattern
from .terms import Iri, compact

log = logging.getLogger(__name__)

NO_MATCHING_RULE = "no-matching-rule"
NO_SERVICES = "no-services"
DEPTH_EXCEEDED = "depth-exceeded"
CYCLE = "cycle"
REASONS = (NO_MATCHING_RULE, NO_SERVICES, DEPTH_EXCEEDED, CYCLE)

# a goal's overall reason is the strongest one among its failed attempts
_PRIORITY = {DEPTH_EXCEEDED: 3, NO_SERVICES: 2, NO_MATCHING_RULE: 1}

_OBJECT_SLOTS = (1, 4)


class RuleError(ValueError):
    pass


@dataclass(frozen=True)
class ConcreteBody:
    pattern: GraphPattern
    service_var: Var

    def __post_init__(self):
        if self.service_var not in self.pattern.variables:
            raise RuleError(f"service variable {self.service_var} does not occur in the rule body")


@dataclass(frozen=True)
class AbstractBody:
    subgoals: tuple[SectionPattern, ...]

    def __post_init__(self):
        for sg in self.subgoals:
            if not sg.is_goal:
                raise RuleError("abstract rule subgoals need a concrete target verb and object")


@dataclass(frozen=True)
class Rule:
    id: str
    head: SectionPattern
    body: Union[ConcreteBody, AbstractBody]
    prefixes: dict[str, str] = field(default_factory=dict, compare=False, hash=False)
    origin: str | None = field(default=None, compare=False, hash=False)

    @property
    def kind(self) -> str:
        return "concrete" if isinstance(self.body, ConcreteBody) else "abstract"


@dataclass(frozen=True)
class EngineConfig:
    max_depth: int = 32
    subsumption_matching: bool = True
    max_pipelines: int = 256
    memoize: bool = True

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.max_pipelines < 1:
            raise ValueError("max_pipelines must be at least 1")


@dataclass(frozen=True)
class ConcreteDerivation:
    goal: SectionPattern
    rule_id: str
    services: tuple[Iri, ...]


@dataclass(frozen=True)
class AbstractDerivation:
    goal: SectionPattern
    rule_id: str
    children: tuple[DerivationSet, ...]


Derivation = Union[ConcreteDerivation, AbstractDerivation]


@dataclass(frozen=True)
class FailedAttempt:
    rule_id: str
    reason: str
    cause: Failure | None = None


@dataclass(frozen=True)
class Failure:
    goal: SectionPattern
    reason: str
    attempts: tuple[FailedAttempt, ...] = ()


@dataclass(frozen=True)
class DerivationSet:
    goal: SectionPattern
    alternatives: tuple[Derivation, ...]
    failed: tuple[FailedAttempt, ...] = ()


@dataclass(frozen=True)
class RenderingReport:
    goal: SectionPattern
    root: Union[DerivationSet, Failure]

    @property
    def ok(self) -> bool:
        return isinstance(self.root, DerivationSet)

    @property
    def reason(self) -> str | None:
        return None if self.ok else self.root.reason


@dataclass(frozen=True)
class Step:
    goal: SectionPattern
    services: tuple[Iri, ...]
    rule_id: str


@dataclass(frozen=True)
class Pipeline:
    steps: tuple[Step, ...]


class Flattened(NamedTuple):
    pipelines: list[Pipeline]
    truncated: bool


def matches(head: SectionPattern, goal: SectionPattern, h: ClassHierarchy, cfg: EngineConfig | None = None) -> bool:
    subsumption = cfg.subsumption_matching if cfg is not None else True
    for i, (hs, gs) in enumerate(zip(head.slots, goal.slots)):
        if hs is ANY or gs is ANY or hs == gs:
            continue
        if subsumption and i in _OBJECT_SLOTS and is_subclass(h, gs, hs):
            continue
        return False
    return True


@dataclass(frozen=True)
class _Meta:
    goals: frozenset
    height: int
    sensitive: bool


_CUT = _Meta(frozenset(), 0, True)


class _Prover:
    def __init__(self, graph: Graph, hierarchy: ClassHierarchy, rules: Iterable[Rule], cfg: EngineConfig):
        self.graph = graph
        self.hierarchy = hierarchy
        self.rules = sorted(rules, key=lambda r: r.id)
        self.cfg = cfg
        self.memo: dict[SectionPattern, tuple[Union[DerivationSet, Failure], _Meta]] = {}
        self.services: dict[str, tuple[Iri, ...]] = {}

    def concrete_services(self, rule: Rule) -> tuple[Iri, ...]:
        if rule.id not in self.services:
            body = rule.body
            found = {b[body.service_var] for b in eval_pattern(self.graph, self.hierarchy, body.pattern)}
            self.services[rule.id] = tuple(sorted(s for s in found if isinstance(s, Iri)))
        return self.services[rule.id]

    def prove(self, goal: SectionPattern, depth: int, stack: frozenset) -> tuple[Union[DerivationSet, Failure], _Meta]:
        cfg = self.cfg
        if goal in stack:
            return Failure(goal, CYCLE), _CUT
        if depth > cfg.max_depth:
            return Failure(goal, DEPTH_EXCEEDED), _CUT
        if cfg.memoize and goal in self.memo:
            result, meta = self.memo[goal]
            # reuse only where recomputation could not differ
            if not (meta.goals & stack) and depth + meta.height - 1 <= cfg.max_depth:
                return result, meta

        alternatives: list[Derivation] = []
        failed: list[FailedAttempt] = []
        goals = {goal}
        height = 1
        sensitive = False
        inner = stack | {goal}
        candidates = [r for r in self.rules if matches(r.head, goal, self.hierarchy, cfg)]
        for rule in candidates:
            if isinstance(rule.body, ConcreteBody):
                services = self.concrete_services(rule)
                if services:
                    alternatives.append(ConcreteDerivation(goal, rule.id, services))
                else:
                    failed.append(FailedAttempt(rule.id, NO_SERVICES))
                continue
            children: list[DerivationSet] = []
            for sub in rule.body.subgoals:
                res, meta = self.prove(sub, depth + 1, inner)
                goals |= meta.goals
                height = max(height, meta.height + 1)
                sensitive = sensitive or meta.sensitive
                if isinstance(res, Failure):
                    reason = NO_MATCHING_RULE if res.reason == CYCLE else res.reason
                    failed.append(FailedAttempt(rule.id, reason, res))
                    break
                children.append(res)
            else:
                alternatives.append(AbstractDerivation(goal, rule.id, tuple(children)))

        result: Union[DerivationSet, Failure]
        if alternatives:
            result = DerivationSet(goal, tuple(alternatives), tuple(failed))
        elif failed:
            reason = max((a.reason for a in failed), key=_PRIORITY.__getitem__)
            result = Failure(goal, reason, tuple(failed))
        else:
            result = Failure(goal, NO_MATCHING_RULE)
        meta = _Meta(frozenset(goals), height, sensitive)
        if cfg.memoize and not sensitive:
            self.memo[goal] = (result, meta)
        return result, meta


def prove(
    goal: SectionPattern,
    graph: Graph,
    hierarchy: ClassHierarchy,
    rules: Iterable[Rule],
    cfg: EngineConfig | None = None,
    stack: Iterable[SectionPattern] = (),
) -> Union[DerivationSet, Failure]:
    """Prove ``goal`` as if ``stack`` goals were already being proved above it."""
    if not goal.is_goal:
        raise ValueError("goal needs a concrete target verb and object")
    prover = _Prover(graph, hierarchy, rules, cfg or EngineConfig())
    stack = frozenset(stack)
    return prover.prove(goal, len(stack) + 1, stack)[0]


def render(
    goal: SectionPattern,
    graph: Graph,
    hierarchy: ClassHierarchy,
    rules: Iterable[Rule],
    cfg: EngineConfig | None = None,
) -> RenderingReport:
    report = RenderingReport(goal, prove(goal, graph, hierarchy, rules, cfg))
    log.debug("rendered %s: %s", goal.render(), report.reason or "success")
    return report


def _set_pipelines(dset: DerivationSet) -> Iterator[tuple[Step, ...]]:
    for alt in dset.alternatives:
        if isinstance(alt, ConcreteDerivation):
            yield (Step(alt.goal, alt.services, alt.rule_id),)
        else:
            yield from _product(alt.children, 0)


def _product(children: tuple[DerivationSet, ...], i: int) -> Iterator[tuple[Step, ...]]:
    if i == len(children):
        yield ()
        return
    for head in _set_pipelines(children[i]):
        for tail in _product(children, i + 1):
            yield head + tail


def flatten(report: RenderingReport, cfg: EngineConfig | None = None) -> Flattened:
    if not report.ok:
        raise ValueError(f"cannot flatten a failed rendering ({report.reason})")
    cap = (cfg or EngineConfig()).max_pipelines
    found = list(itertools.islice(_set_pipelines(report.root), cap + 1))
    return Flattened([Pipeline(steps) for steps in found[:cap]], len(found) > cap)


def _unmatched(goal: SectionPattern, ns: dict[str, str]) -> str:
    names = ("source verb", "source object", "strategy", "target verb", "target object")
    parts = [f"{n}={'*' if s is ANY else compact(s, ns)}" for n, s in zip(names, goal.slots)]
    return ", ".join(parts)


def explain(report: RenderingReport, namespaces: dict[str, str] | None = None) -> str:
    """Indented proof trace of ``report``."""
    ns = namespaces or {}
    lines: list[str] = []
    seen: set[DerivationSet] = set()

    def failure(f: Failure, pad: str) -> None:
        if f.reason == CYCLE:
            lines.append(f"{pad}CYCLE goal {f.goal.render(ns)} is already being proved")
            return
        if f.reason == DEPTH_EXCEEDED and not f.attempts:
            lines.append(f"{pad}DEPTH-EXCEEDED goal {f.goal.render(ns)}")
            return
        if not f.attempts:
            lines.append(f"{pad}FAILED goal {f.goal.render(ns)}: {NO_MATCHING_RULE}")
            lines.append(f"{pad}  no rule head matches {_unmatched(f.goal, ns)}")
            return
        lines.append(f"{pad}FAILED goal {f.goal.render(ns)}: {f.reason}")
        for a in f.attempts:
            attempt(a, pad + "  ")

    def attempt(a: FailedAttempt, pad: str) -> None:
        lines.append(f"{pad}x rule {a.rule_id}: {a.reason}")
        if a.cause is not None:
            failure(a.cause, pad + "  ")

    def dset(d: DerivationSet, pad: str) -> None:
        lines.append(f"{pad}goal {d.goal.render(ns)}")
        if d in seen:
            lines.append(f"{pad}  (proved above)")
            return
        seen.add(d)
        for alt in d.alternatives:
            if isinstance(alt, ConcreteDerivation):
                services = ", ".join(compact(s, ns) for s in alt.services)
                lines.append(f"{pad}  rule {alt.rule_id} [concrete] services: {services}")
            else:
                lines.append(f"{pad}  rule {alt.rule_id} [abstract]")
                for child in alt.children:
                    dset(child, pad + "    ")
        for a in d.failed:
            attempt(a, pad + "  ")

    if report.ok:
        dset(report.root, "")
    else:
        failure(report.root, "")
    return "\n".join(lines) + "\n"
