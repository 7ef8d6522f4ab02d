from __future__ import annotations

import random

import pytest
from conftest import DEMO, EXTRA
from randgen import VERBS, OBJECTS, random_rule_base, service_graph

from satis.compiler import parse_rule_text
from satis.engine import (
    CYCLE,
    DEPTH_EXCEEDED,
    NO_MATCHING_RULE,
    NO_SERVICES,
    AbstractBody,
    ConcreteBody,
    DerivationSet,
    EngineConfig,
    Failure,
    Rule,
    RuleError,
    explain,
    flatten,
    matches,
    prove,
    render,
)
from satis.graph import Graph, subclass_closure
from satis.query import GraphPattern, TriplePattern, Var
from satis.registry import load_memory
from satis.signature import ANY, SectionPattern
from satis.syntax import parse_turtle
from satis.terms import HAS_OUTPUT, RDFS_SUBCLASS, Iri

DOM = "http://satis.example.org/dom-onto#"
WS = "http://satis.example.org/services#"


def dom(x):
    return Iri(DOM + x)


def ws(x):
    return Iri(WS + x)


RULE_C2 = parse_rule_text((DEMO / "rules" / "rule-c2.rq").read_text(), rule_id="rule-c2")
DEBIAS_GOAL = SectionPattern.goal(dom("Debiasing"), dom("Image"))


def demo_graph(*extra):
    g = Graph()
    files = [DEMO / "ontology" / "neuro.ttl", *sorted((DEMO / "services").glob("*.ttl")), *extra]
    for k, f in enumerate(files):
        g.update(parse_turtle(f.read_text(), scope=f"f{k}_")[0])
    return g


def concrete(rule_id, head_target, services_graph_pattern=None):
    gp = services_graph_pattern or GraphPattern((TriplePattern(Var("service"), HAS_OUTPUT, Var("o")),))
    return Rule(rule_id, SectionPattern(ANY, ANY, ANY, *head_target), ConcreteBody(gp, Var("service")))


def abstract(rule_id, head_target, *subgoals):
    return Rule(rule_id, SectionPattern(ANY, ANY, ANY, *head_target),
                AbstractBody(tuple(SectionPattern.goal(*t) for t in subgoals)))


# -------------------------------------------------------------------- matches


def test_rule_c2_head_matches_goal():
    h = subclass_closure(Graph())
    assert matches(RULE_C2.head, DEBIAS_GOAL, h)


def test_object_subsumption_switch():
    g = Graph()
    g.add(dom("MRImage"), RDFS_SUBCLASS, dom("Image"))
    h = subclass_closure(g)
    goal = SectionPattern.goal(dom("Debiasing"), dom("MRImage"))
    assert matches(RULE_C2.head, goal, h, EngineConfig(subsumption_matching=True))
    assert not matches(RULE_C2.head, goal, h, EngineConfig(subsumption_matching=False))


def test_distinct_verbs_do_not_match():
    h = subclass_closure(Graph())
    assert not matches(RULE_C2.head, SectionPattern.goal(dom("Denoising"), dom("Image")), h)


def test_subsumption_never_applies_to_verbs():
    g = Graph()
    g.add(dom("Debiasing"), RDFS_SUBCLASS, dom("Preprocessing"))
    h = subclass_closure(g)
    head = SectionPattern(ANY, ANY, ANY, dom("Preprocessing"), dom("Image"))
    assert not matches(head, DEBIAS_GOAL, h)


def test_strategy_slot_is_compared():
    h = subclass_closure(Graph())
    head = SectionPattern(ANY, ANY, dom("Fast"), dom("Debiasing"), dom("Image"))
    assert matches(head, DEBIAS_GOAL, h)
    assert not matches(head, SectionPattern(ANY, ANY, dom("Slow"), dom("Debiasing"), dom("Image")), h)


# ---------------------------------------------------------------------- prove


def test_prove_rule_c2():
    g = demo_graph()
    result = prove(DEBIAS_GOAL, g, subclass_closure(g), [RULE_C2])
    assert isinstance(result, DerivationSet)
    assert len(result.alternatives) == 1
    assert result.alternatives[0].services == (ws("S1"),)


def test_prove_rejects_non_goal():
    g = Graph()
    with pytest.raises(ValueError):
        prove(SectionPattern(), g, subclass_closure(g), [])


def test_no_matching_rule():
    g = demo_graph()
    result = prove(SectionPattern.goal(dom("Foo"), dom("Image")), g, subclass_closure(g), [RULE_C2])
    assert isinstance(result, Failure) and result.reason == NO_MATCHING_RULE


def test_two_rule_cycle():
    a, b = (dom("A"), dom("Image")), (dom("B"), dom("Image"))
    rules = [abstract("ra", a, b), abstract("rb", b, a)]
    g = service_graph()
    result = prove(SectionPattern.goal(*a), g, subclass_closure(g), rules)
    assert isinstance(result, Failure)
    assert result.reason == NO_MATCHING_RULE
    inner = result.attempts[0].cause
    assert inner.goal == SectionPattern.goal(*b)
    assert inner.attempts[0].cause.reason == CYCLE


def test_alternatives_in_rule_id_order():
    g = demo_graph()
    twin = Rule("a-first", RULE_C2.head, RULE_C2.body)
    result = prove(DEBIAS_GOAL, g, subclass_closure(g), [RULE_C2, twin])
    assert [alt.rule_id for alt in result.alternatives] == ["a-first", "rule-c2"]


def test_no_services():
    g = Graph()
    result = prove(DEBIAS_GOAL, g, subclass_closure(g), [RULE_C2])
    assert isinstance(result, Failure) and result.reason == NO_SERVICES


def test_body_validation():
    with pytest.raises(RuleError):
        ConcreteBody(GraphPattern((TriplePattern(Var("s"), HAS_OUTPUT, Var("o")),)), Var("service"))
    with pytest.raises(RuleError):
        AbstractBody((SectionPattern(),))


# --------------------------------------------------------------------- render


@pytest.fixture(scope="module")
def kb():
    kb, diags = load_memory(DEMO)
    assert not [d for d in diags if d.is_error]
    return kb


TOP = SectionPattern.goal(dom("Classifying"), dom("Image"))


def test_render_top_goal(kb):
    report = kb.render(TOP)
    assert report.ok
    flat = flatten(report)
    assert flat.pipelines and not flat.truncated
    for p in flat.pipelines:
        assert [s.goal.target_verb for s in p.steps][-2:] == [dom("SkullStripping"), dom("Segmenting")]


def test_render_depth_limit(kb):
    report = kb.render(TOP, EngineConfig(max_depth=1))
    assert not report.ok and report.reason == DEPTH_EXCEEDED


def test_render_without_s1(demo_copy):
    (demo_copy / "services" / "s1_debias.ttl").unlink()
    kb, _ = load_memory(demo_copy)
    sub = kb.render(DEBIAS_GOAL)
    assert sub.reason == NO_SERVICES
    flat = flatten(kb.render(TOP))
    assert flat.pipelines
    assert all(s.goal.target_verb != dom("Debiasing") for p in flat.pipelines for s in p.steps)


def test_memo_is_transparent(kb):
    for cfg_kw in ({}, {"max_depth": 3}, {"subsumption_matching": False}):
        on = kb.render(TOP, EngineConfig(memoize=True, **cfg_kw))
        off = kb.render(TOP, EngineConfig(memoize=False, **cfg_kw))
        assert on == off


def test_memo_shares_repeated_goals(kb):
    report = kb.render(TOP)
    seen = {}
    shared = False

    def walk(d):
        nonlocal shared
        for alt in d.alternatives:
            for child in getattr(alt, "children", ()):
                if child.goal in seen:
                    shared = shared or seen[child.goal] is child
                seen.setdefault(child.goal, child)
                walk(child)

    walk(report.root)
    assert shared


# -------------------------------------------------------------------- flatten


def test_flatten_single_concrete():
    g = demo_graph()
    report = render(DEBIAS_GOAL, g, subclass_closure(g), [RULE_C2])
    flat = flatten(report)
    assert len(flat.pipelines) == 1 and len(flat.pipelines[0].steps) == 1


def test_flatten_subgoal_order():
    g = service_graph()
    x, y = (dom("X"), dom("Image")), (dom("Y"), dom("Image"))
    rules = [abstract("top", (dom("T"), dom("Image")), y, x), concrete("cx", x), concrete("cy", y)]
    flat = flatten(render(SectionPattern.goal(dom("T"), dom("Image")), g, subclass_closure(g), rules))
    assert len(flat.pipelines) == 1
    assert [s.rule_id for s in flat.pipelines[0].steps] == ["cy", "cx"]


def test_flatten_alternatives_multiply():
    g = service_graph()
    x, y = (dom("X"), dom("Image")), (dom("Y"), dom("Image"))
    rules = [abstract("top", (dom("T"), dom("Image")), x, y), concrete("cx1", x), concrete("cx2", x),
             concrete("cy1", y), concrete("cy2", y), concrete("cy3", y)]
    flat = flatten(render(SectionPattern.goal(dom("T"), dom("Image")), g, subclass_closure(g), rules))
    assert len(flat.pipelines) == 6
    assert [tuple(s.rule_id for s in p.steps) for p in flat.pipelines][:2] == [("cx1", "cy1"), ("cx1", "cy2")]
    capped = flatten(render(SectionPattern.goal(dom("T"), dom("Image")), g, subclass_closure(g), rules),
                     EngineConfig(max_pipelines=4))
    assert capped.truncated and len(capped.pipelines) == 4


def test_flatten_failure_raises():
    g = Graph()
    report = render(DEBIAS_GOAL, g, subclass_closure(g), [])
    with pytest.raises(ValueError):
        flatten(report)


# -------------------------------------------------------------------- explain


def test_explain_mentions_rule_and_service():
    g = demo_graph()
    text = explain(render(DEBIAS_GOAL, g, subclass_closure(g), [RULE_C2]), {"ws": WS, "dom": DOM})
    assert "rule-c2" in text and "ws:S1" in text


def test_explain_unmatched_goal():
    g = Graph()
    text = explain(render(SectionPattern.goal(dom("Foo"), dom("Image")), g, subclass_closure(g), []),
                   {"dom": DOM})
    assert "no rule head matches" in text and "dom:Foo" in text


def test_explain_marks_cycle():
    a, b = (dom("A"), dom("Image")), (dom("B"), dom("Image"))
    g = Graph()
    text = explain(render(SectionPattern.goal(*a), g, subclass_closure(g),
                          [abstract("ra", a, b), abstract("rb", b, a)]))
    assert "CYCLE" in text


# ---------------------------------------------------------------- monotonicity


def _pipeline_set(report):
    if not report.ok:
        return set()
    return {tuple((s.goal, s.services) for s in p.steps) for p in flatten(report, EngineConfig(max_pipelines=10_000)).pipelines}


def test_adding_a_service_never_removes_pipelines(kb):
    # a new service may widen a step's candidate set, so compare step by step
    before = _pipeline_set(kb.render(TOP))
    g = demo_graph(EXTRA / "s4_mri_debias.ttl")
    after = _pipeline_set(render(TOP, g, subclass_closure(g), kb.rules.values()))
    for old in before:
        assert any(len(new) == len(old) and all(a[0] == b[0] and set(a[1]) <= set(b[1]) for a, b in zip(old, new))
                   for new in after)
    assert any(ws("S4") in step[1] for p in after for step in p)


def test_adding_a_rule_never_removes_pipelines():
    rng = random.Random(31)
    g = service_graph()
    h = subclass_closure(g)
    for _ in range(40):
        goals, rules = random_rule_base(rng, 12)
        extra = random_rule_base(rng, 3)[1]
        extra = [Rule("z" + r.id, r.head, r.body) for r in extra]
        for goal in goals:
            assert _pipeline_set(render(goal, g, h, rules)) <= _pipeline_set(render(goal, g, h, rules + extra))


def test_stack_counts_towards_depth():
    g = service_graph()
    x = (VERBS[0], OBJECTS[0])
    rules = [concrete("c", x)]
    stack = [SectionPattern.goal(VERBS[1], OBJECTS[0])]
    assert isinstance(prove(SectionPattern.goal(*x), g, subclass_closure(g), rules, EngineConfig(max_depth=2), stack),
                      DerivationSet)
    result = prove(SectionPattern.goal(*x), g, subclass_closure(g), rules, EngineConfig(max_depth=1), stack)
    assert isinstance(result, Failure) and result.reason == DEPTH_EXCEEDED
