from __future__ import annotations

import dataclasses
import random

import pytest
from conftest import DEMO
from oracles import brute_force_paths, isomorphic
from randgen import random_map

from satis.graph import Graph
from satis.maps import MapError, Section, Strategy, enumerate_paths, section_signature, to_triples, validate
from satis.signature import ANY, SectionPattern
from satis.syntax import parse_map_dsl, parse_turtle
from satis.terms import Blank, Iri, mapv

DOM = "http://satis.example.org/dom-onto#"


def dom(x):
    return Iri(DOM + x)


def demo_map(name):
    return parse_map_dsl((DEMO / "maps" / name).read_text()).maps[0]


@pytest.fixture(scope="module")
def ontology():
    return parse_turtle((DEMO / "ontology" / "neuro.ttl").read_text())[0]


def head(extra=""):
    return f"""map "m" {{
    start Start
    stop Stop
    intention A {{ verb <http://ex/V> object <http://ex/O> }}
    intention B {{ verb <http://ex/W> object <http://ex/O> }}
{extra}}}
"""


def test_demo_maps_validate_cleanly(ontology):
    for name in ("preprocessing.map", "classification.map"):
        assert validate(demo_map(name), ontology) == []


def test_stop_with_outgoing_section():
    m = parse_map_dsl(head('    section s1 { from Start to A strategy "x" }\n'
                           '    section s2 { from A to Stop strategy "y" }\n'
                           '    section s3 { from Stop to A strategy "z" }\n')).maps[0]
    errors = [d for d in validate(m, Graph()) if d.is_error]
    assert errors and "stop" in errors[0].message
    assert errors[0].span.line == 8


def test_unknown_verb_warning(ontology):
    text = (DEMO / "maps" / "preprocessing.map").read_text().replace("dom:Denoising", "dom:Foo", 1)
    diags = validate(parse_map_dsl(text).maps[0], ontology)
    assert not any(d.is_error for d in diags)
    assert any("dom:Foo" in d.message or DOM + "Foo" in d.message for d in diags)


def test_dangling_target():
    m = parse_map_dsl(head('    section s1 { from Start to Z strategy "x" }\n')).maps[0]
    assert any("Z" in d.message for d in validate(m, Graph()) if d.is_error)


def test_linear_map_has_one_path():
    m = demo_map("classification.map")
    paths = enumerate_paths(m)
    assert [p.ids for p in paths.paths] == [("f1", "f2", "f3", "f4")]
    assert len([s for s in paths.paths[0].sections if not m.closing(s)]) == 3


def test_parallel_strategies():
    m = parse_map_dsl(head('    section s1 { from Start to A strategy "x" }\n'
                           '    section s2 { from Start to A strategy "y" }\n'
                           '    section s3 { from A to Stop strategy "z" }\n')).maps[0]
    assert [p.ids for p in enumerate_paths(m).paths] == [("s1", "s3"), ("s2", "s3")]


def test_two_cycle_terminates():
    m = parse_map_dsl(head('    section s1 { from Start to A strategy "x" }\n'
                           '    section s2 { from A to B strategy "y" }\n'
                           '    section s3 { from B to A strategy "z" }\n'
                           '    section s4 { from B to Stop strategy "w" }\n')).maps[0]
    ids = [p.ids for p in enumerate_paths(m).paths]
    assert ids == brute_force_paths(m)
    assert len(ids) == len(set(ids))
    assert ("s1", "s2", "s3", "s2", "s4") not in ids


def test_preprocessing_paths():
    m = demo_map("preprocessing.map")
    ids = [p.ids for p in enumerate_paths(m).paths]
    assert ids == brute_force_paths(m)
    assert len(ids) == 4


def test_truncation_flag():
    m = demo_map("preprocessing.map")
    capped = enumerate_paths(m, max_paths=2)
    assert capped.truncated and len(capped.paths) == 2
    assert not enumerate_paths(m, max_paths=4).truncated


def test_to_triples_intention_encoding():
    g = to_triples(demo_map("preprocessing.map"))
    bc = g.match(None, mapv("hasVerb"), dom("Debiasing"))
    assert len(bc) == 1
    assert g.objects(bc[0].subject, mapv("hasObject")) == {dom("Image")}


def test_unqualified_strategy_encoding():
    g = to_triples(demo_map("preprocessing.map"))
    assert g.match(None, mapv("hasParameter"), mapv("AnyParameter"))


def test_empty_map_has_no_sections():
    m = parse_map_dsl(head()).maps[0]
    g = to_triples(m)
    assert g.match(None, mapv("hasTarget"), None) == []
    assert enumerate_paths(m).paths == []


def test_highlighted_section_signature():
    sig = section_signature(demo_map("preprocessing.map"), "s1")
    assert (sig.target_verb, sig.target_object) == (dom("Debiasing"), dom("Image"))
    assert sig.source_verb is ANY and sig.source_object is ANY


def test_qualified_source_signature():
    sig = section_signature(demo_map("preprocessing.map"), "s3")
    assert sig == SectionPattern(dom("Debiasing"), dom("Image"), ANY, dom("Normalising"), dom("Image"))


def test_unknown_section_signature():
    with pytest.raises(MapError):
        section_signature(demo_map("preprocessing.map"), "nope")


def test_paths_chain_and_are_simple():
    rng = random.Random(21)
    for _ in range(60):
        m = random_map(rng)
        for p in enumerate_paths(m, 10_000).paths:
            assert p.sections[0].source == m.start and p.sections[-1].target == m.stop
            assert len(set(p.ids)) == len(p.ids)
            for a, b in zip(p.sections, p.sections[1:]):
                assert a.target == b.source


def test_to_triples_distinguishes_maps():
    rng = random.Random(22)
    checked = 0
    while checked < 40:
        m = random_map(rng, 6)
        if not m.sections:
            continue
        sid = sorted(m.sections)[0]
        sec = m.sections[sid]
        changed = dataclasses.replace(m, sections={**m.sections, sid: Section(
            sid, sec.source, sec.target, Strategy(sec.strategy.label + "!", sec.strategy.manner))})
        assert not isomorphic(to_triples(m), to_triples(changed))
        assert isomorphic(to_triples(m, "a_"), to_triples(m, "b_"))
        checked += 1


def test_to_triples_uses_only_blank_nodes_as_subjects():
    g = to_triples(demo_map("classification.map"))
    assert all(isinstance(t.subject, Blank) for t in g)
