from __future__ import annotations

import pytest
from conftest import DEMO
from oracles import isomorphic

from satis.diagnostics import ParseError
from satis.query import TYPE_EQ, TYPE_SUB, ConstructQuery, SelectQuery, Var
from satis.signature import ANY
from satis.syntax import (
    parse_map_dsl,
    parse_query,
    parse_turtle,
    serialize_map_dsl,
    serialize_query,
    serialize_turtle,
)
from satis.graph import Graph
from satis.terms import GROUNDING, HAS_INPUT, HAS_OUTPUT, RDF_TYPE, Iri, Literal

DOM = "http://satis.example.org/dom-onto#"


def dom(x):
    return Iri(DOM + x)


def error_of(fn, text):
    with pytest.raises(ParseError) as info:
        fn(text)
    return info.value.diagnostics[0]


# ------------------------------------------------------------------- turtle


def test_turtle_single_statement():
    g, warnings = parse_turtle("@prefix dom: <http://ex/dom#> . dom:A rdfs:subClassOf dom:B .")
    assert len(g) == 1 and warnings == []


def test_turtle_service_file_counts():
    g, _ = parse_turtle((DEMO / "services" / "s1_debias.ttl").read_text())
    assert len(g) == 7
    preds = [t.predicate for t in g]
    assert preds.count(HAS_INPUT) == 1
    assert preds.count(HAS_OUTPUT) == 2
    assert preds.count(RDF_TYPE) == 3
    assert preds.count(GROUNDING) == 1


def test_turtle_unknown_prefix():
    d = error_of(parse_turtle, "dom:A dom:p dom:B .")
    assert "unknown prefix dom" in d.message
    assert (d.span.line, d.span.column) == (1, 1)


def test_turtle_error_span_points_into_token():
    d = error_of(parse_turtle, '@prefix ex: <http://ex/> .\nex:a ex:b\n   "lit" "extra" .')
    assert d.span.line == 3
    assert d.span.column == 10


def test_turtle_literal_subject():
    d = error_of(parse_turtle, '"x" <http://ex/p> <http://ex/o> .')
    assert "subject" in d.message


def test_turtle_semicolon_lists_and_escapes():
    g, _ = parse_turtle('@prefix ex: <http://ex/> .\nex:a ex:p "one\\ttwo" ; ex:q ex:b ; a ex:C .')
    assert Literal("one\ttwo") in {t.object for t in g}
    assert len(g) == 3


def test_turtle_redefined_prefix_warns():
    _, warnings = parse_turtle("@prefix ex: <http://a/> .\n@prefix ex: <http://b/> .\n")
    assert len(warnings) == 1 and not warnings[0].is_error


def test_turtle_blank_scope():
    g, _ = parse_turtle("_:x <http://ex/p> _:y .", scope="f1_")
    assert {t.subject.label for t in g} == {"f1_b1"}


def test_serialize_empty_graph_is_prefix_block_only():
    g = Graph(namespaces={"ex": "http://ex/"})
    text = serialize_turtle(g)
    assert text.strip() == "@prefix ex: <http://ex/> ."


def test_serialize_identical_graphs_identically():
    a, _ = parse_turtle("@prefix ex: <http://ex/> . ex:a ex:p ex:b . ex:c ex:p ex:d .")
    b, _ = parse_turtle("@prefix ex: <http://ex/> . ex:c ex:p ex:d . ex:a ex:p ex:b .")
    assert serialize_turtle(a) == serialize_turtle(b)


@pytest.mark.parametrize("path", sorted(DEMO.rglob("*.ttl")), ids=lambda p: p.name)
def test_turtle_fixture_round_trip(path):
    g, _ = parse_turtle(path.read_text())
    assert isomorphic(parse_turtle(serialize_turtle(g))[0], g)


# ------------------------------------------------------------------ queries


def test_debiasing_query_shape():
    q = parse_query((DEMO / "queries" / "debias.rq").read_text())
    assert isinstance(q, SelectQuery)
    assert q.projection == (Var("service"),)
    assert len(q.where.patterns) == 3
    ops = [f.operator for f in q.where.filters]
    assert ops.count(TYPE_EQ) == 1 and ops.count(TYPE_SUB) == 2


def test_rule_c2_construct_shape():
    q = parse_query((DEMO / "rules" / "rule-c2.rq").read_text())
    assert isinstance(q, ConstructQuery)
    assert len(q.template) == 9
    assert any(tp.object == Var("service") and tp.predicate.value.endswith("hasResource") for tp in q.template)


def test_empty_where_block():
    d = error_of(parse_query, "select ?x where { }")
    assert "empty where-block" in d.message


def test_unknown_filter_operator():
    d = error_of(parse_query, "select ?x where { ?x <http://ex/p> ?y filter(?y >= <http://ex/C>) }")
    assert "operator" in d.message


def test_unbound_projection():
    d = error_of(parse_query, "select ?z where { ?x <http://ex/p> ?y }")
    assert "?z" in d.message


def test_keywords_are_case_insensitive():
    q = parse_query("SELECT ?x WHERE { ?x a <http://ex/C> . FILTER(?x = <http://ex/a>) }")
    assert q.where.patterns[0].predicate == RDF_TYPE


def test_pragma_is_discarded():
    a = parse_query("select ?x where { ?x a <http://ex/C> } pragma { x:y x:z true }")
    b = parse_query("select ?x where { ?x a <http://ex/C> }")
    assert a == b


def test_trailing_garbage():
    with pytest.raises(ParseError):
        parse_query("select ?x where { ?x a <http://ex/C> } extra")


@pytest.mark.parametrize("path", sorted(DEMO.rglob("*.rq")), ids=lambda p: p.name)
def test_query_fixture_round_trip(path):
    q = parse_query(path.read_text())
    assert parse_query(serialize_query(q)) == q


# -------------------------------------------------------------------- maps


MINIMAL = """map "m" {
    start Start
    stop Stop
    intention A { verb <http://ex/V> object <http://ex/O> }
    section s1 { from Start to A strategy "by doing" }
}
"""


def test_preprocessing_map():
    doc = parse_map_dsl((DEMO / "maps" / "preprocessing.map").read_text())
    assert len(doc.maps) == 1
    bc = doc.maps[0].intentions["BiasCorrection"]
    assert (bc.verb, bc.object) == (dom("Debiasing"), dom("Image"))


def test_minimal_map():
    m = parse_map_dsl(MINIMAL).maps[0]
    assert list(m.sections) == ["s1"]
    assert m.sections["s1"].strategy.manner is ANY


def test_duplicate_section_id():
    text = MINIMAL.replace("}\n}", '}\n    section s1 { from A to Stop strategy "again" }\n}')
    d = error_of(parse_map_dsl, text)
    assert "duplicate section id" in d.message
    assert d.span.line == 6


def test_duplicate_intention():
    text = MINIMAL.replace("    section", "    intention A { verb <http://ex/V> object <http://ex/O> }\n    section")
    assert "duplicate intention" in error_of(parse_map_dsl, text).message


def test_missing_stop():
    assert "stop" in error_of(parse_map_dsl, MINIMAL.replace("    stop Stop\n", "")).message


@pytest.mark.parametrize("path", sorted(DEMO.rglob("*.map")), ids=lambda p: p.name)
def test_map_fixture_round_trip(path):
    doc = parse_map_dsl(path.read_text())
    assert parse_map_dsl(serialize_map_dsl(doc)).maps == doc.maps
