"""Goal-driven retrieval of semantic service descriptions.

Requirements are written as intentional maps, compiled into backward-chaining
rules, and rendered against a registry of annotated service descriptions.
"""

from .compiler import compile_map, emit_rule_text, parse_rule_text
from .engine import EngineConfig, Rule, explain, flatten, matches, prove, render
from .graph import ClassHierarchy, Graph, is_subclass, subclass_closure, types_of
from .maps import MapModel, enumerate_paths, section_signature, to_triples, validate
from .query import eval_filter, eval_pattern, eval_select
from .registry import KnowledgeBase, list_fragments, load_memory, service_to_triples
from .signature import ANY, SectionPattern
from .terms import Blank, Iri, Literal, Triple

__version__ = "0.1.0"

__all__ = [
    "ANY",
    "Blank",
    "ClassHierarchy",
    "EngineConfig",
    "Graph",
    "Iri",
    "KnowledgeBase",
    "Literal",
    "MapModel",
    "Rule",
    "SectionPattern",
    "Triple",
    "compile_map",
    "emit_rule_text",
    "enumerate_paths",
    "eval_filter",
    "eval_pattern",
    "eval_select",
    "explain",
    "flatten",
    "is_subclass",
    "list_fragments",
    "load_memory",
    "matches",
    "parse_rule_text",
    "prove",
    "render",
    "section_signature",
    "service_to_triples",
    "subclass_closure",
    "to_triples",
    "types_of",
    "validate",
]
