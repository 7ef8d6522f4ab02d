from ..diagnostics import ERROR, WARNING, ParseDiagnostic, ParseError, SourceSpan, has_errors
from .mapdsl import parse_map_dsl, serialize_map_dsl
from .sparql import parse_query, serialize_query
from .turtle import parse_turtle, serialize_turtle

__all__ = [
    "ERROR",
    "WARNING",
    "ParseDiagnostic",
    "ParseError",
    "SourceSpan",
    "has_errors",
    "parse_map_dsl",
    "parse_query",
    "parse_turtle",
    "serialize_map_dsl",
    "serialize_query",
    "serialize_turtle",
]
