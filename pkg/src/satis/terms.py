"""RDF-style terms and triples."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
MAP = "http://satis.example.org/map-onto#"
PROCESS = "http://www.daml.org/services/owl-s/1.1/Process.owl#"
SERVICE = "http://www.daml.org/services/owl-s/1.1/Service.owl#"

WELL_KNOWN = {"rdf": RDF, "rdfs": RDFS}

_WS = re.compile(r"\s")


class TermError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Iri:
    value: str

    def __post_init__(self):
        if not self.value or _WS.search(self.value):
            raise TermError(f"invalid IRI {self.value!r}")

    @property
    def key(self) -> str:
        return f"<{self.value}>"

    def __lt__(self, other: Term) -> bool:
        return self.key < other.key

    def __str__(self) -> str:
        return self.key


@dataclass(frozen=True, slots=True)
class Blank:
    label: str

    def __post_init__(self):
        if not self.label:
            raise TermError("empty blank node label")

    @property
    def key(self) -> str:
        return f"_:{self.label}"

    def __lt__(self, other: Term) -> bool:
        return self.key < other.key

    def __str__(self) -> str:
        return self.key


@dataclass(frozen=True, slots=True)
class Literal:
    value: str

    @property
    def key(self) -> str:
        return '"' + escape_string(self.value) + '"'

    def __lt__(self, other: Term) -> bool:
        return self.key < other.key

    def __str__(self) -> str:
        return self.key


Term = Union[Iri, Blank, Literal]

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r"}


def escape_string(value: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in value)


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Iri | Blank
    predicate: Iri
    object: Term

    def __post_init__(self):
        if not isinstance(self.subject, (Iri, Blank)):
            raise TermError(f"subject must be an IRI or blank node, got {self.subject}")
        if not isinstance(self.predicate, Iri):
            raise TermError(f"predicate must be an IRI, got {self.predicate}")
        if not isinstance(self.object, (Iri, Blank, Literal)):
            raise TermError(f"object must be a term, got {self.object!r}")

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.subject.key, self.predicate.key, self.object.key)

    def __lt__(self, other: Triple) -> bool:
        return self.key < other.key

    def __iter__(self):
        return iter((self.subject, self.predicate, self.object))


def rdf(local: str) -> Iri:
    return Iri(RDF + local)


def rdfs(local: str) -> Iri:
    return Iri(RDFS + local)


def mapv(local: str) -> Iri:
    return Iri(MAP + local)


RDF_TYPE = rdf("type")
RDFS_SUBCLASS = rdfs("subClassOf")
RDFS_LABEL = rdfs("label")
HAS_INPUT = Iri(PROCESS + "hasInput")
HAS_OUTPUT = Iri(PROCESS + "hasOutput")
GROUNDING = Iri(SERVICE + "grounding")

_LOCAL = re.compile(r"^[A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?$|^$")


def compact(term: Term, namespaces: dict[str, str]) -> str:
    """Render ``term`` as a qname when some namespace fits, else in full form."""
    if isinstance(term, Iri):
        best = None
        for prefix, base in namespaces.items():
            if term.value.startswith(base) and _LOCAL.match(term.value[len(base):]):
                if best is None or len(base) > len(namespaces[best]) or (
                    len(base) == len(namespaces[best]) and prefix < best
                ):
                    best = prefix
        if best is not None:
            return f"{best}:{term.value[len(namespaces[best]):]}"
    return term.key
