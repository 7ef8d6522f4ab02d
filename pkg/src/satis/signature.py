"""Section signatures: the five slots that identify a fragment."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

from .terms import Iri, compact


class _Wild(enum.Enum):
    ANY = "*"

    def __repr__(self) -> str:
        return "ANY"

    def __lt__(self, other) -> bool:
        return not isinstance(other, _Wild)


ANY = _Wild.ANY
Slot = Union[Iri, _Wild]


def slot_key(slot: Slot) -> str:
    return "" if slot is ANY else slot.key


@dataclass(frozen=True)
class SectionPattern:
    source_verb: Slot = ANY
    source_object: Slot = ANY
    strategy_param: Slot = ANY
    target_verb: Slot = ANY
    target_object: Slot = ANY

    @property
    def slots(self) -> tuple[Slot, ...]:
        return (self.source_verb, self.source_object, self.strategy_param, self.target_verb, self.target_object)

    @property
    def is_goal(self) -> bool:
        return self.target_verb is not ANY and self.target_object is not ANY

    @property
    def key(self) -> tuple[str, ...]:
        return tuple(slot_key(s) for s in self.slots)

    @classmethod
    def goal(cls, verb: Iri, obj: Iri) -> SectionPattern:
        return cls(target_verb=verb, target_object=obj)

    def render(self, namespaces: dict[str, str] | None = None) -> str:
        ns = namespaces or {}

        def fmt(slot: Slot) -> str:
            return "*" if slot is ANY else compact(slot, ns)

        return (f"({fmt(self.source_verb)} {fmt(self.source_object)})"
                f" --[{fmt(self.strategy_param)}]--> "
                f"({fmt(self.target_verb)} {fmt(self.target_object)})")
