"""Label vocabularies: verb, noun, and relation classes with dense ids."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

ACTION = "action"
DIRECT_OBJECT = "direct object"
RESERVED_RELATIONS = (ACTION, DIRECT_OBJECT)

HAND_NOUNS = ("left hand", "right hand", "both hands")


class TaxonomyError(ValueError):
    """Raised when a label is missing from, or inconsistent with, a taxonomy."""


def _index(entries: tuple[str, ...], kind: str) -> dict[str, int]:
    table: dict[str, int] = {}
    for i, name in enumerate(entries):
        if name in table:
            raise TaxonomyError(f"duplicate {kind} class {name!r}")
        table[name] = i
    return table


@dataclass(frozen=True)
class Taxonomy:
    """Ordered verb/noun/relation vocabularies.

    Lookup works both ways: ``verb_id(name)`` gives the dense integer id,
    and indexing the ``verbs`` tuple with that id gives the name back.
    The relation set always contains the two reserved labels ``action``
    and ``direct object``.
    """

    verbs: tuple[str, ...]
    nouns: tuple[str, ...]
    relations: tuple[str, ...]
    _verb_ids: dict[str, int] = field(init=False, repr=False, compare=False)
    _noun_ids: dict[str, int] = field(init=False, repr=False, compare=False)
    _relation_ids: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "verbs", tuple(self.verbs))
        object.__setattr__(self, "nouns", tuple(self.nouns))
        object.__setattr__(self, "relations", tuple(self.relations))
        for reserved in RESERVED_RELATIONS:
            if reserved not in self.relations:
                raise TaxonomyError(f"reserved relation {reserved!r} missing")
        object.__setattr__(self, "_verb_ids", _index(self.verbs, "verb"))
        object.__setattr__(self, "_noun_ids", _index(self.nouns, "noun"))
        object.__setattr__(self, "_relation_ids", _index(self.relations, "relation"))

    def has_verb(self, name: str) -> bool:
        return name in self._verb_ids

    def has_noun(self, name: str) -> bool:
        return name in self._noun_ids

    def has_relation(self, name: str) -> bool:
        return name in self._relation_ids

    def verb_id(self, name: str) -> int:
        try:
            return self._verb_ids[name]
        except KeyError:
            raise TaxonomyError(f"unknown verb class {name!r}") from None

    def noun_id(self, name: str) -> int:
        try:
            return self._noun_ids[name]
        except KeyError:
            raise TaxonomyError(f"unknown noun class {name!r}") from None

    def relation_id(self, name: str) -> int:
        try:
            return self._relation_ids[name]
        except KeyError:
            raise TaxonomyError(f"unknown relation label {name!r}") from None


def default_taxonomy() -> Taxonomy:
    """Bundled full vocabulary (218 verbs, 407 nouns, 16 relations)."""
    raw = json.loads(
        resources.files("easg_kit.resources")
        .joinpath("default_taxonomy.json")
        .read_text("utf-8")
    )
    return Taxonomy(
        verbs=tuple(raw["verbs"]),
        nouns=tuple(raw["nouns"]),
        relations=tuple(raw["relations"]),
    )
