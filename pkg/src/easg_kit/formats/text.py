"""Text serializations: triplet strings and sentences.

The text forms carry class labels only. Groundings, frames, and instance
numbering do not survive the trip, so ``parse_triplet_string`` returns a
graph in canonical instance numbering; round-trips are exact for graphs
whose noun classes are distinct (and distinct from the verb label).

In text form the camera-wearer edge is written ``<subject> - verb - <verb>``
rather than with the internal ``action`` relation label.
"""

from __future__ import annotations

import re

from ..core import (
    ACTION,
    DIRECT_OBJECT,
    ActionGraph,
    Edge,
    FrameRef,
    FrameTriplet,
    Node,
    Provenance,
    ProvenanceKind,
    canonicalize,
    renumber_objects,
)

SUBJECT_TOKENS = ("CW", "Camera wearer")

_VERB_RELATION = "verb"
_PREFIX = re.compile(r"^\s*(?:graph\s*\d*\s*:)?\s*", re.IGNORECASE)


class TripletParseError(ValueError):
    """Unparseable triplet text; ``offset`` points at the bad segment."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


def _label(graph: ActionGraph, node_id: str) -> str:
    node = graph.node_by_id(node_id)
    if node is None:
        return node_id
    if node.node_id == "verb":
        return node.verb or ""
    if node.node_id == "cw":
        return "CW"
    return node.noun or ""


def to_triplet_string(graph: ActionGraph, subject_token: str = "CW") -> str:
    """Render a graph as semicolon-joined ``A - rel - B`` triplets.

    The subject-verb triplet comes first, then the direct-object triplets,
    then the remaining edges in canonical order.
    """
    c = canonicalize(graph)
    verb = c.verb or ""
    parts = [f"{subject_token} - {_VERB_RELATION} - {verb}"]
    rest = []
    for e in c.edges:
        if e.relation == ACTION:
            continue
        if e.relation == DIRECT_OBJECT and e.src == "verb":
            parts.append(f"{verb} - {DIRECT_OBJECT} - {_label(c, e.dst)}")
        else:
            rest.append(f"{_label(c, e.src)} - {e.relation} - {_label(c, e.dst)}")
    return "; ".join(parts + rest)


def to_sentence(graph: ActionGraph, subject: str = "CW") -> str:
    """Render a graph as one sentence: ``CW wash car with sponge``.

    Direct objects follow the verb (comma-separated if several); every other
    edge contributes ``<relation> <object>`` in canonical order.
    """
    c = canonicalize(graph)
    dobj_nouns = []
    tail = []
    for e in c.edges:
        if e.relation == ACTION:
            continue
        if e.relation == DIRECT_OBJECT and e.src == "verb":
            dobj_nouns.append(_label(c, e.dst))
        else:
            tail.append(f"{e.relation} {_label(c, e.dst)}")
    words = [subject, c.verb or ""]
    if dobj_nouns:
        words.append(", ".join(dobj_nouns))
    words.extend(tail)
    return " ".join(w for w in words if w)


def _segments(text: str):
    """Yield (offset, segment) for each semicolon-separated triplet."""
    pos = 0
    for raw in text.split(";"):
        stripped = raw.strip()
        if stripped:
            yield pos + len(raw) - len(raw.lstrip()), stripped
        pos += len(raw) + 1


def parse_triplet_string(
    text: str,
    taxonomy=None,
    *,
    clip_id: str = "",
    timestep: int = 1,
    frames: FrameTriplet | None = None,
) -> ActionGraph:
    """Parse triplet text back into a graph.

    Tolerant of a leading ``Graph N:`` prefix and stray whitespace.
    Out-of-vocabulary labels are kept verbatim (novel words from model
    completions evaluate as misses later; they are not parse errors).
    The ``taxonomy`` argument is accepted for symmetry and future label
    normalization; labels are not rejected against it here.
    """
    del taxonomy
    body_start = _PREFIX.match(text).end()
    body = text[body_start:]

    verb_label: str | None = None
    objects: dict[str, Node] = {}
    edges: list[Edge] = []
    seen_pairs: set[tuple[str, str]] = set()

    def obj_id(noun: str) -> str:
        if noun not in objects:
            objects[noun] = Node.object_node(noun, len(objects))
        return objects[noun].node_id

    for offset, segment in _segments(body):
        at = body_start + offset
        pieces = [p.strip() for p in segment.split(" - ")]
        if len(pieces) != 3 or not all(pieces):
            raise TripletParseError(f"malformed triplet {segment!r}", at)
        left, relation, right = pieces
        if verb_label is None:
            if relation != _VERB_RELATION:
                raise TripletParseError(
                    f"expected leading subject - verb - <verb> triplet, got {segment!r}", at
                )
            verb_label = right
            continue
        if relation == _VERB_RELATION:
            raise TripletParseError(f"duplicate verb triplet {segment!r}", at)
        if relation == DIRECT_OBJECT:
            src = "verb"
            dst = obj_id(right)
            relation = DIRECT_OBJECT
        else:
            if left == verb_label or left in SUBJECT_TOKENS:
                src = "verb"
            else:
                src = obj_id(left)
            dst = "verb" if right == verb_label else obj_id(right)
        if (src, dst) in seen_pairs or src == dst:
            continue
        seen_pairs.add((src, dst))
        edges.append(Edge(src, dst, relation))

    if verb_label is None:
        raise TripletParseError("no triplets found", body_start)

    graph = ActionGraph(
        clip_id=clip_id,
        timestep=timestep,
        frames=frames
        or FrameTriplet(
            pre=FrameRef(clip_id, 0), pnr=FrameRef(clip_id, 0), post=FrameRef(clip_id, 0)
        ),
        nodes=(Node.cw(), Node.verb_node(verb_label), *objects.values()),
        edges=(Edge("cw", "verb", ACTION), *edges),
        provenance=Provenance(kind=ProvenanceKind.PARSED),
    )
    return renumber_objects(graph)
