"""Three-annotator aggregation: disagreement questions and answer-driven merge.

Disagreements between the three independent graphs become validation
questions of four kinds (verb-noun choice, preposition choice, hand choice,
spatial yes/no). Majority (2-of-3) content is accepted without a question;
answers settle the rest. ``merge`` applies the answers and returns a single
consensus graph.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum

from .core import (
    ACTION,
    DIRECT_OBJECT,
    HAND_NOUNS,
    ActionGraph,
    Edge,
    Node,
    Provenance,
    ProvenanceKind,
    canonicalize,
    direct_objects,
    validate_graph,
)


class ConsensusError(ValueError):
    """Raised on malformed inputs or answers that do not cover the questions."""


class QuestionKind(str, Enum):
    VERB_NOUN_CHOICE = "verb_noun_choice"
    PREPOSITION_CHOICE = "preposition_choice"
    HAND_CHOICE = "hand_choice"
    SPATIAL_YES_NO = "spatial_yes_no"


@dataclass(frozen=True)
class AnnotatorGraph:
    """One annotator's refined graph for a clip/timestep."""

    annotator_id: str
    graph: ActionGraph


@dataclass(frozen=True)
class ValidationQuestion:
    question_id: str
    kind: QuestionKind
    clip_id: str
    timestep: int
    prompt: str
    options: tuple[str, ...]
    subject: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind == QuestionKind.SPATIAL_YES_NO:
            if self.options != ("yes", "no"):
                raise ValueError("spatial questions take exactly yes/no")
        elif len(self.options) < 2:
            raise ValueError("choice questions need at least two options")


@dataclass(frozen=True)
class Answer:
    """A respondent's choice for one question.

    ``free_text`` lets a respondent supply a label outside the options (the
    item is then flagged for manual review upstream); ``choice`` must still
    name one of the question's options so the merge stays well-defined.
    """

    question_id: str
    choice: str
    respondent_id: str = ""
    free_text: str | None = None


# Cross-graph node identity: "cw" and "verb" are singletons; an object is
# identified by its noun class plus its occurrence index among same-noun
# objects of the annotator's graph (ordered by instance id).
NodeKey = tuple


def _key_str(key: NodeKey) -> str:
    return ":".join(str(p) for p in key)


def _object_keys(graph: ActionGraph) -> dict[str, NodeKey]:
    keys: dict[str, NodeKey] = {"cw": ("cw",), "verb": ("verb",)}
    per_noun: Counter[str] = Counter()
    for node in sorted(
        graph.object_nodes, key=lambda n: n.instance_id if n.instance_id is not None else 0
    ):
        noun = node.noun or ""
        keys[node.node_id] = ("obj", noun, per_noun[noun])
        per_noun[noun] += 1
    return keys


@dataclass
class _Analysis:
    annos: tuple[AnnotatorGraph, ...]
    clip_id: str
    timestep: int
    vn_pairs: list[tuple[str, str]]
    dobj_keys: list[NodeKey]
    # (src key, dst key) -> {rank: relation}; action and direct-object edges excluded
    pairs: dict[tuple[NodeKey, NodeKey], dict[int, str]]
    # object key -> {rank: Node}
    objects: dict[NodeKey, dict[int, Node]]
    # (anchor key, relation) -> {rank: tuple of hand object keys}
    hand_groups: dict[tuple[NodeKey, str], dict[int, tuple[NodeKey, ...]]]


def _analyze(g1: AnnotatorGraph, g2: AnnotatorGraph, g3: AnnotatorGraph) -> _Analysis:
    annos = (g1, g2, g3)
    clips = {a.graph.clip_id for a in annos}
    steps = {a.graph.timestep for a in annos}
    if len(clips) != 1 or len(steps) != 1:
        raise ConsensusError(
            f"annotator graphs disagree on clip/timestep: {sorted(clips)} / {sorted(steps)}"
        )
    for a in annos:
        report = validate_graph(a.graph)
        if not report.ok:
            raise ConsensusError(
                f"annotator {a.annotator_id} graph is invalid: {report.summary()}"
            )

    vn_pairs: list[tuple[str, str]] = []
    dobj_keys: list[NodeKey] = []
    pairs: dict[tuple[NodeKey, NodeKey], dict[int, str]] = {}
    objects: dict[NodeKey, dict[int, Node]] = {}
    hand_groups: dict[tuple[NodeKey, str], dict[int, tuple[NodeKey, ...]]] = {}

    for rank, anno in enumerate(annos):
        g = anno.graph
        keys = _object_keys(g)
        dobj = direct_objects(g)[0]
        vn_pairs.append((g.verb or "", dobj.noun or ""))
        dobj_keys.append(keys[dobj.node_id])
        for node in g.object_nodes:
            objects.setdefault(keys[node.node_id], {})[rank] = node
        hands_here: dict[tuple[NodeKey, str], list[NodeKey]] = {}
        for e in g.edges:
            if e.relation in (ACTION, DIRECT_OBJECT):
                continue
            pair = (keys[e.src], keys[e.dst])
            pairs.setdefault(pair, {})[rank] = e.relation
            dst_node = g.node_by_id(e.dst)
            if dst_node is not None and dst_node.noun in HAND_NOUNS:
                hands_here.setdefault((keys[e.src], e.relation), []).append(keys[e.dst])
        for group, hand_keys in hands_here.items():
            hand_groups.setdefault(group, {})[rank] = tuple(sorted(hand_keys))

    return _Analysis(
        annos=annos,
        clip_id=next(iter(clips)),
        timestep=next(iter(steps)),
        vn_pairs=vn_pairs,
        dobj_keys=dobj_keys,
        pairs=pairs,
        objects=objects,
        hand_groups=hand_groups,
    )


def _dedup(seq) -> list:
    out = []
    for item in seq:
        if item not in out:
            out.append(item)
    return out


def _vn_options(a: _Analysis) -> list[tuple[str, str]]:
    return _dedup(a.vn_pairs)


def _questions(a: _Analysis) -> tuple[ValidationQuestion, ...]:
    head = f"{a.clip_id}:{a.timestep}"
    out: list[ValidationQuestion] = []

    vn = _vn_options(a)
    if len(vn) > 1:
        options = tuple(f"{v} {n}" for v, n in vn)
        out.append(
            ValidationQuestion(
                question_id=f"{head}:vn",
                kind=QuestionKind.VERB_NOUN_CHOICE,
                clip_id=a.clip_id,
                timestep=a.timestep,
                prompt=f"Does CW {' or '.join(options)}?",
                options=options,
                subject=options,
            )
        )

    verb0, noun0 = a.vn_pairs[0]
    preps: list[ValidationQuestion] = []
    for (src, dst), props in a.pairs.items():
        rels = _dedup(props[r] for r in sorted(props))
        if len(rels) < 2:
            continue
        lines = "; ".join(
            f"CW {verb0} {noun0} {rel} {dst[1] if dst[0] == 'obj' else _key_str(dst)}"
            for rel in rels
        )
        preps.append(
            ValidationQuestion(
                question_id=f"{head}:prep:{_key_str(src)}->{_key_str(dst)}",
                kind=QuestionKind.PREPOSITION_CHOICE,
                clip_id=a.clip_id,
                timestep=a.timestep,
                prompt=f"Select the preposition which is more appropriate: {lines}",
                options=tuple(rels),
                subject=(_key_str(src), _key_str(dst)),
            )
        )
    out.extend(sorted(preps, key=lambda q: q.question_id))

    hands: list[ValidationQuestion] = []
    for (anchor, relation), per_rank in a.hand_groups.items():
        sets = {per_rank[r] for r in per_rank}
        if len(sets) < 2:
            continue
        nouns = _dedup(key[1] for r in sorted(per_rank) for key in per_rank[r])
        if len(nouns) < 2:
            continue
        body = " or ".join(f"{relation} {noun}" for noun in nouns)
        hands.append(
            ValidationQuestion(
                question_id=f"{head}:hand:{_key_str(anchor)}:{relation}",
                kind=QuestionKind.HAND_CHOICE,
                clip_id=a.clip_id,
                timestep=a.timestep,
                prompt=f"Does CW {verb0} {noun0} {body}?",
                options=tuple(nouns),
                subject=(_key_str(anchor), relation),
            )
        )
    out.extend(sorted(hands, key=lambda q: q.question_id))

    spatials: list[ValidationQuestion] = []
    for (src, dst), props in a.pairs.items():
        if len(props) != 1 or src[0] != "obj" or dst[0] != "obj":
            continue
        relation = next(iter(props.values()))
        spatials.append(
            ValidationQuestion(
                question_id=f"{head}:spatial:{_key_str(src)}:{relation}:{_key_str(dst)}",
                kind=QuestionKind.SPATIAL_YES_NO,
                clip_id=a.clip_id,
                timestep=a.timestep,
                prompt=(
                    "Is the following statement correct: "
                    f"The {src[1]} is {relation} {dst[1]}"
                ),
                options=("yes", "no"),
                subject=(_key_str(src), relation, _key_str(dst)),
            )
        )
    out.extend(sorted(spatials, key=lambda q: q.question_id))
    return tuple(out)


def detect_disagreements(
    g1: AnnotatorGraph, g2: AnnotatorGraph, g3: AnnotatorGraph
) -> tuple[ValidationQuestion, ...]:
    """Questions needed to resolve the differences between the three graphs.

    Unanimous inputs produce no questions. Ordering is deterministic:
    verb-noun first, then preposition, hand, and spatial questions, each
    sorted by question id.
    """
    return _questions(_analyze(g1, g2, g3))


def merge(
    g1: AnnotatorGraph,
    g2: AnnotatorGraph,
    g3: AnnotatorGraph,
    answers: list[Answer] | tuple[Answer, ...] = (),
) -> ActionGraph:
    """Aggregate the three graphs into one consensus graph.

    Majority content is kept outright; every question produced by
    detect_disagreements must have exactly one matching answer; minority
    verb-object edges without a covering question are dropped. Groundings
    come from the lowest-id annotator among an object's proposers (the
    answer-designated annotators, where a question concerned the object).
    """
    a = _analyze(g1, g2, g3)
    questions = _questions(a)
    by_id = {q.question_id: q for q in questions}
    chosen: dict[str, str] = {}
    for ans in answers:
        q = by_id.get(ans.question_id)
        if q is None:
            raise ConsensusError(f"answer references unknown question {ans.question_id!r}")
        if ans.choice not in q.options:
            raise ConsensusError(
                f"answer {ans.choice!r} is not an option of {ans.question_id!r}"
            )
        chosen[ans.question_id] = ans.choice
    missing = [q.question_id for q in questions if q.question_id not in chosen]
    if missing:
        raise ConsensusError("unanswered questions: " + ", ".join(missing))

    head = f"{a.clip_id}:{a.timestep}"

    vn_options = _vn_options(a)
    if len(vn_options) > 1:
        want = chosen[f"{head}:vn"]
        verb, noun = next(p for p in vn_options if f"{p[0]} {p[1]}" == want)
    else:
        verb, noun = vn_options[0]
    vn_ranks = [r for r, p in enumerate(a.vn_pairs) if p == (verb, noun)]
    dobj_key = a.dobj_keys[vn_ranks[0]]

    # Hand questions reject the competing hand nodes outright.
    rejected: set[NodeKey] = set()
    for (anchor, relation), per_rank in a.hand_groups.items():
        q_id = f"{head}:hand:{_key_str(anchor)}:{relation}"
        if q_id not in chosen:
            continue
        winner = chosen[q_id]
        for r in per_rank:
            for key in per_rank[r]:
                if key[1] != winner:
                    rejected.add(key)

    retained: dict[tuple[NodeKey, NodeKey], str] = {}
    for (src, dst), props in a.pairs.items():
        if src in rejected or dst in rejected:
            continue
        prep_id = f"{head}:prep:{_key_str(src)}->{_key_str(dst)}"
        if len(props) >= 2:
            if prep_id in chosen:
                retained[(src, dst)] = chosen[prep_id]
            else:
                retained[(src, dst)] = Counter(props.values()).most_common(1)[0][0]
            continue
        rank, relation = next(iter(props.items()))
        if src[0] == "obj" and dst[0] == "obj":
            spatial_id = f"{head}:spatial:{_key_str(src)}:{relation}:{_key_str(dst)}"
            if chosen.get(spatial_id) == "yes":
                retained[(src, dst)] = relation
            continue
        hand_id = f"{head}:hand:{_key_str(src)}:{relation}"
        if dst[0] == "obj" and dst[1] in HAND_NOUNS and chosen.get(hand_id) == dst[1]:
            retained[(src, dst)] = relation

    # Only the verb node and the consensus direct object can anchor edges,
    # and the direct-object edge itself owns the (verb, dobj) pair.
    anchors = {("verb",), dobj_key}
    final_pairs = {
        pair: rel
        for pair, rel in retained.items()
        if (pair[0] in anchors and pair[1][0] == "obj")
        or (pair[1] in anchors and pair[0][0] == "obj")
    }
    final_pairs.pop((("verb",), dobj_key), None)

    keep: set[NodeKey] = {dobj_key}
    for src, dst in final_pairs:
        if src[0] == "obj":
            keep.add(src)
        if dst[0] == "obj":
            keep.add(dst)

    def proposer_ranks(key: NodeKey) -> list[int]:
        ranks = sorted(a.objects[key])
        if key == dobj_key and len(vn_ranks) < len(ranks):
            designated = [r for r in ranks if r in vn_ranks]
            if designated:
                return designated
        return ranks

    def owner(key: NodeKey) -> int:
        return min(a.objects[key], key=lambda r: a.annos[r].annotator_id)

    order = sorted(
        keep,
        key=lambda k: (
            a.annos[owner(k)].annotator_id,
            a.objects[k][owner(k)].instance_id or 0,
            k,
        ),
    )
    ids: dict[NodeKey, str] = {("cw",): "cw", ("verb",): "verb"}
    nodes: list[Node] = [Node.cw(), Node.verb_node(verb)]
    sources: list[str] = []
    for i, key in enumerate(order):
        ranks = proposer_ranks(key)
        source = min(ranks, key=lambda r: a.annos[r].annotator_id)
        donor = a.objects[key][source]
        node = Node.object_node(key[1], i, donor.grounding)
        ids[key] = node.node_id
        nodes.append(node)
        sources.append(f"{node.node_id}={a.annos[source].annotator_id}")

    edges: list[Edge] = [
        Edge("cw", "verb", ACTION),
        Edge("verb", ids[dobj_key], DIRECT_OBJECT),
    ]
    for (src, dst), relation in sorted(final_pairs.items(), key=lambda kv: str(kv[0])):
        edges.append(Edge(ids[src], ids[dst], relation))

    result = ActionGraph(
        clip_id=a.clip_id,
        timestep=a.timestep,
        frames=a.annos[0].graph.frames,
        nodes=tuple(nodes),
        edges=tuple(edges),
        provenance=Provenance(
            kind=ProvenanceKind.CONSENSUS, grounding_sources=tuple(sorted(sources))
        ),
    )
    report = validate_graph(result)
    if not report.ok:
        raise ConsensusError(f"consensus graph failed validation: {report.summary()}")
    return canonicalize(result)
