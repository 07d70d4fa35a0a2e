"""Synthetic data: random valid graphs and single-invariant mutations.

Used by the test suite and by tooling that needs plausible graphs without a
real dataset. Every generator takes an explicit ``random.Random`` so runs
are reproducible.
"""

from __future__ import annotations

import dataclasses
import random
from typing import Callable

from .core import (
    ACTION,
    DIRECT_OBJECT,
    ActionGraph,
    BBox,
    Edge,
    FrameRef,
    FrameTriplet,
    Grounding,
    Node,
    SeedAnnotation,
    Taxonomy,
    add_object_node,
    default_taxonomy,
    init_graph,
    renumber_objects,
    validate,
)
from .core.ops import direct_objects

_FPS = 30.0


def indirect_relations(taxonomy: Taxonomy) -> tuple[str, ...]:
    """Relation labels usable on refinement edges (everything non-reserved)."""
    return tuple(r for r in taxonomy.relations if r not in (ACTION, DIRECT_OBJECT))


def random_bbox(rng: random.Random) -> BBox:
    return BBox(
        x=rng.randrange(0, 1600),
        y=rng.randrange(0, 900),
        w=rng.randrange(8, 320),
        h=rng.randrange(8, 320),
    )


def random_grounding(rng: random.Random, present_p: float = 0.8) -> Grounding:
    boxes = [random_bbox(rng) if rng.random() < present_p else None for _ in range(3)]
    return Grounding(pre=boxes[0], pnr=boxes[1], post=boxes[2])


def random_frames(rng: random.Random, clip_id: str, start: int | None = None) -> FrameTriplet:
    pre = start if start is not None else rng.randrange(0, 20_000)
    pnr = pre + rng.randrange(1, 60)
    post = pnr + rng.randrange(1, 60)
    return FrameTriplet(
        pre=FrameRef(clip_id, pre, time_sec=pre / _FPS),
        pnr=FrameRef(clip_id, pnr, time_sec=pnr / _FPS),
        post=FrameRef(clip_id, post, time_sec=post / _FPS),
    )


def random_seed(
    rng: random.Random,
    taxonomy: Taxonomy | None = None,
    clip_id: str = "clip-0000",
    timestep: int = 1,
) -> SeedAnnotation:
    tax = taxonomy or default_taxonomy()
    verb = rng.choice(tax.verbs)
    noun = rng.choice(tax.nouns)
    return SeedAnnotation(
        clip_id=clip_id,
        timestep=timestep,
        frames=random_frames(rng, clip_id),
        verb=verb,
        noun=noun,
        box_object=random_grounding(rng),
        box_left_hand=random_grounding(rng) if rng.random() < 0.5 else None,
        box_right_hand=random_grounding(rng) if rng.random() < 0.5 else None,
        narration=f"#C C {verb}s the {noun}",
    )


def random_graph(
    rng: random.Random,
    taxonomy: Taxonomy | None = None,
    *,
    clip_id: str = "clip-0000",
    timestep: int = 1,
    max_extra_objects: int = 3,
    grounded: bool = True,
    text_safe: bool = False,
) -> ActionGraph:
    """One random valid graph: seed plus a few refinement objects.

    ``text_safe`` constrains output to what the triplet text form can carry
    losslessly: noun classes distinct from each other and from the verb
    label, no groundings, canonical instance numbering.
    """
    tax = taxonomy or default_taxonomy()
    verb = rng.choice(tax.verbs)
    pool = [n for n in tax.nouns if n != verb] if text_safe else list(tax.nouns)
    count = 1 + rng.randint(0, max_extra_objects)
    nouns = rng.sample(pool, count)

    def grounding() -> Grounding:
        return random_grounding(rng) if grounded and not text_safe else Grounding()

    seed = SeedAnnotation(
        clip_id=clip_id,
        timestep=timestep,
        frames=random_frames(rng, clip_id),
        verb=verb,
        noun=nouns[0],
        box_object=grounding(),
    )
    g = init_graph(seed, tax)
    dobj_id = direct_objects(g)[0].node_id
    relations = indirect_relations(tax)
    for noun in nouns[1:]:
        anchor = dobj_id if rng.random() < 0.25 else "verb"
        g = add_object_node(g, noun, grounding(), anchor, rng.choice(relations), tax)
    if text_safe:
        g = renumber_objects(g)
    return g


def random_sequence(
    rng: random.Random,
    taxonomy: Taxonomy | None = None,
    *,
    clip_id: str = "clip-0000",
    length: int = 5,
    **kwargs,
) -> tuple[ActionGraph, ...]:
    """Random per-timestep graphs for one clip, with increasing frame spans."""
    graphs = []
    frame = rng.randrange(0, 300)
    for t in range(1, length + 1):
        g = random_graph(rng, taxonomy, clip_id=clip_id, timestep=t, **kwargs)
        frames = random_frames(rng, clip_id, start=frame)
        frame = frames.post.frame + rng.randrange(1, 120)
        graphs.append(dataclasses.replace(g, frames=frames))
    return tuple(graphs)


# One mutation per structural invariant. Each returns a broken variant of a
# valid input graph; the paired code must appear in the validation report.

_Mutation = Callable[[ActionGraph, random.Random, Taxonomy], ActionGraph]


def _drop_nodes(g: ActionGraph, keep: Callable[[Node], bool]) -> ActionGraph:
    return dataclasses.replace(g, nodes=tuple(n for n in g.nodes if keep(n)))


def _mut_missing_cw(g, rng, tax):
    return _drop_nodes(g, lambda n: n.node_id != "cw")


def _mut_duplicate_cw(g, rng, tax):
    return dataclasses.replace(g, nodes=g.nodes + (Node.cw(),))


def _mut_missing_verb(g, rng, tax):
    return _drop_nodes(g, lambda n: n.node_id != "verb")


def _mut_duplicate_verb(g, rng, tax):
    return dataclasses.replace(g, nodes=g.nodes + (Node.verb_node(rng.choice(tax.verbs)),))


def _mut_missing_action_edge(g, rng, tax):
    return dataclasses.replace(g, edges=tuple(e for e in g.edges if e.relation != ACTION))


def _mut_action_rewritten(g, rng, tax):
    edges = tuple(
        Edge(e.src, e.dst, "with") if e.relation == ACTION else e for e in g.edges
    )
    return dataclasses.replace(g, edges=edges)


def _mut_action_misplaced(g, rng, tax):
    obj = rng.choice(g.object_nodes)
    return dataclasses.replace(g, edges=g.edges + (Edge("verb", obj.node_id, ACTION),))


def _mut_invalid_cw_edge(g, rng, tax):
    obj = rng.choice(g.object_nodes)
    return dataclasses.replace(g, edges=g.edges + (Edge("cw", obj.node_id, "with"),))


def _mut_bad_direct_object(g, rng, tax):
    obj = rng.choice(g.object_nodes)
    return dataclasses.replace(g, edges=g.edges + (Edge(obj.node_id, "verb", DIRECT_OBJECT),))


def _mut_unreachable_object(g, rng, tax):
    used = [n.instance_id for n in g.object_nodes if n.instance_id is not None]
    node = Node.object_node(rng.choice(tax.nouns), max(used, default=-1) + 1)
    return dataclasses.replace(g, nodes=g.nodes + (node,))


def _mut_self_edge(g, rng, tax):
    obj = rng.choice(g.object_nodes)
    return dataclasses.replace(g, edges=g.edges + (Edge(obj.node_id, obj.node_id, "with"),))


def _mut_duplicate_edge(g, rng, tax):
    obj = direct_objects(g)[0]
    return dataclasses.replace(g, edges=g.edges + (Edge("verb", obj.node_id, "on"),))


def _mut_dangling_edge(g, rng, tax):
    return dataclasses.replace(g, edges=g.edges + (Edge("verb", "obj:9999", "with"),))


def _mut_duplicate_node_id(g, rng, tax):
    twin = Node.object_node(rng.choice(tax.nouns), 0)
    return dataclasses.replace(g, nodes=g.nodes + (twin,))


def _mut_invalid_timestep(g, rng, tax):
    return dataclasses.replace(g, timestep=0)


def _mut_unknown_verb(g, rng, tax):
    nodes = tuple(
        Node.verb_node("__not_a_verb__") if n.node_id == "verb" else n for n in g.nodes
    )
    return dataclasses.replace(g, nodes=nodes)


def _mut_unknown_noun(g, rng, tax):
    victim = rng.choice(g.object_nodes)
    nodes = tuple(
        Node.object_node("__not_a_noun__", n.instance_id or 0, n.grounding)
        if n is victim
        else n
        for n in g.nodes
    )
    return dataclasses.replace(g, nodes=nodes)


def _mut_unknown_relation(g, rng, tax):
    obj = direct_objects(g)[0]
    return dataclasses.replace(
        g, edges=g.edges + (Edge(obj.node_id, "verb", "__not_a_relation__"),)
    )


MUTATIONS: tuple[tuple[str, _Mutation], ...] = (
    (validate.MISSING_CW_NODE, _mut_missing_cw),
    (validate.DUPLICATE_CW_NODE, _mut_duplicate_cw),
    (validate.MISSING_VERB_NODE, _mut_missing_verb),
    (validate.DUPLICATE_VERB_NODE, _mut_duplicate_verb),
    (validate.MISSING_ACTION_EDGE, _mut_missing_action_edge),
    (validate.MISSING_ACTION_EDGE, _mut_action_rewritten),
    (validate.ACTION_EDGE_MISPLACED, _mut_action_misplaced),
    (validate.INVALID_CW_EDGE, _mut_invalid_cw_edge),
    (validate.BAD_DIRECT_OBJECT_EDGE, _mut_bad_direct_object),
    (validate.UNREACHABLE_OBJECT, _mut_unreachable_object),
    (validate.SELF_EDGE, _mut_self_edge),
    (validate.DUPLICATE_EDGE, _mut_duplicate_edge),
    (validate.DANGLING_EDGE, _mut_dangling_edge),
    (validate.DUPLICATE_NODE_ID, _mut_duplicate_node_id),
    (validate.INVALID_TIMESTEP, _mut_invalid_timestep),
    (validate.UNKNOWN_VERB, _mut_unknown_verb),
    (validate.UNKNOWN_NOUN, _mut_unknown_noun),
    (validate.UNKNOWN_RELATION, _mut_unknown_relation),
)


def mutate_graph(
    g: ActionGraph, rng: random.Random, taxonomy: Taxonomy | None = None
) -> tuple[ActionGraph, str]:
    """Break exactly one invariant of a valid graph.

    Returns the broken graph and the violation code its validation report
    must contain.
    """
    tax = taxonomy or default_taxonomy()
    code, fn = MUTATIONS[rng.randrange(len(MUTATIONS))]
    return fn(g, rng, tax), code
