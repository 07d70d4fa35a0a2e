"""Operations over action graphs: construction, queries, canonical form."""

from __future__ import annotations

from .model import ActionGraph, Edge, Grounding, Node, Provenance, SeedAnnotation
from .taxonomy import ACTION, DIRECT_OBJECT, HAND_NOUNS, Taxonomy


class GraphOpError(ValueError):
    """Raised when a graph operation gets arguments it cannot honour."""


def init_graph(seed: SeedAnnotation, taxonomy: Taxonomy | None = None) -> ActionGraph:
    """Build the initial graph for one action from a seed annotation.

    The result has the camera-wearer node, the verb node, the seed's object
    as the sole direct object, and the connecting edges. The seed's hand
    boxes are not consumed here; hands enter the graph during refinement via
    add_object_node.
    """
    if taxonomy is not None:
        if not taxonomy.has_verb(seed.verb):
            raise GraphOpError(f"unknown verb class {seed.verb!r}")
        if not taxonomy.has_noun(seed.noun):
            raise GraphOpError(f"unknown noun class {seed.noun!r}")

    obj = Node.object_node(seed.noun, 0, seed.box_object)
    return ActionGraph(
        clip_id=seed.clip_id,
        timestep=seed.timestep,
        frames=seed.frames,
        nodes=(Node.cw(), Node.verb_node(seed.verb), obj),
        edges=(Edge("cw", "verb", ACTION), Edge("verb", obj.node_id, DIRECT_OBJECT)),
        provenance=Provenance.seed(),
    )


def add_object_node(
    graph: ActionGraph,
    noun: str,
    grounding: Grounding,
    anchor: str,
    relation: str,
    taxonomy: Taxonomy | None = None,
) -> ActionGraph:
    """Return a new graph with one more object node attached at ``anchor``.

    ``anchor`` is 'verb' or the node id of an existing direct object. The new
    object gets the next unused instance id and one ``anchor -> object`` edge.
    Refinement adds only indirect objects, so the reserved relations are
    rejected here; direct objects come from the seed annotation.
    """
    if taxonomy is not None:
        if not taxonomy.has_noun(noun):
            raise GraphOpError(f"unknown noun class {noun!r}")
        if not taxonomy.has_relation(relation):
            raise GraphOpError(f"unknown relation label {relation!r}")
    if relation == ACTION:
        raise GraphOpError(f"relation {ACTION!r} is reserved for the cw->verb edge")
    if relation == DIRECT_OBJECT:
        raise GraphOpError(f"relation {DIRECT_OBJECT!r} cannot be added in refinement")
    if graph.node_by_id(anchor) is None:
        raise GraphOpError(f"anchor node {anchor!r} not in graph")
    dobj_ids = {n.node_id for n in direct_objects(graph)}
    if anchor != "verb" and anchor not in dobj_ids:
        raise GraphOpError(f"anchor {anchor!r} must be the verb node or a direct object")

    used = [n.instance_id for n in graph.object_nodes if n.instance_id is not None]
    node = Node.object_node(noun, max(used, default=-1) + 1, grounding)
    edge = Edge(anchor, node.node_id, relation)
    return ActionGraph(
        clip_id=graph.clip_id,
        timestep=graph.timestep,
        frames=graph.frames,
        nodes=graph.nodes + (node,),
        edges=graph.edges + (edge,),
        provenance=graph.provenance,
    )


def direct_objects(graph: ActionGraph) -> tuple[Node, ...]:
    """Object nodes reached by a '{direct object}' edge from the verb node."""
    ids = [
        e.dst
        for e in graph.edges
        if e.relation == DIRECT_OBJECT and e.src == "verb"
    ]
    seen: set[str] = set()
    out: list[Node] = []
    for nid in ids:
        if nid in seen:
            continue
        seen.add(nid)
        node = graph.node_by_id(nid)
        if node is not None and node.kind.value == "object":
            out.append(node)
    return tuple(out)


def hand_nodes(graph: ActionGraph) -> tuple[Node, ...]:
    """Object nodes whose noun is one of the hand classes."""
    return tuple(n for n in graph.object_nodes if n.noun in HAND_NOUNS)


def canonicalize(graph: ActionGraph) -> ActionGraph:
    """Return the graph in canonical order.

    Nodes: camera wearer, verb, then objects by (noun class, instance id).
    Edges sorted by (source position, destination position, relation).
    Idempotent, and two structurally identical graphs canonicalize to equal
    node/edge tuples regardless of insertion order.
    """
    ordered: list[Node] = []
    ordered += graph.cw_nodes
    ordered += graph.verb_nodes
    ordered += sorted(
        graph.object_nodes,
        key=lambda n: (n.noun or "", n.instance_id if n.instance_id is not None else -1),
    )
    position = {}
    for i, node in enumerate(ordered):
        position.setdefault(node.node_id, i)

    def edge_key(e: Edge) -> tuple[int, int, str]:
        return (
            position.get(e.src, len(ordered)),
            position.get(e.dst, len(ordered)),
            e.relation,
        )

    return ActionGraph(
        clip_id=graph.clip_id,
        timestep=graph.timestep,
        frames=graph.frames,
        nodes=tuple(ordered),
        edges=tuple(sorted(graph.edges, key=edge_key)),
        provenance=graph.provenance,
    )


def renumber_objects(graph: ActionGraph) -> ActionGraph:
    """Reassign object instance ids densely, in canonical node order.

    After renumbering, canonical object order and instance-id order agree,
    which is what the text serializations assume. Edges are rewritten to the
    new ids.
    """
    objects = sorted(
        graph.object_nodes,
        key=lambda n: (n.noun or "", n.instance_id if n.instance_id is not None else -1),
    )
    mapping: dict[str, str] = {}
    renumbered: list[Node] = []
    for i, node in enumerate(objects):
        new = Node.object_node(node.noun or "", i, node.grounding)
        mapping[node.node_id] = new.node_id
        renumbered.append(new)
    nodes = tuple(graph.cw_nodes) + tuple(graph.verb_nodes) + tuple(renumbered)
    edges = tuple(
        Edge(mapping.get(e.src, e.src), mapping.get(e.dst, e.dst), e.relation)
        for e in graph.edges
    )
    return ActionGraph(
        clip_id=graph.clip_id,
        timestep=graph.timestep,
        frames=graph.frames,
        nodes=nodes,
        edges=edges,
        provenance=graph.provenance,
    )


def structurally_equal(a: ActionGraph, b: ActionGraph) -> bool:
    """True when the two graphs match up to node/edge order and provenance."""
    ca, cb = canonicalize(a), canonicalize(b)
    return (
        ca.clip_id == cb.clip_id
        and ca.timestep == cb.timestep
        and ca.frames == cb.frames
        and ca.nodes == cb.nodes
        and ca.edges == cb.edges
    )
