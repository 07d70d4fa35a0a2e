"""Immutable value types for single-timestep action graphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Stage(str, Enum):
    """The three key frames anchoring one action."""

    PRE = "pre"
    PNR = "pnr"
    POST = "post"


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in pixels, (x, y) = top-left corner."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box must have positive area, got w={self.w}, h={self.h}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"box corner must be non-negative, got x={self.x}, y={self.y}")


@dataclass(frozen=True)
class FrameRef:
    """Reference to one video frame by clip id and frame number."""

    clip_id: str
    frame: int
    uri: str | None = None
    time_sec: float | None = None


@dataclass(frozen=True)
class FrameTriplet:
    """The PRE/PNR/POST frames of one action; frame numbers are ordered."""

    pre: FrameRef
    pnr: FrameRef
    post: FrameRef

    def __post_init__(self) -> None:
        if not (self.pre.frame <= self.pnr.frame <= self.post.frame):
            raise ValueError(
                "frames must satisfy pre <= pnr <= post, got "
                f"{self.pre.frame}, {self.pnr.frame}, {self.post.frame}"
            )

    def ref(self, stage: Stage) -> FrameRef:
        return {Stage.PRE: self.pre, Stage.PNR: self.pnr, Stage.POST: self.post}[stage]


@dataclass(frozen=True)
class Grounding:
    """Per-stage boxes localizing an object; a stage with no box stays None.

    An occluded or out-of-frame stage is represented by the absence of a
    box, never by a degenerate zero-area box.
    """

    pre: BBox | None = None
    pnr: BBox | None = None
    post: BBox | None = None

    def box(self, stage: Stage) -> BBox | None:
        return {Stage.PRE: self.pre, Stage.PNR: self.pnr, Stage.POST: self.post}[stage]

    def box_count(self) -> int:
        return sum(1 for b in (self.pre, self.pnr, self.post) if b is not None)


class NodeKind(str, Enum):
    CW = "cw"
    VERB = "verb"
    OBJECT = "object"


@dataclass(frozen=True)
class Node:
    """One graph node: the camera wearer, the action verb, or an object.

    The camera-wearer node carries no attributes. The verb node carries
    exactly one verb class. Object nodes carry one noun class, a
    clip-local instance id, and optional per-stage grounding boxes.
    """

    kind: NodeKind
    verb: str | None = None
    noun: str | None = None
    instance_id: int | None = None
    grounding: Grounding = Grounding()

    def __post_init__(self) -> None:
        if self.kind is NodeKind.CW:
            if self.verb is not None or self.noun is not None or self.instance_id is not None:
                raise ValueError("camera-wearer node carries no attributes")
        elif self.kind is NodeKind.VERB:
            if not self.verb:
                raise ValueError("verb node needs a verb class")
            if self.noun is not None or self.instance_id is not None:
                raise ValueError("verb node carries only a verb class")
        else:
            if not self.noun or self.instance_id is None:
                raise ValueError("object node needs a noun class and an instance id")
            if self.verb is not None:
                raise ValueError("object node cannot carry a verb class")

    @property
    def node_id(self) -> str:
        if self.kind is NodeKind.CW:
            return "cw"
        if self.kind is NodeKind.VERB:
            return "verb"
        return f"obj:{self.instance_id}"

    @staticmethod
    def cw() -> Node:
        return Node(kind=NodeKind.CW)

    @staticmethod
    def verb_node(verb: str) -> Node:
        return Node(kind=NodeKind.VERB, verb=verb)

    @staticmethod
    def object_node(noun: str, instance_id: int, grounding: Grounding = Grounding()) -> Node:
        return Node(kind=NodeKind.OBJECT, noun=noun, instance_id=instance_id, grounding=grounding)


@dataclass(frozen=True)
class Edge:
    """Directed labeled edge between two nodes, referenced by node id."""

    src: str
    dst: str
    relation: str


class ProvenanceKind(str, Enum):
    SEED = "seed"
    ANNOTATOR = "annotator"
    CONSENSUS = "consensus"
    PARSED = "parsed"


@dataclass(frozen=True)
class Provenance:
    """Where a graph came from.

    ``grounding_sources`` records, for consensus graphs, which annotator
    supplied each retained object's boxes, one ``"obj:N=annotator"`` entry
    per object node.
    """

    kind: ProvenanceKind
    annotator_id: str | None = None
    grounding_sources: tuple[str, ...] = ()

    @staticmethod
    def seed() -> Provenance:
        return Provenance(kind=ProvenanceKind.SEED)

    @staticmethod
    def annotator(annotator_id: str) -> Provenance:
        return Provenance(kind=ProvenanceKind.ANNOTATOR, annotator_id=annotator_id)


@dataclass(frozen=True)
class ActionGraph:
    """One timestep of the dynamic graph.

    Construction is permissive: structural rules (single verb node, the
    mandatory camera-wearer action edge, object connectivity, ...) are
    checked by :func:`easg_kit.core.validate.validate_graph`, which treats
    violations as reportable data rather than exceptions. The constructor
    only enforces value-level shape (see the field types).
    """

    clip_id: str
    timestep: int
    frames: FrameTriplet
    nodes: tuple[Node, ...] = ()
    edges: tuple[Edge, ...] = ()
    provenance: Provenance = field(default_factory=Provenance.seed)

    def node_by_id(self, node_id: str) -> Node | None:
        for node in self.nodes:
            if node.node_id == node_id:
                return node
        return None

    @property
    def cw_nodes(self) -> tuple[Node, ...]:
        return tuple(n for n in self.nodes if n.kind is NodeKind.CW)

    @property
    def verb_nodes(self) -> tuple[Node, ...]:
        return tuple(n for n in self.nodes if n.kind is NodeKind.VERB)

    @property
    def object_nodes(self) -> tuple[Node, ...]:
        return tuple(n for n in self.nodes if n.kind is NodeKind.OBJECT)

    @property
    def verb(self) -> str | None:
        """Verb class of the (unique) verb node, if present."""
        verbs = self.verb_nodes
        return verbs[0].verb if len(verbs) == 1 else None


@dataclass(frozen=True)
class SeedAnnotation:
    """Object-state-change tuple that seeds one graph.

    Carries the three key frames, the manipulated object's noun class and
    boxes, optional hand boxes, the matched narration, and the verb class
    extracted from the narration upstream.
    """

    clip_id: str
    timestep: int
    frames: FrameTriplet
    verb: str
    noun: str
    box_object: Grounding
    box_left_hand: Grounding | None = None
    box_right_hand: Grounding | None = None
    narration: str = ""
