"""Graph data model, structural invariants, and core operations."""

from .model import (
    ActionGraph,
    BBox,
    Edge,
    FrameRef,
    FrameTriplet,
    Grounding,
    Node,
    NodeKind,
    Provenance,
    ProvenanceKind,
    SeedAnnotation,
    Stage,
)
from .ops import (
    GraphOpError,
    add_object_node,
    canonicalize,
    direct_objects,
    hand_nodes,
    init_graph,
    renumber_objects,
    structurally_equal,
)
from .taxonomy import (
    ACTION,
    DIRECT_OBJECT,
    HAND_NOUNS,
    RESERVED_RELATIONS,
    Taxonomy,
    TaxonomyError,
    default_taxonomy,
)
from .validate import ValidationReport, Violation, validate_graph

__all__ = [
    "ACTION",
    "ActionGraph",
    "BBox",
    "DIRECT_OBJECT",
    "Edge",
    "FrameRef",
    "FrameTriplet",
    "GraphOpError",
    "Grounding",
    "HAND_NOUNS",
    "Node",
    "NodeKind",
    "Provenance",
    "ProvenanceKind",
    "RESERVED_RELATIONS",
    "SeedAnnotation",
    "Stage",
    "Taxonomy",
    "TaxonomyError",
    "ValidationReport",
    "Violation",
    "add_object_node",
    "canonicalize",
    "default_taxonomy",
    "direct_objects",
    "hand_nodes",
    "init_graph",
    "renumber_objects",
    "structurally_equal",
    "validate_graph",
]
