"""easg-kit: egocentric action scene graphs, end to end.

Data model and invariants, multi-annotator consensus, temporal object
correspondence, serialization formats, evaluation metrics, an annotation
service, and a command line front end.
"""

__version__ = "0.1.0"

from .core import (
    ActionGraph,
    BBox,
    Edge,
    FrameRef,
    FrameTriplet,
    Grounding,
    Node,
    SeedAnnotation,
    Taxonomy,
    canonicalize,
    default_taxonomy,
    init_graph,
    validate_graph,
)

__all__ = [
    "ActionGraph",
    "BBox",
    "Edge",
    "FrameRef",
    "FrameTriplet",
    "Grounding",
    "Node",
    "SeedAnnotation",
    "Taxonomy",
    "__version__",
    "canonicalize",
    "default_taxonomy",
    "init_graph",
    "validate_graph",
]
