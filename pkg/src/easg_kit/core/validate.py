"""Structural invariant checks for action graphs.

Violations are data: ``validate_graph`` never raises on a bad graph, it
returns a report with one machine-readable code per broken invariant.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .model import ActionGraph, NodeKind
from .taxonomy import ACTION, DIRECT_OBJECT, Taxonomy

# Error codes
MISSING_CW_NODE = "MISSING_CW_NODE"
DUPLICATE_CW_NODE = "DUPLICATE_CW_NODE"
MISSING_VERB_NODE = "MISSING_VERB_NODE"
DUPLICATE_VERB_NODE = "DUPLICATE_VERB_NODE"
DUPLICATE_NODE_ID = "DUPLICATE_NODE_ID"
MISSING_ACTION_EDGE = "MISSING_ACTION_EDGE"
ACTION_EDGE_MISPLACED = "ACTION_EDGE_MISPLACED"
INVALID_CW_EDGE = "INVALID_CW_EDGE"
BAD_DIRECT_OBJECT_EDGE = "BAD_DIRECT_OBJECT_EDGE"
UNREACHABLE_OBJECT = "UNREACHABLE_OBJECT"
SELF_EDGE = "SELF_EDGE"
DUPLICATE_EDGE = "DUPLICATE_EDGE"
DANGLING_EDGE = "DANGLING_EDGE"
INVALID_TIMESTEP = "INVALID_TIMESTEP"
UNKNOWN_VERB = "UNKNOWN_VERB"
UNKNOWN_NOUN = "UNKNOWN_NOUN"
UNKNOWN_RELATION = "UNKNOWN_RELATION"

# Warning codes
MULTIPLE_DIRECT_OBJECTS = "MULTIPLE_DIRECT_OBJECTS"


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    subject: str | None = None


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()
    warnings: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> tuple[str, ...]:
        return tuple(v.code for v in self.violations)

    def has(self, code: str) -> bool:
        return any(v.code == code for v in self.violations + self.warnings)

    def summary(self) -> str:
        if self.ok and not self.warnings:
            return "ok"
        lines = [f"{v.code}: {v.message}" for v in self.violations]
        lines += [f"warning {v.code}: {v.message}" for v in self.warnings]
        return "; ".join(lines)

    def to_jsonable(self) -> dict:
        def items(seq: tuple[Violation, ...]) -> list[dict]:
            return [
                {"code": v.code, "message": v.message, "subject": v.subject}
                for v in seq
            ]

        return {
            "ok": self.ok,
            "violations": items(self.violations),
            "warnings": items(self.warnings),
        }


@dataclass
class _Collector:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[Violation] = field(default_factory=list)

    def error(self, code: str, message: str, subject: str | None = None) -> None:
        self.violations.append(Violation(code, message, subject))

    def warn(self, code: str, message: str, subject: str | None = None) -> None:
        self.warnings.append(Violation(code, message, subject))

    def report(self) -> ValidationReport:
        return ValidationReport(tuple(self.violations), tuple(self.warnings))


def validate_graph(graph: ActionGraph, taxonomy: Taxonomy | None = None) -> ValidationReport:
    """Check every structural invariant, returning all violations at once.

    With a taxonomy, verb/noun/relation labels are also checked against the
    vocabularies; without one, only structure is checked.
    """
    out = _Collector()

    cw = graph.cw_nodes
    verbs = graph.verb_nodes
    objects = graph.object_nodes

    if not cw:
        out.error(MISSING_CW_NODE, "graph has no camera-wearer node")
    elif len(cw) > 1:
        out.error(DUPLICATE_CW_NODE, f"graph has {len(cw)} camera-wearer nodes")
    if not verbs:
        out.error(MISSING_VERB_NODE, "graph has no verb node")
    elif len(verbs) > 1:
        out.error(DUPLICATE_VERB_NODE, f"graph has {len(verbs)} verb nodes")

    id_counts = Counter(n.node_id for n in graph.nodes)
    for node_id, count in sorted(id_counts.items()):
        if count > 1 and node_id.startswith("obj:"):
            out.error(DUPLICATE_NODE_ID, f"node id {node_id} used by {count} nodes", node_id)

    if graph.timestep < 1:
        out.error(INVALID_TIMESTEP, f"timestep must be >= 1, got {graph.timestep}")

    if taxonomy is not None:
        for node in verbs:
            if node.verb and not taxonomy.has_verb(node.verb):
                out.error(UNKNOWN_VERB, f"unknown verb class {node.verb!r}", node.node_id)
        for node in objects:
            if node.noun and not taxonomy.has_noun(node.noun):
                out.error(UNKNOWN_NOUN, f"unknown noun class {node.noun!r}", node.node_id)
        for edge in graph.edges:
            if not taxonomy.has_relation(edge.relation):
                out.error(
                    UNKNOWN_RELATION,
                    f"unknown relation label {edge.relation!r}",
                    f"{edge.src}->{edge.dst}",
                )

    known_ids = set(id_counts)
    pair_counts = Counter((e.src, e.dst) for e in graph.edges)
    for (src, dst), count in sorted(pair_counts.items()):
        if count > 1:
            out.error(DUPLICATE_EDGE, f"{count} edges on ordered pair {src}->{dst}", f"{src}->{dst}")

    action_edges = []
    for edge in graph.edges:
        subject = f"{edge.src}->{edge.dst}"
        if edge.src == edge.dst:
            out.error(SELF_EDGE, f"self-edge on {edge.src}", subject)
        if edge.src not in known_ids or edge.dst not in known_ids:
            out.error(DANGLING_EDGE, f"edge {subject} references a missing node", subject)
            continue
        if edge.relation == ACTION:
            action_edges.append(edge)
            if not (edge.src == "cw" and edge.dst == "verb"):
                out.error(
                    ACTION_EDGE_MISPLACED,
                    f"'{ACTION}' relation allowed only on the cw->verb edge, found on {subject}",
                    subject,
                )
        elif "cw" in (edge.src, edge.dst):
            out.error(
                INVALID_CW_EDGE,
                f"camera wearer participates only in the action edge, found {subject}",
                subject,
            )
        if edge.relation == DIRECT_OBJECT and not (
            edge.src == "verb" and edge.dst.startswith("obj:")
        ):
            out.error(
                BAD_DIRECT_OBJECT_EDGE,
                f"'{DIRECT_OBJECT}' edges go only from the verb node to an object, found {subject}",
                subject,
            )

    if not any(e.src == "cw" and e.dst == "verb" and e.relation == ACTION for e in graph.edges):
        out.error(MISSING_ACTION_EDGE, "no cw->verb edge with the 'action' relation")

    dobj_ids = {
        e.dst
        for e in graph.edges
        if e.relation == DIRECT_OBJECT and e.src == "verb" and e.dst.startswith("obj:")
    }
    if len(dobj_ids) > 1:
        out.warn(
            MULTIPLE_DIRECT_OBJECTS,
            f"verb node has {len(dobj_ids)} direct objects",
        )

    # Objects must be a direct object, or touch the verb node or a direct object.
    for node in objects:
        nid = node.node_id
        if nid in dobj_ids:
            continue
        anchored = any(
            (e.src == nid and (e.dst == "verb" or e.dst in dobj_ids))
            or (e.dst == nid and (e.src == "verb" or e.src in dobj_ids))
            for e in graph.edges
        )
        if not anchored:
            out.error(
                UNREACHABLE_OBJECT,
                f"object {nid} ({node.noun}) has no edge to the verb node or a direct object",
                nid,
            )

    return out.report()
