"""Temporal recollection: one instance index per physical object across a clip.

The default heuristic links every occurrence of a noun class within a clip
to a single instance. Manual overrides refine it: groups assert
same-instance (including across synonym noun classes), splits assert
distinct instances. Objects that coexist in one graph are always distinct.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass

from .core import ActionGraph, DIRECT_OBJECT, Edge, Node, validate_graph

# (timestep, node id within that timestep's graph), e.g. (3, "obj:1")
OccurrenceRef = tuple[int, str]


class TemporalError(ValueError):
    """Raised on malformed sequences or contradictory overrides."""


class CoexistenceWarning(UserWarning):
    """Two same-class objects share one graph; default linking keeps them apart."""


@dataclass(frozen=True)
class CorrespondenceOverride:
    """Manual same-instance groups and distinct-instance splits."""

    groups: tuple[tuple[OccurrenceRef, ...], ...] = ()
    splits: tuple[tuple[OccurrenceRef, OccurrenceRef], ...] = ()

    def __post_init__(self) -> None:
        seen: dict[OccurrenceRef, int] = {}
        for i, group in enumerate(self.groups):
            if len(group) < 2:
                raise TemporalError(f"override group {i} needs at least two occurrences")
            for ref in group:
                if ref in seen and seen[ref] != i:
                    raise TemporalError(
                        f"occurrence {ref} appears in override groups {seen[ref]} and {i}"
                    )
                seen[ref] = i
        for a, b in self.splits:
            if a == b:
                raise TemporalError(f"split pairs one occurrence {a} with itself")
            if a in seen and b in seen and seen[a] == seen[b]:
                raise TemporalError(
                    f"split {a} / {b} contradicts override group {seen[a]}"
                )


@dataclass(frozen=True)
class DynamicGraph:
    """A clip's graphs, ordered by timestep 1..T."""

    clip_id: str
    graphs: tuple[ActionGraph, ...]

    def __post_init__(self) -> None:
        if not self.graphs:
            raise TemporalError("a dynamic graph needs at least one timestep")
        for g in self.graphs:
            if g.clip_id != self.clip_id:
                raise TemporalError(
                    f"graph clip {g.clip_id!r} does not match dynamic graph {self.clip_id!r}"
                )
        steps = [g.timestep for g in self.graphs]
        if steps != list(range(1, len(steps) + 1)):
            raise TemporalError(f"timesteps must be contiguous from 1, got {steps}")

    @property
    def T(self) -> int:
        return len(self.graphs)

    def graph_at(self, timestep: int) -> ActionGraph:
        return self.graphs[timestep - 1]

    def instance_nouns(self) -> dict[int, tuple[str, ...]]:
        """Noun classes observed per instance id (more than one only after
        a synonym-fusing override)."""
        nouns: dict[int, list[str]] = {}
        for g in self.graphs:
            for node in g.object_nodes:
                if node.instance_id is None:
                    continue
                bucket = nouns.setdefault(node.instance_id, [])
                if node.noun and node.noun not in bucket:
                    bucket.append(node.noun)
        return {k: tuple(v) for k, v in sorted(nouns.items())}


@dataclass(frozen=True)
class Track:
    """One object instance across the clip."""

    instance_id: int
    noun: str
    timesteps: tuple[int, ...]
    roles: tuple[str, ...]  # "direct" | "indirect" per timestep


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[OccurrenceRef, OccurrenceRef] = {}

    def add(self, key: OccurrenceRef) -> None:
        self.parent.setdefault(key, key)

    def find(self, key: OccurrenceRef) -> OccurrenceRef:
        root = key
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[key] != root:
            self.parent[key], key = root, self.parent[key]
        return root

    def union(self, a: OccurrenceRef, b: OccurrenceRef) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def recollect(
    graphs,
    overrides: CorrespondenceOverride | None = None,
) -> DynamicGraph:
    """Re-assign object instance ids so one physical object keeps one index.

    Ids are dense, in order of first appearance. Structure is otherwise
    untouched: node and edge counts, nouns, groundings, and relations per
    timestep are preserved.
    """
    ov = overrides or CorrespondenceOverride()
    ordered = sorted(graphs, key=lambda g: g.timestep)
    if not ordered:
        raise TemporalError("recollect needs at least one graph")
    clip_id = ordered[0].clip_id
    for g in ordered:
        if g.clip_id != clip_id:
            raise TemporalError(f"graphs span clips {clip_id!r} and {g.clip_id!r}")
        report = validate_graph(g)
        if not report.ok:
            raise TemporalError(
                f"graph at t={g.timestep} is invalid: {report.summary()}"
            )
    steps = [g.timestep for g in ordered]
    if steps != list(range(1, len(steps) + 1)):
        raise TemporalError(f"timesteps must be contiguous from 1, got {steps}")

    # Occurrences in first-appearance order.
    occurrences: list[tuple[OccurrenceRef, Node]] = []
    by_ref: dict[OccurrenceRef, Node] = {}
    uf = _UnionFind()
    for g in ordered:
        for node in sorted(g.object_nodes, key=lambda n: n.instance_id or 0):
            ref = (g.timestep, node.node_id)
            occurrences.append((ref, node))
            by_ref[ref] = node
            uf.add(ref)

    def resolve(ref: OccurrenceRef, context: str) -> OccurrenceRef:
        if ref not in by_ref:
            raise TemporalError(f"{context} references unknown occurrence {ref}")
        return ref

    # Objects sharing a graph are distinct physical objects.
    cannot: list[tuple[OccurrenceRef, OccurrenceRef]] = []
    for g in ordered:
        refs = [(g.timestep, n.node_id) for n in g.object_nodes]
        for i in range(len(refs)):
            for j in range(i + 1, len(refs)):
                cannot.append((refs[i], refs[j]))
        noun_counts = Counter(n.noun for n in g.object_nodes)
        for noun, count in sorted(noun_counts.items()):
            if count > 1:
                warnings.warn(
                    f"clip {clip_id}: {count} {noun!r} objects coexist at "
                    f"t={g.timestep}; kept as distinct instances",
                    CoexistenceWarning,
                    stacklevel=2,
                )

    for gi, group in enumerate(ov.groups):
        refs = [resolve(r, f"override group {gi}") for r in group]
        by_step = Counter(t for t, _ in refs)
        step, n = by_step.most_common(1)[0]
        if n > 1:
            raise TemporalError(
                f"override group {gi} links {n} occurrences inside t={step}; "
                "objects in one graph are always distinct"
            )
        for other in refs[1:]:
            uf.union(refs[0], other)

    for a, b in ov.splits:
        resolve(a, "split"), resolve(b, "split")
        if uf.find(a) != uf.find(b):
            continue
        raise TemporalError(
            f"split {a} / {b} contradicts the override groups linking them"
        )

    def union_violates(ra: OccurrenceRef, rb: OccurrenceRef) -> bool:
        for x, y in list(ov.splits) + cannot:
            fx, fy = uf.find(x), uf.find(y)
            if (fx == ra and fy == rb) or (fx == rb and fy == ra):
                return True
        return False

    # Default heuristic: chain same-noun occurrences, respecting constraints.
    reps_per_noun: dict[str, list[OccurrenceRef]] = {}
    for ref, node in occurrences:
        reps = reps_per_noun.setdefault(node.noun or "", [])
        root = uf.find(ref)
        linked = False
        for rep in reps:
            rep_root = uf.find(rep)
            if rep_root == root:
                linked = True
                break
            if not union_violates(rep_root, root):
                uf.union(rep, ref)
                linked = True
                break
        if not linked:
            reps.append(ref)

    ids: dict[OccurrenceRef, int] = {}
    for ref, _ in occurrences:
        root = uf.find(ref)
        if root not in ids:
            ids[root] = len(ids)

    new_graphs: list[ActionGraph] = []
    for g in ordered:
        mapping: dict[str, str] = {}
        nodes: list[Node] = []
        for node in g.nodes:
            if node.node_id.startswith("obj:"):
                new_id = ids[uf.find((g.timestep, node.node_id))]
                fresh = Node.object_node(node.noun or "", new_id, node.grounding)
                mapping[node.node_id] = fresh.node_id
                nodes.append(fresh)
            else:
                nodes.append(node)
        edges = tuple(
            Edge(mapping.get(e.src, e.src), mapping.get(e.dst, e.dst), e.relation)
            for e in g.edges
        )
        new_graphs.append(
            ActionGraph(
                clip_id=g.clip_id,
                timestep=g.timestep,
                frames=g.frames,
                nodes=tuple(nodes),
                edges=edges,
                provenance=g.provenance,
            )
        )
    return DynamicGraph(clip_id=clip_id, graphs=tuple(new_graphs))


def instance_tracks(dg: DynamicGraph) -> tuple[Track, ...]:
    """One track per instance: sorted timesteps plus direct/indirect role."""
    found: dict[int, dict[int, str]] = {}
    nouns: dict[int, str] = {}
    for g in dg.graphs:
        dobj_ids = {
            e.dst for e in g.edges if e.relation == DIRECT_OBJECT and e.src == "verb"
        }
        for node in g.object_nodes:
            if node.instance_id is None:
                continue
            role = "direct" if node.node_id in dobj_ids else "indirect"
            found.setdefault(node.instance_id, {})[g.timestep] = role
            nouns.setdefault(node.instance_id, node.noun or "")
    tracks = []
    for instance_id in sorted(found):
        steps = tuple(sorted(found[instance_id]))
        tracks.append(
            Track(
                instance_id=instance_id,
                noun=nouns[instance_id],
                timesteps=steps,
                roles=tuple(found[instance_id][t] for t in steps),
            )
        )
    return tuple(tracks)
