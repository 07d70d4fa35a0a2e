"""Dataset statistics report."""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass

from ..formats import DatasetFile


@dataclass(frozen=True)
class StatsReport:
    """Aggregate numbers for a dataset file.

    Class counts are distinct labels observed in the clips' graphs, not
    taxonomy sizes. Clip duration runs from the first graph's PRE frame
    timestamp to the last graph's POST frame timestamp; clips missing either
    timestamp are excluded from the duration figures and listed in
    ``untimed_clips``.
    """

    sequence_count: int
    total_hours: float
    avg_sequence_seconds: float
    avg_graphs_per_sequence: float
    object_classes: int
    verb_classes: int
    relation_classes: int
    graph_length_histogram: dict[int, int]
    scenario_distribution: dict[str, int]
    split_box_counts: dict[str, int]
    untimed_clips: tuple[str, ...] = ()

    def to_jsonable(self) -> dict:
        return {
            "sequence_count": self.sequence_count,
            "total_hours": self.total_hours,
            "avg_sequence_seconds": self.avg_sequence_seconds,
            "avg_graphs_per_sequence": self.avg_graphs_per_sequence,
            "object_classes": self.object_classes,
            "verb_classes": self.verb_classes,
            "relation_classes": self.relation_classes,
            "graph_length_histogram": {
                str(length): count
                for length, count in sorted(self.graph_length_histogram.items())
            },
            "scenario_distribution": dict(sorted(self.scenario_distribution.items())),
            "split_box_counts": dict(sorted(self.split_box_counts.items())),
            "untimed_clips": list(self.untimed_clips),
        }


def render_stats_table(report: StatsReport) -> str:
    """Aligned two-column text rendering of a stats report."""
    hist = ", ".join(
        f"{length}: {count}"
        for length, count in sorted(report.graph_length_histogram.items())
    )
    scenarios = ", ".join(
        f"{name}: {count}"
        for name, count in sorted(report.scenario_distribution.items())
    )
    boxes = ", ".join(
        f"{split}: {count}"
        for split, count in sorted(report.split_box_counts.items())
    )
    rows = [
        ("sequences", str(report.sequence_count)),
        ("total hours", f"{report.total_hours:.3f}"),
        ("avg sequence seconds", f"{report.avg_sequence_seconds:.1f}"),
        ("avg graphs per sequence", f"{report.avg_graphs_per_sequence:.1f}"),
        ("object classes", str(report.object_classes)),
        ("verb classes", str(report.verb_classes)),
        ("relation classes", str(report.relation_classes)),
        ("graph length histogram", hist),
        ("scenarios", scenarios),
        ("grounding boxes", boxes),
    ]
    if report.untimed_clips:
        rows.append(("untimed clips", ", ".join(report.untimed_clips)))
    width = max(len(label) for label, _ in rows)
    return "\n".join(f"{label.ljust(width)}  {value}" for label, value in rows)


def compute_stats(dataset: DatasetFile) -> StatsReport:
    durations: list[float] = []
    untimed: list[str] = []
    lengths: Counter[int] = Counter()
    scenarios: Counter[str] = Counter()
    boxes: Counter[str] = Counter({"train": 0, "val": 0})
    nouns: set[str] = set()
    verbs: set[str] = set()
    relations: set[str] = set()

    for clip in dataset.clips:
        graphs = clip.dynamic.graphs
        lengths[len(graphs)] += 1
        scenarios[clip.scenario] += 1
        start = graphs[0].frames.pre.time_sec
        end = graphs[-1].frames.post.time_sec
        if start is None or end is None:
            warnings.warn(
                f"clip {clip.clip_id!r} has no frame timestamps; "
                "excluded from duration stats"
            )
            untimed.append(clip.clip_id)
        else:
            durations.append(end - start)
        for g in graphs:
            for node in g.object_nodes:
                if node.noun:
                    nouns.add(node.noun)
                if node.grounding is not None:
                    boxes[clip.split] += node.grounding.box_count()
            for node in g.verb_nodes:
                if node.verb:
                    verbs.add(node.verb)
            for edge in g.edges:
                relations.add(edge.relation)

    count = len(dataset.clips)
    return StatsReport(
        sequence_count=count,
        total_hours=sum(durations) / 3600.0,
        avg_sequence_seconds=sum(durations) / len(durations) if durations else 0.0,
        avg_graphs_per_sequence=(
            sum(length * n for length, n in lengths.items()) / count if count else 0.0
        ),
        object_classes=len(nouns),
        verb_classes=len(verbs),
        relation_classes=len(relations),
        graph_length_histogram=dict(lengths),
        scenario_distribution=dict(scenarios),
        split_box_counts=dict(boxes),
        untimed_clips=tuple(untimed),
    )
