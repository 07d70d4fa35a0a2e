"""Dataset file I/O.

One JSON document carries a taxonomy, the consensus clips, and the raw
annotation artifacts. Serialization is canonical: keys sorted, two-space
indent, UTF-8, trailing newline, collections in a fixed order. Saving the
result of a load reproduces the input byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from ..consensus import AnnotatorGraph, Answer, QuestionKind, ValidationQuestion
from ..core import (
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
    Taxonomy,
    canonicalize,
    validate_graph,
)
from ..temporal import CorrespondenceOverride, DynamicGraph

SCHEMA_VERSION = 1


class DatasetError(Exception):
    """Base class for dataset file problems."""


class SchemaError(DatasetError):
    """The document is not valid JSON or does not match the schema."""


class DatasetValidationError(DatasetError):
    """The document is well-formed but its content breaks an invariant."""


@dataclass(frozen=True)
class ClipRecord:
    """One clip: its dynamic graph plus optional text annotations."""

    clip_id: str
    scenario: str
    split: str
    dynamic: DynamicGraph
    narrations: tuple[str, ...] = ()
    summary: str | None = None

    def __post_init__(self) -> None:
        if self.split not in ("train", "val"):
            raise ValueError(f"split must be train or val, got {self.split!r}")
        if self.dynamic.clip_id != self.clip_id:
            raise ValueError(
                f"dynamic graph belongs to {self.dynamic.clip_id!r}, not {self.clip_id!r}"
            )
        if self.narrations and len(self.narrations) != self.dynamic.T:
            raise ValueError(
                f"need one narration per timestep ({self.dynamic.T}), "
                f"got {len(self.narrations)}"
            )


@dataclass(frozen=True)
class AnnotationArtifacts:
    """Raw per-annotator graphs and the consensus Q&A trail."""

    annotator_graphs: tuple[AnnotatorGraph, ...] = ()
    questions: tuple[ValidationQuestion, ...] = ()
    answers: tuple[Answer, ...] = ()
    overrides: dict[str, CorrespondenceOverride] = field(default_factory=dict)


@dataclass(frozen=True)
class DatasetFile:
    taxonomy: Taxonomy
    clips: tuple[ClipRecord, ...] = ()
    annotations: AnnotationArtifacts = field(default_factory=AnnotationArtifacts)
    schema_version: int = SCHEMA_VERSION

    def canonical(self) -> DatasetFile:
        """Same content with every collection in serialization order."""
        clips = tuple(
            ClipRecord(
                clip_id=c.clip_id,
                scenario=c.scenario,
                split=c.split,
                dynamic=DynamicGraph(
                    c.clip_id, tuple(canonicalize(g) for g in c.dynamic.graphs)
                ),
                narrations=c.narrations,
                summary=c.summary,
            )
            for c in sorted(self.clips, key=lambda c: c.clip_id)
        )
        ann = self.annotations
        annotations = AnnotationArtifacts(
            annotator_graphs=tuple(
                AnnotatorGraph(ag.annotator_id, canonicalize(ag.graph))
                for ag in sorted(
                    ann.annotator_graphs,
                    key=lambda ag: (ag.graph.clip_id, ag.graph.timestep, ag.annotator_id),
                )
            ),
            questions=tuple(sorted(ann.questions, key=lambda q: q.question_id)),
            answers=tuple(
                sorted(ann.answers, key=lambda a: (a.question_id, a.respondent_id))
            ),
            overrides={
                clip_id: _canonical_override(ov)
                for clip_id, ov in sorted(ann.overrides.items())
            },
        )
        return DatasetFile(
            taxonomy=self.taxonomy,
            clips=clips,
            annotations=annotations,
            schema_version=self.schema_version,
        )


def _canonical_override(ov: CorrespondenceOverride) -> CorrespondenceOverride:
    groups = tuple(sorted(tuple(sorted(group)) for group in ov.groups))
    splits = tuple(sorted(tuple(sorted(pair)) for pair in ov.splits))
    return CorrespondenceOverride(groups=groups, splits=splits)


# ---------------------------------------------------------------------------
# model -> jsonable


def _bbox_json(box: BBox | None):
    return None if box is None else [box.x, box.y, box.w, box.h]


def _grounding_json(g: Grounding) -> dict:
    return {"pre": _bbox_json(g.pre), "pnr": _bbox_json(g.pnr), "post": _bbox_json(g.post)}


def _frame_json(ref: FrameRef) -> dict:
    return {"frame": ref.frame, "time_sec": ref.time_sec, "uri": ref.uri}


def _node_json(node: Node) -> dict:
    if node.kind == NodeKind.CW:
        return {"kind": "cw"}
    if node.kind == NodeKind.VERB:
        return {"kind": "verb", "verb": node.verb}
    return {
        "kind": "object",
        "noun": node.noun,
        "instance_id": node.instance_id,
        "grounding": _grounding_json(node.grounding or Grounding()),
    }


def graph_to_jsonable(graph: ActionGraph) -> dict:
    return {
        "clip_id": graph.clip_id,
        "timestep": graph.timestep,
        "frames": {
            "pre": _frame_json(graph.frames.pre),
            "pnr": _frame_json(graph.frames.pnr),
            "post": _frame_json(graph.frames.post),
        },
        "nodes": [_node_json(n) for n in graph.nodes],
        "edges": [
            {"src": e.src, "dst": e.dst, "relation": e.relation} for e in graph.edges
        ],
        "provenance": {
            "kind": graph.provenance.kind.value,
            "annotator_id": graph.provenance.annotator_id,
            "grounding_sources": list(graph.provenance.grounding_sources),
        },
    }


def question_to_jsonable(q: ValidationQuestion) -> dict:
    return {
        "question_id": q.question_id,
        "kind": q.kind.value,
        "clip_id": q.clip_id,
        "timestep": q.timestep,
        "prompt": q.prompt,
        "options": list(q.options),
        "subject": list(q.subject),
    }


def answer_to_jsonable(a: Answer) -> dict:
    return {
        "question_id": a.question_id,
        "choice": a.choice,
        "respondent_id": a.respondent_id,
        "free_text": a.free_text,
    }


def override_to_jsonable(ov: CorrespondenceOverride) -> dict:
    return {
        "groups": [[[t, node_id] for t, node_id in group] for group in ov.groups],
        "splits": [[[a[0], a[1]], [b[0], b[1]]] for a, b in ov.splits],
    }


def dataset_to_jsonable(ds: DatasetFile) -> dict:
    ds = ds.canonical()
    return {
        "schema_version": ds.schema_version,
        "taxonomy": {
            "verbs": list(ds.taxonomy.verbs),
            "nouns": list(ds.taxonomy.nouns),
            "relations": list(ds.taxonomy.relations),
        },
        "clips": [
            {
                "clip_id": c.clip_id,
                "scenario": c.scenario,
                "split": c.split,
                "graphs": [graph_to_jsonable(g) for g in c.dynamic.graphs],
                "narrations": list(c.narrations),
                "summary": c.summary,
            }
            for c in ds.clips
        ],
        "annotations": {
            "annotator_graphs": [
                {"annotator_id": ag.annotator_id, "graph": graph_to_jsonable(ag.graph)}
                for ag in ds.annotations.annotator_graphs
            ],
            "questions": [question_to_jsonable(q) for q in ds.annotations.questions],
            "answers": [answer_to_jsonable(a) for a in ds.annotations.answers],
            "overrides": {
                clip_id: override_to_jsonable(ov)
                for clip_id, ov in ds.annotations.overrides.items()
            },
        },
    }


# ---------------------------------------------------------------------------
# jsonable -> model


def _bbox_from(obj) -> BBox | None:
    if obj is None:
        return None
    x, y, w, h = obj
    return BBox(x, y, w, h)


def _grounding_from(obj: dict) -> Grounding:
    return Grounding(
        pre=_bbox_from(obj["pre"]), pnr=_bbox_from(obj["pnr"]), post=_bbox_from(obj["post"])
    )


def _frame_from(obj: dict, clip_id: str) -> FrameRef:
    return FrameRef(
        clip_id=clip_id, frame=obj["frame"], time_sec=obj["time_sec"], uri=obj["uri"]
    )


def _node_from(obj: dict) -> Node:
    kind = obj["kind"]
    if kind == "cw":
        return Node.cw()
    if kind == "verb":
        return Node.verb_node(obj["verb"])
    return Node.object_node(
        obj["noun"], obj["instance_id"], grounding=_grounding_from(obj["grounding"])
    )


def graph_from_jsonable(obj: dict) -> ActionGraph:
    clip_id = obj["clip_id"]
    prov = obj["provenance"]
    return ActionGraph(
        clip_id=clip_id,
        timestep=obj["timestep"],
        frames=FrameTriplet(
            pre=_frame_from(obj["frames"]["pre"], clip_id),
            pnr=_frame_from(obj["frames"]["pnr"], clip_id),
            post=_frame_from(obj["frames"]["post"], clip_id),
        ),
        nodes=tuple(_node_from(n) for n in obj["nodes"]),
        edges=tuple(Edge(e["src"], e["dst"], e["relation"]) for e in obj["edges"]),
        provenance=Provenance(
            kind=ProvenanceKind(prov["kind"]),
            annotator_id=prov["annotator_id"],
            grounding_sources=tuple(prov["grounding_sources"]),
        ),
    )


def question_from_jsonable(obj: dict) -> ValidationQuestion:
    return ValidationQuestion(
        question_id=obj["question_id"],
        kind=QuestionKind(obj["kind"]),
        clip_id=obj["clip_id"],
        timestep=obj["timestep"],
        prompt=obj["prompt"],
        options=tuple(obj["options"]),
        subject=tuple(obj["subject"]),
    )


def answer_from_jsonable(obj: dict) -> Answer:
    return Answer(
        question_id=obj["question_id"],
        choice=obj["choice"],
        respondent_id=obj.get("respondent_id", ""),
        free_text=obj.get("free_text"),
    )


def override_from_jsonable(obj: dict) -> CorrespondenceOverride:
    return CorrespondenceOverride(
        groups=tuple(
            tuple((t, node_id) for t, node_id in group) for group in obj["groups"]
        ),
        splits=tuple(((a[0], a[1]), (b[0], b[1])) for a, b in obj["splits"]),
    )


def _schema() -> dict:
    text = (
        resources.files("easg_kit.formats")
        .joinpath("schemas/dataset.schema.v1.json")
        .read_text(encoding="utf-8")
    )
    return json.loads(text)


def dataset_from_jsonable(doc: dict) -> DatasetFile:
    """Build a DatasetFile from a parsed document, validating as we go."""
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: e.json_path)
    if errors:
        head = errors[0]
        raise SchemaError(f"document does not match schema at {head.json_path}: {head.message}")

    tax_doc = doc["taxonomy"]
    try:
        taxonomy = Taxonomy(
            verbs=tuple(tax_doc["verbs"]),
            nouns=tuple(tax_doc["nouns"]),
            relations=tuple(tax_doc["relations"]),
        )
    except Exception as exc:
        raise DatasetValidationError(f"bad taxonomy: {exc}") from exc

    problems: list[str] = []

    def check(graph: ActionGraph, where: str) -> None:
        report = validate_graph(graph, taxonomy)
        for v in report.violations:
            problems.append(f"{where}: {v.code} {v.message}")

    clips = []
    for i, clip_doc in enumerate(doc["clips"]):
        where = f"clips[{i}] ({clip_doc['clip_id']})"
        try:
            graphs = tuple(graph_from_jsonable(g) for g in clip_doc["graphs"])
            dynamic = DynamicGraph(clip_doc["clip_id"], graphs)
            clip = ClipRecord(
                clip_id=clip_doc["clip_id"],
                scenario=clip_doc["scenario"],
                split=clip_doc["split"],
                dynamic=dynamic,
                narrations=tuple(clip_doc["narrations"]),
                summary=clip_doc["summary"],
            )
        except (ValueError, KeyError) as exc:
            raise DatasetValidationError(f"{where}: {exc}") from exc
        for g in graphs:
            check(g, f"{where} t={g.timestep}")
        clips.append(clip)

    ann_doc = doc["annotations"]
    try:
        annotator_graphs = tuple(
            AnnotatorGraph(item["annotator_id"], graph_from_jsonable(item["graph"]))
            for item in ann_doc["annotator_graphs"]
        )
        questions = tuple(question_from_jsonable(q) for q in ann_doc["questions"])
        answers = tuple(answer_from_jsonable(a) for a in ann_doc["answers"])
        overrides = {
            clip_id: override_from_jsonable(ov) for clip_id, ov in ann_doc["overrides"].items()
        }
    except (ValueError, KeyError) as exc:
        raise DatasetValidationError(f"annotations: {exc}") from exc

    for ag in annotator_graphs:
        check(
            ag.graph,
            f"annotator_graphs ({ag.graph.clip_id} t={ag.graph.timestep} {ag.annotator_id})",
        )

    if problems:
        raise DatasetValidationError(
            "dataset contains invalid graphs:\n" + "\n".join(problems)
        )

    return DatasetFile(
        taxonomy=taxonomy,
        clips=tuple(clips),
        annotations=AnnotationArtifacts(
            annotator_graphs=annotator_graphs,
            questions=questions,
            answers=answers,
            overrides=overrides,
        ),
    )


# ---------------------------------------------------------------------------
# file I/O


def dumps_dataset(ds: DatasetFile) -> str:
    """Canonical text form: sorted keys, two-space indent, trailing newline."""
    return json.dumps(dataset_to_jsonable(ds), ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def loads_dataset(text: str) -> DatasetFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    return dataset_from_jsonable(doc)


def save_dataset(ds: DatasetFile, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_dataset(ds))


def load_dataset(path) -> DatasetFile:
    with open(path, encoding="utf-8") as fh:
        return loads_dataset(fh.read())
