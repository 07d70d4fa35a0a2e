"""Scored predictions for the generation tasks, plus JSONL file I/O."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from ..core import ActionGraph

SlotPair = tuple[str, str]


class PredictionError(ValueError):
    """Malformed prediction content."""


class SlotAlignmentError(PredictionError):
    """Prediction references a slot the ground-truth graph does not have."""


def _check_scores(scores: dict, what: str) -> None:
    for label, score in scores.items():
        if not isinstance(label, str) or not label:
            raise PredictionError(f"{what}: labels must be non-empty strings")
        if not math.isfinite(score):
            raise PredictionError(f"{what}: score for {label!r} is not finite")


@dataclass(frozen=True)
class PredictionSet:
    """Per-graph scores: relations per ordered slot pair, object classes per
    object slot, verb classes per graph.

    Slots name ground-truth nodes ("verb", "obj:0", ...). Dict keys make the
    per-slot uniqueness invariant structural; scores must be finite.
    """

    clip_id: str
    timestep: int
    relation_scores: dict[SlotPair, dict[str, float]] = field(default_factory=dict)
    object_scores: dict[str, dict[str, float]] = field(default_factory=dict)
    verb_scores: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for pair, scores in self.relation_scores.items():
            if len(pair) != 2 or not all(isinstance(s, str) and s for s in pair):
                raise PredictionError(f"bad slot pair {pair!r}")
            _check_scores(scores, f"relations {pair}")
        for slot, scores in self.object_scores.items():
            if not isinstance(slot, str) or not slot:
                raise PredictionError(f"bad object slot {slot!r}")
            _check_scores(scores, f"objects {slot}")
        _check_scores(self.verb_scores, "verbs")

    def check_alignment(self, gt: ActionGraph) -> None:
        """Raise SlotAlignmentError when a slot is absent from ``gt``."""
        known = {node.node_id for node in gt.nodes}
        for src, dst in self.relation_scores:
            for slot in (src, dst):
                if slot not in known:
                    raise SlotAlignmentError(
                        f"relation pair references unknown slot {slot!r}"
                    )
        object_slots = {n.node_id for n in gt.object_nodes}
        for slot in self.object_scores:
            if slot not in object_slots:
                raise SlotAlignmentError(f"object scores for non-object slot {slot!r}")


def prediction_to_jsonable(pred: PredictionSet) -> dict:
    return {
        "clip_id": pred.clip_id,
        "timestep": pred.timestep,
        "relations": [
            {"src": src, "dst": dst, "scores": dict(scores)}
            for (src, dst), scores in sorted(pred.relation_scores.items())
        ],
        "objects": [
            {"slot": slot, "scores": dict(scores)}
            for slot, scores in sorted(pred.object_scores.items())
        ],
        "verbs": dict(pred.verb_scores),
    }


def prediction_from_jsonable(doc: dict) -> PredictionSet:
    try:
        relations = {}
        for item in doc.get("relations", ()):
            pair = (item["src"], item["dst"])
            if pair in relations:
                raise PredictionError(f"duplicate relation pair {pair}")
            relations[pair] = {str(k): float(v) for k, v in item["scores"].items()}
        objects = {}
        for item in doc.get("objects", ()):
            slot = item["slot"]
            if slot in objects:
                raise PredictionError(f"duplicate object slot {slot!r}")
            objects[slot] = {str(k): float(v) for k, v in item["scores"].items()}
        verbs = {str(k): float(v) for k, v in doc.get("verbs", {}).items()}
        return PredictionSet(
            clip_id=doc["clip_id"],
            timestep=int(doc["timestep"]),
            relation_scores=relations,
            object_scores=objects,
            verb_scores=verbs,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, PredictionError):
            raise
        raise PredictionError(f"bad prediction record: {exc}") from exc


def save_predictions(preds, path) -> None:
    """One JSON record per line, ordered by (clip_id, timestep)."""
    records = sorted(preds, key=lambda p: (p.clip_id, p.timestep))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pred in records:
            fh.write(json.dumps(prediction_to_jsonable(pred), sort_keys=True))
            fh.write("\n")


def load_predictions(path) -> list[PredictionSet]:
    out: list[PredictionSet] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise PredictionError(f"line {lineno}: not valid JSON: {exc}") from exc
            out.append(prediction_from_jsonable(doc))
    return out
