"""Prompt construction for anticipation and summarization, and completion
parsing.

System prompts and one-shot examples are fixed strings; builders only render
the query sequence, so equal inputs produce byte-identical prompts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from ..core import ActionGraph, direct_objects
from .text import parse_triplet_string, to_sentence, to_triplet_string

ANTICIPATION_LENGTHS = (5, 20)
SUMMARIZATION_MIN_LENGTH = 5
MAX_PREDICTIONS = 5


class PromptError(ValueError):
    """Raised when a sequence cannot be turned into a prompt."""


class PromptMode(str, Enum):
    EASG = "easg"
    VN = "vn"
    NARRATION = "narration"


class OutputKind(str, Enum):
    GRAPH_PREDICTION = "graph_prediction"
    ACTION_PREDICTION = "action_prediction"
    SUMMARY = "summary"


@dataclass(frozen=True)
class Prompt:
    system_text: str
    user_text: str
    expected_output_kind: OutputKind

    def __post_init__(self) -> None:
        if not self.system_text or not self.user_text:
            raise ValueError("prompts need non-empty system and user text")


@dataclass(frozen=True)
class ActionPrediction:
    """Ranked (verb, noun) pairs, at most MAX_PREDICTIONS of them."""

    pairs: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if len(self.pairs) > MAX_PREDICTIONS:
            raise ValueError(f"at most {MAX_PREDICTIONS} predictions allowed")
        if len(set(self.pairs)) != len(self.pairs):
            raise ValueError("predictions must be distinct")

    def hit_at(self, k: int, truth: tuple[str, str]) -> bool:
        return truth in self.pairs[:k]


ANTICIPATION_SYSTEM_EASG = (
    "You are an assistant which models human behaviour very well. "
    "You'll be provided with a sequence of graphs (1..N-1) describing the actions "
    "retrieved from a first-person view video. "
    "Your task is to predict the next graph (N)."
)

ANTICIPATION_SYSTEM_VN = (
    "You are an assistant which models human behaviour very well. "
    "You'll be provided with a sequence of verb-noun pairs (1..N-1) describing the "
    "actions retrieved from a first-person view video. "
    "Your task is to predict the next action (N)."
)

SUMMARIZATION_SYSTEM_EASG = (
    "You are an assistant who can model human behaviour very well. "
    "You'll be provided with a sequence of actions retrieved from a first-person "
    "view video. Your task is to understand the general activity and describe it "
    "in one sentence. Please, provide a very general summary and try to avoid "
    'listing all the "atomic" activities.'
)

SUMMARIZATION_SYSTEM_VN = (
    "You are an assistant which can model human behaviour very well. "
    "You'll be provided with a sequence of verb-noun pairs describing the actions "
    "retrieved from a first-person view video. Your task is to understand the "
    "general activity and describe it in one sentence. Please, provide a very "
    'general summary and try to avoid listing all the "atomic" activities.'
)

ANTICIPATION_EXAMPLE_EASG = """Example:
Graph 1: Camera wearer - verb - take; take - direct object - flour; take - from - package; take - with - right hand
Graph 2: Camera wearer - verb - add; add - direct object - flour; add - to - bowl; bowl - with - dough; add - with - right hand
Graph 3: Camera wearer - verb - press; press - direct object - dough; press - with - both hands
Graph 4: Camera wearer - verb - move; move - direct object - dough; move - from - bowl; move - to - scale
Graph 5: Camera wearer - verb - move; move - direct object - dough; move - from - bowl; move - to - scale
Prediction:
Graph 6: Camera wearer - verb - remove; remove - direct object - dough; remove - from - scale; remove - to - bowl"""

ANTICIPATION_EXAMPLE_VN = """Example:
Action 1: take flour
Action 2: add flour
Action 3: press dough
Action 4: move dough
Action 5: put dough
Prediction:
Action 6: remove dough"""

SUMMARIZATION_EXAMPLE_EASG = """Example:
Action 1: Camera wearer pick up hose
Action 2: Camera wearer point hose towards car
Action 3: Camera wearer spray car with water hose
Action 4: Camera wearer wash car
Action 5: Camera wearer raise wiper
Action 6: Camera wearer wash car
Action 7: Camera wearer push down wiper
Summary:
Camera wearer is washing and cleaning a car with a water hose and wiper."""

SUMMARIZATION_EXAMPLE_VN = """Example:
Action 1: pick up hose
Action 2: point hose
Action 3: spray car
Action 4: wash car
Action 5: raise wiper
Action 6: wash car
Action 7: push down wiper
Summary:
Camera wearer is washing and cleaning a car with a water hose and wiper."""

_SUBJECT = "Camera wearer"


def _verb_noun(graph: ActionGraph) -> tuple[str, str]:
    dobjs = direct_objects(graph)
    if not dobjs:
        raise PromptError(f"graph t={graph.timestep} has no direct object")
    return graph.verb or "", dobjs[0].noun or ""


def build_anticipation_prompt(seq, mode: PromptMode = PromptMode.EASG) -> Prompt:
    """One-shot anticipation prompt over an observed sequence of graphs.

    The observed window must have one of the supported lengths; the model is
    asked for the next step.
    """
    graphs = list(seq)
    if len(graphs) not in ANTICIPATION_LENGTHS:
        raise PromptError(
            f"anticipation takes a sequence of length {ANTICIPATION_LENGTHS}, "
            f"got {len(graphs)}"
        )
    mode = PromptMode(mode)
    if mode == PromptMode.EASG:
        lines = [
            f"Graph {i}: {to_triplet_string(g, subject_token=_SUBJECT)}"
            for i, g in enumerate(graphs, start=1)
        ]
        user = "\n".join(
            [ANTICIPATION_EXAMPLE_EASG, "", *lines, "Prediction:", f"Graph {len(graphs) + 1}:"]
        )
        return Prompt(ANTICIPATION_SYSTEM_EASG, user, OutputKind.GRAPH_PREDICTION)
    if mode == PromptMode.VN:
        lines = []
        for i, g in enumerate(graphs, start=1):
            verb, noun = _verb_noun(g)
            lines.append(f"Action {i}: {verb} {noun}")
        user = "\n".join(
            [ANTICIPATION_EXAMPLE_VN, "", *lines, "Prediction:", f"Action {len(graphs) + 1}:"]
        )
        return Prompt(ANTICIPATION_SYSTEM_VN, user, OutputKind.ACTION_PREDICTION)
    raise PromptError(f"anticipation does not support mode {mode.value!r}")


def build_summarization_prompt(seq, mode: PromptMode = PromptMode.EASG) -> Prompt:
    """One-shot summarization prompt over a whole clip.

    ``seq`` holds graphs in EASG and VN modes, raw narration strings in
    NARRATION mode. Clips shorter than SUMMARIZATION_MIN_LENGTH are rejected.
    """
    items = list(seq)
    if len(items) < SUMMARIZATION_MIN_LENGTH:
        raise PromptError(
            f"summarization needs at least {SUMMARIZATION_MIN_LENGTH} actions, "
            f"got {len(items)}"
        )
    mode = PromptMode(mode)
    if mode == PromptMode.EASG:
        lines = [
            f"Action {i}: {to_sentence(g, subject=_SUBJECT)}"
            for i, g in enumerate(items, start=1)
        ]
        system = SUMMARIZATION_SYSTEM_EASG
        example = SUMMARIZATION_EXAMPLE_EASG
    elif mode == PromptMode.VN:
        lines = []
        for i, g in enumerate(items, start=1):
            verb, noun = _verb_noun(g)
            lines.append(f"Action {i}: {verb} {noun}")
        system = SUMMARIZATION_SYSTEM_VN
        example = SUMMARIZATION_EXAMPLE_VN
    else:
        lines = [f"Action {i}: {text}" for i, text in enumerate(items, start=1)]
        system = SUMMARIZATION_SYSTEM_EASG
        example = SUMMARIZATION_EXAMPLE_EASG
    user = "\n".join([example, "", *lines, "Summary:"])
    return Prompt(system, user, OutputKind.SUMMARY)


_GRAPH_LINE = re.compile(r"graph\s*\d*\s*:(.+)", re.IGNORECASE)
_ACTION_LINE = re.compile(r"action\s*\d*\s*:\s*(.+)", re.IGNORECASE)


def parse_action_predictions(completion: str, n: int = MAX_PREDICTIONS) -> ActionPrediction:
    """Extract up to ``n`` ranked (verb, noun) pairs from a model completion.

    Accepts both graph-format completions (verb node and direct-object noun
    are read from each predicted graph) and ``Action N: verb noun`` lines.
    Unparseable content yields an empty prediction, never an error.
    """
    pairs: list[tuple[str, str]] = []

    def push(verb: str, noun: str) -> None:
        pair = (verb.strip(), noun.strip())
        if all(pair) and pair not in pairs:
            pairs.append(pair)

    for line in completion.splitlines():
        line = line.strip()
        graph_m = _GRAPH_LINE.search(line)
        if graph_m:
            try:
                g = parse_triplet_string(graph_m.group(1))
            except ValueError:
                continue
            dobjs = direct_objects(g)
            if g.verb and dobjs:
                push(g.verb, dobjs[0].noun or "")
            continue
        action_m = _ACTION_LINE.match(line)
        if action_m:
            words = action_m.group(1).split()
            if len(words) >= 2:
                push(words[0], " ".join(words[1:]))
    return ActionPrediction(pairs=tuple(pairs[:n]))
