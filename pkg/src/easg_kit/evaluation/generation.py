"""Recall@K for the three generation tasks, plus the random baseline.

Candidate model: ground truth is the graph's edge set minus the structurally
constant action edge (direct-object edges optionally excluded). For every
predicted slot pair, candidate triplets combine one relation with one class
choice per endpoint whose class the task treats as unknown (object slots for
SG/EASG, the verb slot for EASG). A candidate's score is the product
rel * src_factor * dst_factor, multiplied in that order so results are
bit-reproducible. Candidates are ranked by (-score, identity tuple) and cut
to the top k; a GT edge counts as recalled when a kept candidate matches its
slots, relation, and every task-relevant class.

The With-Constraint regime first reduces each component to its single best
label, so it ranks at most one candidate per slot pair.
"""

from __future__ import annotations

from enum import Enum
from typing import Iterable, Sequence

import random

from ..core import ACTION, DIRECT_OBJECT, ActionGraph, NodeKind, Taxonomy, default_taxonomy
from .predictions import PredictionSet

KS_DEFAULT = (10, 20, 50)


class Task(str, Enum):
    EDGE_CLS = "edge_cls"
    SG_CLS = "sg_cls"
    EASG_CLS = "easg_cls"


REGIMES = ("with_constraint", "no_constraint")


def _argmax(scores: dict[str, float], order: dict[str, int]) -> str | None:
    size = len(order)
    best_label, best_key = None, None
    for label, score in scores.items():
        key = (-score, order.get(label, size), label)
        if best_key is None or key < best_key:
            best_key, best_label = key, label
    return best_label


def apply_constraint(pred: PredictionSet, taxonomy: Taxonomy | None = None) -> PredictionSet:
    """Keep only the top-scoring label per component (ties by taxonomy id,
    then label). Idempotent."""
    tax = taxonomy if taxonomy is not None else default_taxonomy()
    rel_order = (
        {label: i for i, label in enumerate(tax.relations)} if pred.relation_scores else {}
    )
    noun_order = (
        {label: i for i, label in enumerate(tax.nouns)} if pred.object_scores else {}
    )
    verb_order = (
        {label: i for i, label in enumerate(tax.verbs)} if pred.verb_scores else {}
    )

    def top1(scores: dict[str, float], order: dict[str, int]) -> dict[str, float]:
        label = _argmax(scores, order)
        return {label: scores[label]} if label is not None else {}

    return PredictionSet(
        clip_id=pred.clip_id,
        timestep=pred.timestep,
        relation_scores={
            pair: top1(scores, rel_order) for pair, scores in pred.relation_scores.items()
        },
        object_scores={
            slot: top1(scores, noun_order) for slot, scores in pred.object_scores.items()
        },
        verb_scores=top1(pred.verb_scores, verb_order),
    )


def _gt_edges(gt: ActionGraph, include_direct_object: bool):
    edges = [e for e in gt.edges if e.relation != ACTION]
    if not include_direct_object:
        edges = [e for e in edges if e.relation != DIRECT_OBJECT]
    return edges


def _first_match_ranks(
    pred: PredictionSet,
    gt: ActionGraph,
    task: Task,
    constrained: bool,
    include_direct_object: bool,
    taxonomy: Taxonomy | None,
) -> tuple[list[int | None], int]:
    """Rank (1-based) at which each GT edge is first recalled, or None."""
    task = Task(task)
    pred.check_alignment(gt)
    if constrained:
        pred = apply_constraint(pred, taxonomy)

    edges = _gt_edges(gt, include_direct_object)
    if not edges:
        return [], 0

    kinds: dict[str, str] = {}
    classes: dict[str, str] = {}
    for node in gt.nodes:
        kinds[node.node_id] = node.kind.value
        if node.kind == NodeKind.OBJECT:
            classes[node.node_id] = node.noun or ""
        elif node.kind == NodeKind.VERB:
            classes[node.node_id] = node.verb or ""

    def endpoint_options(slot: str):
        kind = kinds.get(slot)
        if task == Task.EDGE_CLS:
            return (("", None),)
        if kind == "object":
            return tuple(pred.object_scores.get(slot, {}).items())
        if kind == "verb" and task == Task.EASG_CLS:
            return tuple(pred.verb_scores.items())
        return (("", None),)

    candidates: list[tuple[float, tuple[str, str, str, str, str]]] = []
    for (src, dst), scores in pred.relation_scores.items():
        src_options = endpoint_options(src)
        dst_options = endpoint_options(dst)
        for rel, rel_score in scores.items():
            for src_class, src_factor in src_options:
                for dst_class, dst_factor in dst_options:
                    score = rel_score
                    if src_factor is not None:
                        score = score * src_factor
                    if dst_factor is not None:
                        score = score * dst_factor
                    candidates.append((score, (src, dst, rel, src_class, dst_class)))
    candidates.sort(key=lambda item: (-item[0], item[1]))

    def matches(edge, ident) -> bool:
        src, dst, rel, src_class, dst_class = ident
        if (src, dst, rel) != (edge.src, edge.dst, edge.relation):
            return False
        if task == Task.EDGE_CLS:
            return True
        for slot, cand_class in ((src, src_class), (dst, dst_class)):
            kind = kinds.get(slot)
            if kind == "object" and cand_class != classes[slot]:
                return False
            if kind == "verb" and task == Task.EASG_CLS and cand_class != classes[slot]:
                return False
        return True

    ranks: list[int | None] = [None] * len(edges)
    pending = set(range(len(edges)))
    for rank, (_, ident) in enumerate(candidates, start=1):
        if not pending:
            break
        for i in list(pending):
            if matches(edges[i], ident):
                ranks[i] = rank
                pending.discard(i)
    return ranks, len(edges)


def recall_at_k(
    pred: PredictionSet,
    gt: ActionGraph,
    k: int,
    task: Task = Task.EDGE_CLS,
    constrained: bool = False,
    *,
    include_direct_object: bool = True,
    taxonomy: Taxonomy | None = None,
) -> float:
    """Fraction of GT triplets found in the top-k ranked candidates.

    A graph whose filtered GT edge set is empty scores 1.0 (nothing to
    recall). Slot misalignment raises SlotAlignmentError.
    """
    if k < 1:
        raise ValueError("k must be positive")
    ranks, total = _first_match_ranks(
        pred, gt, task, constrained, include_direct_object, taxonomy
    )
    if total == 0:
        return 1.0
    return sum(1 for r in ranks if r is not None and r <= k) / total


def evaluate_generation(
    pairs: Sequence[tuple[PredictionSet, ActionGraph]],
    *,
    tasks: Iterable[Task] = (Task.EDGE_CLS, Task.SG_CLS, Task.EASG_CLS),
    ks: Sequence[int] = KS_DEFAULT,
    include_direct_object: bool = True,
    taxonomy: Taxonomy | None = None,
    micro: bool = False,
) -> dict:
    """R@K table over (prediction, ground truth) pairs.

    Macro averaging (default) means per-graph recalls averaged unweighted;
    micro pools matched/total counts across graphs.
    """
    pairs = list(pairs)
    for pred, gt in pairs:
        if (pred.clip_id, pred.timestep) != (gt.clip_id, gt.timestep):
            raise ValueError(
                f"prediction for ({pred.clip_id!r}, {pred.timestep}) paired with "
                f"graph ({gt.clip_id!r}, {gt.timestep})"
            )
    report: dict = {}
    for task in tasks:
        task = Task(task)
        report[task.value] = {}
        for regime, constrained in (("with_constraint", True), ("no_constraint", False)):
            per_k_matched = {k: 0.0 for k in ks}
            per_k_total = {k: 0.0 for k in ks}
            for pred, gt in pairs:
                ranks, total = _first_match_ranks(
                    pred, gt, task, constrained, include_direct_object, taxonomy
                )
                for k in ks:
                    matched = sum(1 for r in ranks if r is not None and r <= k)
                    if micro:
                        per_k_matched[k] += matched
                        per_k_total[k] += total
                    else:
                        per_k_matched[k] += matched / total if total else 1.0
                        per_k_total[k] += 1.0
            report[task.value][regime] = {
                k: (per_k_matched[k] / per_k_total[k] if per_k_total[k] else 0.0)
                for k in ks
            }
    return report


def random_baseline(
    graphs: Sequence[ActionGraph],
    *,
    seed: int,
    trials: int,
    tasks: Iterable[Task] = (Task.EDGE_CLS,),
    ks: Sequence[int] = KS_DEFAULT,
    include_direct_object: bool = True,
    taxonomy: Taxonomy | None = None,
) -> dict:
    """Monte-Carlo R@K under uniform random scores, averaged over trials.

    Every trial draws a fresh uniform score for each taxonomy label a task
    consumes (relations per GT pair; nouns per object slot and verbs only
    when a class-predicting task is requested). Deterministic given
    (seed, trials). Beware that class-predicting tasks enumerate
    |relations| * |nouns|^2 candidates per pair, so large taxonomies make
    the No-Constraint regime expensive.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    graphs = list(graphs)
    if not graphs:
        raise ValueError("need at least one graph")
    tasks = tuple(Task(t) for t in tasks)
    tax = taxonomy if taxonomy is not None else default_taxonomy()
    need_objects = any(t in (Task.SG_CLS, Task.EASG_CLS) for t in tasks)
    need_verbs = Task.EASG_CLS in tasks
    rng = random.Random(seed)

    sums: dict = {
        task.value: {regime: {k: 0.0 for k in ks} for regime in REGIMES} for task in tasks
    }
    count = trials * len(graphs)
    for _ in range(trials):
        for gt in graphs:
            relation_scores = {}
            for edge in _gt_edges(gt, include_direct_object):
                pair = (edge.src, edge.dst)
                if pair not in relation_scores:
                    relation_scores[pair] = {
                        rel: rng.random() for rel in tax.relations
                    }
            object_scores = {}
            if need_objects:
                for node in gt.object_nodes:
                    object_scores[node.node_id] = {
                        noun: rng.random() for noun in tax.nouns
                    }
            verb_scores = (
                {verb: rng.random() for verb in tax.verbs} if need_verbs else {}
            )
            pred = PredictionSet(
                clip_id=gt.clip_id,
                timestep=gt.timestep,
                relation_scores=relation_scores,
                object_scores=object_scores,
                verb_scores=verb_scores,
            )
            for task in tasks:
                for regime, constrained in (
                    ("with_constraint", True),
                    ("no_constraint", False),
                ):
                    ranks, total = _first_match_ranks(
                        pred, gt, task, constrained, include_direct_object, tax
                    )
                    for k in ks:
                        matched = sum(1 for r in ranks if r is not None and r <= k)
                        recall = matched / total if total else 1.0
                        sums[task.value][regime][k] += recall
    return {
        task: {
            regime: {k: value / count for k, value in by_k.items()}
            for regime, by_k in by_regime.items()
        }
        for task, by_regime in sums.items()
    }


def render_recall_table(report: dict, ks: Sequence[int] = KS_DEFAULT) -> str:
    """Aligned plain-text table; values rendered *100 with one decimal."""
    header = ["task", "regime"] + [f"R@{k}" for k in ks]
    rows = [header]
    for task, by_regime in report.items():
        for regime, by_k in by_regime.items():
            rows.append(
                [task, regime] + [f"{100.0 * by_k[k]:.1f}" for k in ks if k in by_k]
            )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines)
