"""Top-k accuracy for action anticipation."""

from __future__ import annotations

from typing import Iterable

from ..formats import ActionPrediction


def anticipation_topk(
    preds: ActionPrediction, gt: tuple[str, str], k: int = 5
) -> tuple[int, int, int]:
    """(verb_hit, noun_hit, action_hit) within the first ``k`` predictions.

    The action hit requires one single pair to match both components; verb
    and noun hits may come from different pairs.
    """
    if k < 1:
        raise ValueError("k must be positive")
    verb, noun = gt
    window = preds.pairs[:k]
    verb_hit = int(any(p[0] == verb for p in window))
    noun_hit = int(any(p[1] == noun for p in window))
    action_hit = int((verb, noun) in window)
    return verb_hit, noun_hit, action_hit


def anticipation_accuracy(
    cases: Iterable[tuple[ActionPrediction, tuple[str, str]]], k: int = 5
) -> dict[str, float]:
    """Aggregate verb/noun/action top-k accuracy over (prediction, gt) cases."""
    totals = [0, 0, 0]
    count = 0
    for preds, gt in cases:
        hits = anticipation_topk(preds, gt, k)
        for i in range(3):
            totals[i] += hits[i]
        count += 1
    if count == 0:
        raise ValueError("need at least one case")
    return {
        "verb": totals[0] / count,
        "noun": totals[1] / count,
        "action": totals[2] / count,
    }
