"""Brute-force reference implementation of Recall@K used to cross-check
easg_kit.evaluation.

Written for clarity, not speed, and deliberately sharing no code with the
package: candidates are materialized as plain tuples, constraint reduction
and ranking are spelled out longhand.

Semantics being checked:
  - ground truth = the graph's edges minus the action edge (minus direct
    object edges too when include_direct_object is off)
  - a candidate is (src_slot, dst_slot, relation, src_class, dst_class);
    classes are "" for endpoints whose class is given by the task
  - score = rel * src_factor * dst_factor, multiplied in that order
  - constrained mode first reduces every component to its top-1 label
    (ties by taxonomy id, then label)
  - candidates are ranked by (-score, candidate tuple) and cut to top k
  - a GT edge is recalled when a kept candidate matches its slots, its
    relation, and every task-relevant class
"""

from __future__ import annotations

ACTION = "action"
DIRECT_OBJECT = "direct object"


def _argmax(scores, label_order):
    size = len(label_order)
    best_label = None
    best_key = None
    for label, score in scores.items():
        key = (-score, label_order.get(label, size), label)
        if best_key is None or key < best_key:
            best_key, best_label = key, label
    return best_label


def _order(labels):
    return {label: i for i, label in enumerate(labels)}


def oracle_recall(
    pred,
    gt,
    k,
    task,
    constrained,
    relations,
    nouns,
    verbs,
    include_direct_object=True,
):
    """Recall@k computed by exhaustive enumeration. ``task`` is one of
    "edge_cls" / "sg_cls" / "easg_cls"."""
    gt_edges = [e for e in gt.edges if e.relation != ACTION]
    if not include_direct_object:
        gt_edges = [e for e in gt_edges if e.relation != DIRECT_OBJECT]
    if not gt_edges:
        return 1.0

    kinds = {}
    classes = {}
    for node in gt.nodes:
        kinds[node.node_id] = node.kind.value
        if node.kind.value == "object":
            classes[node.node_id] = node.noun
        elif node.kind.value == "verb":
            classes[node.node_id] = node.verb

    rel_scores = {pair: dict(sc) for pair, sc in pred.relation_scores.items()}
    obj_scores = {slot: dict(sc) for slot, sc in pred.object_scores.items()}
    verb_scores = dict(pred.verb_scores)

    if constrained:
        rel_order = _order(relations)
        noun_order = _order(nouns)
        verb_order = _order(verbs)
        for pair in list(rel_scores):
            label = _argmax(rel_scores[pair], rel_order)
            rel_scores[pair] = {label: rel_scores[pair][label]} if label else {}
        for slot in list(obj_scores):
            label = _argmax(obj_scores[slot], noun_order)
            obj_scores[slot] = {label: obj_scores[slot][label]} if label else {}
        if verb_scores:
            label = _argmax(verb_scores, verb_order)
            verb_scores = {label: verb_scores[label]}

    def endpoint_options(slot):
        # -> list of (class label for the candidate tuple, factor or None)
        kind = kinds.get(slot)
        if task == "edge_cls":
            return [("", None)]
        if kind == "object":
            return [(label, score) for label, score in obj_scores.get(slot, {}).items()]
        if kind == "verb" and task == "easg_cls":
            return [(label, score) for label, score in verb_scores.items()]
        return [("", None)]

    candidates = []
    for (src, dst), sc in rel_scores.items():
        for rel, rel_score in sc.items():
            for src_class, src_factor in endpoint_options(src):
                for dst_class, dst_factor in endpoint_options(dst):
                    score = rel_score
                    if src_factor is not None:
                        score = score * src_factor
                    if dst_factor is not None:
                        score = score * dst_factor
                    candidates.append(
                        (score, (src, dst, rel, src_class, dst_class))
                    )

    candidates.sort(key=lambda item: (-item[0], item[1]))
    kept = [ident for _, ident in candidates[:k]]

    def matches(edge, ident):
        src, dst, rel, src_class, dst_class = ident
        if (src, dst, rel) != (edge.src, edge.dst, edge.relation):
            return False
        if task == "edge_cls":
            return True
        for slot, cand_class in ((src, src_class), (dst, dst_class)):
            kind = kinds.get(slot)
            if kind == "object":
                if cand_class != classes[slot]:
                    return False
            elif kind == "verb" and task == "easg_cls":
                if cand_class != classes[slot]:
                    return False
        return True

    recalled = 0
    for edge in gt_edges:
        if any(matches(edge, ident) for ident in kept):
            recalled += 1
    return recalled / len(gt_edges)
