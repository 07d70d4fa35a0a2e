"""Recall@K against the longhand enumerator, plus ordering, constraint,
baseline, and prediction-file checks."""

from __future__ import annotations

import math
import random

import pytest

from easg_kit.core import (
    FrameRef,
    FrameTriplet,
    Grounding,
    SeedAnnotation,
    add_object_node,
    default_taxonomy,
    init_graph,
)
from easg_kit.evaluation import (
    PredictionError,
    PredictionSet,
    SlotAlignmentError,
    Task,
    apply_constraint,
    evaluate_generation,
    load_predictions,
    random_baseline,
    recall_at_k,
    render_recall_table,
    save_predictions,
)
from eval_instances import TAX, banded_instance, random_instance
from recall_oracle import oracle_recall

KS = (10, 20, 50)


def oracle(pred, g, k, task, constrained, include_direct_object=True):
    return oracle_recall(
        pred,
        g,
        k,
        Task(task).value,
        constrained,
        TAX.relations,
        TAX.nouns,
        TAX.verbs,
        include_direct_object,
    )


def plain_frames(clip_id: str) -> FrameTriplet:
    return FrameTriplet(
        FrameRef(clip_id, 0, time_sec=0.0),
        FrameRef(clip_id, 1, time_sec=1.0),
        FrameRef(clip_id, 2, time_sec=2.0),
    )


def tiny_graph(clip_id: str = "clip-eval", verb: str = "wash", noun: str = "car"):
    """Graph with the mandatory edges only: action plus one direct object."""
    seed = SeedAnnotation(
        clip_id=clip_id,
        timestep=1,
        frames=plain_frames(clip_id),
        verb=verb,
        noun=noun,
        box_object=Grounding(),
    )
    return init_graph(seed, TAX)


class TestOracleEquivalence:
    def test_random_instances_match_oracle_exactly(self):
        rng = random.Random(2024)
        for i in range(120):
            pred, g = random_instance(rng, grid=i % 2 == 0)
            for task in Task:
                for constrained in (False, True):
                    for k in KS:
                        got = recall_at_k(pred, g, k, task, constrained, taxonomy=TAX)
                        assert got == oracle(pred, g, k, task, constrained)

    def test_banded_instances_match_oracle(self):
        rng = random.Random(31)
        for _ in range(60):
            pred, g = banded_instance(rng)
            for task in Task:
                for constrained in (False, True):
                    got = recall_at_k(pred, g, 10, task, constrained, taxonomy=TAX)
                    assert got == oracle(pred, g, 10, task, constrained)

    def test_parity_without_direct_object_edges(self):
        rng = random.Random(7)
        for _ in range(40):
            pred, g = random_instance(rng)
            for task in Task:
                got = recall_at_k(
                    pred, g, 20, task, False,
                    include_direct_object=False, taxonomy=TAX,
                )
                assert got == oracle(
                    pred, g, 20, task, False, include_direct_object=False
                )


class TestOrderings:
    def test_monotone_in_k_and_bounded(self):
        rng = random.Random(99)
        for i in range(150):
            pred, g = random_instance(rng, grid=i % 3 == 0)
            for task in Task:
                for constrained in (False, True):
                    r10, r20, r50 = (
                        recall_at_k(pred, g, k, task, constrained, taxonomy=TAX)
                        for k in KS
                    )
                    assert 0.0 <= r10 <= r20 <= r50 <= 1.0

    def test_no_constraint_dominates_on_banded_instances(self):
        rng = random.Random(2468)
        for _ in range(200):
            pred, g = banded_instance(rng)
            for task in Task:
                for k in KS:
                    nc = recall_at_k(pred, g, k, task, False, taxonomy=TAX)
                    wc = recall_at_k(pred, g, k, task, True, taxonomy=TAX)
                    assert nc >= wc

    def test_constrained_regime_saturates_when_candidates_fit(self):
        # Top-1 truncation leaves one candidate per scored pair and these
        # instances score at most 5 pairs, so every k >= 10 already sees
        # the whole constrained ranking.
        rng = random.Random(5)
        for _ in range(50):
            pred, g = banded_instance(rng)
            assert len(pred.relation_scores) <= 10
            for task in Task:
                r10, r20, r50 = (
                    recall_at_k(pred, g, k, task, True, taxonomy=TAX) for k in KS
                )
                assert r10 == r20 == r50


class TestApplyConstraint:
    def test_keeps_top_label_per_component(self):
        pred = PredictionSet(
            clip_id="clip-eval",
            timestep=1,
            relation_scores={("verb", "obj:0"): {"with": 0.9, "on": 0.4}},
            object_scores={"obj:0": {"car": 0.2, "bowl": 0.7}},
            verb_scores={"wash": 0.6, "take": 0.5},
        )
        top = apply_constraint(pred, TAX)
        assert top.relation_scores == {("verb", "obj:0"): {"with": 0.9}}
        assert top.object_scores == {"obj:0": {"bowl": 0.7}}
        assert top.verb_scores == {"wash": 0.6}

    def test_ties_break_by_taxonomy_order(self):
        pred = PredictionSet(
            clip_id="clip-eval",
            timestep=1,
            relation_scores={("verb", "obj:0"): {"on": 0.5, "from": 0.5}},
        )
        top = apply_constraint(pred, TAX)
        # "from" precedes "on" in the taxonomy's relation list.
        assert top.relation_scores == {("verb", "obj:0"): {"from": 0.5}}

    def test_idempotent(self):
        rng = random.Random(13)
        for i in range(40):
            pred, _ = random_instance(rng, grid=i % 2 == 0)
            once = apply_constraint(pred, TAX)
            assert apply_constraint(once, TAX) == once

    def test_empty_components_stay_empty(self):
        pred = PredictionSet(
            clip_id="clip-eval",
            timestep=1,
            relation_scores={("verb", "obj:0"): {}},
        )
        top = apply_constraint(pred, TAX)
        assert top.relation_scores == {("verb", "obj:0"): {}}
        assert top.object_scores == {}
        assert top.verb_scores == {}


class TestEdgeCases:
    def test_empty_predictions_score_zero(self):
        g = tiny_graph()
        pred = PredictionSet(clip_id=g.clip_id, timestep=g.timestep)
        for task in Task:
            for constrained in (False, True):
                assert recall_at_k(pred, g, 10, task, constrained, taxonomy=TAX) == 0.0

    def test_empty_ground_truth_scores_one(self):
        # With direct-object edges excluded the only edge left out is the
        # action edge, so there is nothing to recall.
        g = tiny_graph()
        pred = PredictionSet(clip_id=g.clip_id, timestep=g.timestep)
        got = recall_at_k(
            pred, g, 10, Task.EDGE_CLS, False,
            include_direct_object=False, taxonomy=TAX,
        )
        assert got == 1.0
        assert got == oracle(
            pred, g, 10, Task.EDGE_CLS, False, include_direct_object=False
        )

    def test_k_must_be_positive(self):
        g = tiny_graph()
        pred = PredictionSet(clip_id=g.clip_id, timestep=g.timestep)
        with pytest.raises(ValueError, match="k must be positive"):
            recall_at_k(pred, g, 0, taxonomy=TAX)

    def test_unknown_relation_slot_raises(self):
        g = tiny_graph()
        pred = PredictionSet(
            clip_id=g.clip_id,
            timestep=g.timestep,
            relation_scores={("verb", "obj:9"): {"with": 0.5}},
        )
        with pytest.raises(SlotAlignmentError, match="obj:9"):
            recall_at_k(pred, g, 10, taxonomy=TAX)

    def test_object_scores_must_name_object_slots(self):
        g = tiny_graph()
        pred = PredictionSet(
            clip_id=g.clip_id,
            timestep=g.timestep,
            object_scores={"verb": {"car": 1.0}},
        )
        with pytest.raises(SlotAlignmentError, match="verb"):
            recall_at_k(pred, g, 10, taxonomy=TAX)

    def test_scores_must_be_finite(self):
        with pytest.raises(PredictionError):
            PredictionSet(
                clip_id="clip-eval",
                timestep=1,
                verb_scores={"wash": math.nan},
            )


class TestEvaluateGeneration:
    def two_graph_pairs(self):
        """First graph fully recalled; second (3 GT edges) fully missed."""
        g1 = tiny_graph("clip-a")
        p1 = PredictionSet(
            clip_id="clip-a",
            timestep=1,
            relation_scores={("verb", "obj:0"): {"direct object": 0.9}},
        )
        g2 = tiny_graph("clip-b")
        g2 = add_object_node(g2, "sponge", Grounding(), "verb", "with", TAX)
        g2 = add_object_node(g2, "bowl", Grounding(), "verb", "from", TAX)
        p2 = PredictionSet(clip_id="clip-b", timestep=1)
        return [(p1, g1), (p2, g2)]

    def test_macro_vs_micro(self):
        pairs = self.two_graph_pairs()
        macro = evaluate_generation(pairs, tasks=(Task.EDGE_CLS,), ks=(10,), taxonomy=TAX)
        micro = evaluate_generation(
            pairs, tasks=(Task.EDGE_CLS,), ks=(10,), taxonomy=TAX, micro=True
        )
        assert macro["edge_cls"]["no_constraint"][10] == 0.5
        assert micro["edge_cls"]["no_constraint"][10] == 0.25

    def test_mismatched_pairing_raises(self):
        g = tiny_graph("clip-a")
        pred = PredictionSet(clip_id="clip-b", timestep=1)
        with pytest.raises(ValueError, match="paired with"):
            evaluate_generation([(pred, g)], taxonomy=TAX)

    def test_report_covers_tasks_regimes_and_ks(self):
        rng = random.Random(55)
        pairs = [random_instance(rng) for _ in range(5)]
        report = evaluate_generation(pairs, taxonomy=TAX)
        assert set(report) == {"edge_cls", "sg_cls", "easg_cls"}
        for by_regime in report.values():
            assert set(by_regime) == {"with_constraint", "no_constraint"}
            for by_k in by_regime.values():
                assert set(by_k) == {10, 20, 50}

    def test_render_table(self):
        report = {
            "edge_cls": {
                "with_constraint": {10: 0.604, 20: 0.604, 50: 0.604},
                "no_constraint": {10: 0.742, 20: 0.83, 50: 0.999},
            },
        }
        text = render_recall_table(report)
        lines = text.splitlines()
        assert lines[0].split() == ["task", "regime", "R@10", "R@20", "R@50"]
        assert lines[1].split() == ["edge_cls", "with_constraint", "60.4", "60.4", "60.4"]
        assert lines[2].split() == ["edge_cls", "no_constraint", "74.2", "83.0", "99.9"]


class TestRandomBaseline:
    def test_single_edge_constrained_matches_analytic_rate(self):
        # One scorable edge and 16 uniformly scored relations: the
        # constrained top-1 is the right one with probability 1/16. A
        # 2,000-trial run stays within 3 sigma of the binomial bound
        # (the 10,000-trial version lives in the acceptance suite).
        tax = default_taxonomy()
        seed = SeedAnnotation(
            clip_id="clip-base",
            timestep=1,
            frames=plain_frames("clip-base"),
            verb=tax.verbs[0],
            noun=tax.nouns[0],
            box_object=Grounding(),
        )
        g = init_graph(seed, tax)
        trials = 2000
        report = random_baseline([g], seed=11, trials=trials)
        p = 1.0 / 16.0
        bound = 3.0 * math.sqrt(p * (1.0 - p) / trials)
        for k in KS:
            assert abs(report["edge_cls"]["with_constraint"][k] - p) <= bound

    def test_no_constraint_recall_at_50_is_exactly_one(self):
        # Taxonomy-wide scoring puts every relation label on each pair, so
        # two scorable edges make 2 * len(relations) <= 50 candidates and
        # the ground truth always fits in the top 50.
        g = add_object_node(tiny_graph(), "sponge", Grounding(), "verb", "with", TAX)
        report = random_baseline([g], seed=7, trials=200, taxonomy=TAX)
        assert report["edge_cls"]["no_constraint"][50] == 1.0

    def test_deterministic_given_seed(self):
        g = tiny_graph()
        a = random_baseline([g], seed=42, trials=50, taxonomy=TAX)
        b = random_baseline([g], seed=42, trials=50, taxonomy=TAX)
        c = random_baseline([g], seed=43, trials=50, taxonomy=TAX)
        assert a == b
        assert a != c

    def test_rejects_bad_inputs(self):
        g = tiny_graph()
        with pytest.raises(ValueError, match="trials"):
            random_baseline([g], seed=1, trials=0, taxonomy=TAX)
        with pytest.raises(ValueError, match="graph"):
            random_baseline([], seed=1, trials=10, taxonomy=TAX)

    def test_uses_default_16_relation_taxonomy(self):
        assert len(default_taxonomy().relations) == 16
        g_seed = SeedAnnotation(
            clip_id="clip-base",
            timestep=1,
            frames=plain_frames("clip-base"),
            verb=default_taxonomy().verbs[0],
            noun=default_taxonomy().nouns[0],
            box_object=Grounding(),
        )
        g = init_graph(g_seed, default_taxonomy())
        report = random_baseline([g], seed=2, trials=300)
        assert report["edge_cls"]["no_constraint"][50] == 1.0


class TestPredictionFiles:
    def test_round_trip(self, tmp_path):
        rng = random.Random(77)
        preds = []
        for i in range(8):
            drawn, _ = random_instance(rng)
            preds.append(
                PredictionSet(
                    clip_id=f"clip-{i:02d}",
                    timestep=drawn.timestep,
                    relation_scores=drawn.relation_scores,
                    object_scores=drawn.object_scores,
                    verb_scores=drawn.verb_scores,
                )
            )
        rng.shuffle(preds)
        path = tmp_path / "preds.jsonl"
        save_predictions(preds, path)
        loaded = load_predictions(path)
        assert loaded == sorted(preds, key=lambda p: (p.clip_id, p.timestep))

    def test_load_reports_line_numbers(self, tmp_path):
        path = tmp_path / "preds.jsonl"
        path.write_text('{"clip_id": "c", "timestep": 1}\nnot json\n')
        with pytest.raises(PredictionError, match="line 2"):
            load_predictions(path)
