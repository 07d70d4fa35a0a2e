"""Text metrics checked against hand-worked values.

The hand fixture (worked from the printed formulas, fractions kept exact):

candidate   c  = "the camera wearer washes a car with a sponge"   (9 tokens)
references  r1 = "the camera wearer washes a blue car with a sponge"  (10)
            r2 = "a person washes the car"                            (5)

BLEU-4 on (c, [r1, r2]):
  clipped precisions against the reference maxima
    p1 = 9/9   every unigram of c appears in r1, "a" twice
    p2 = 7/8   all bigrams except "a car"
    p3 = 5/7   missing "washes a car" and "a car with"
    p4 = 3/6   keeps "the camera wearer washes", "camera wearer washes a",
               "car with a sponge"
  brevity: closest reference length to 9 is 10 (|10-9| < |5-9|),
  c < r so BP = exp(1 - 10/9)
  BLEU-4 = exp(1 - 10/9) * (1 * 7/8 * 5/7 * 1/2) ** 0.25
         = exp(-1/9) * (5/16) ** 0.25 = 0.6690484408935986

ROUGE (plain F1, best reference wins; r1 wins all three):
  ROUGE-1: overlap 9, P = 9/9, R = 9/10     -> F1 = 18/19
  ROUGE-2: overlap 7, P = 7/8, R = 7/9      -> F1 = 14/17
  ROUGE-L: LCS(c, r1) = 9 (c is a subsequence of r1), same P/R as
           ROUGE-1 -> 18/19

CIDEr on candidates ["wash car", "take bowl", "press dough"] with
reference sets [["wash car"], ["take spoon"], ["press dough"]], N = 3:
  every reference n-gram appears in exactly one reference set, so
  idf = log(3) throughout; "bowl" never appears in a reference set and
  the df floor gives it log(3) as well.
  doc 1: identical 2-token sentences -> cosine 1 for n = 1, 2; no
         3- or 4-grams -> 0. mean (1+1+0+0)/4 = 0.5, *10 -> 5.0
  doc 2: unigrams share only "take" of two each -> cosine 1/2; bigrams
         disjoint -> 0. mean (0.5+0+0+0)/4 = 0.125, *10 -> 1.25
  doc 3: like doc 1 -> 5.0
  CIDEr = (5.0 + 1.25 + 5.0) / 3 = 3.75 exactly
"""

from __future__ import annotations

import math
import random

import pytest

from easg_kit.evaluation import (
    TOKENIZER_VERSION,
    bleu,
    cider,
    rouge_l,
    rouge_n,
    tokenize,
)

CAND = "the camera wearer washes a car with a sponge"
REF1 = "the camera wearer washes a blue car with a sponge"
REF2 = "a person washes the car"


class TestTokenizer:
    def test_lowercase_and_punctuation(self):
        assert tokenize("The camera-wearer, WASHES (a) car!") == [
            "the", "camera", "wearer", "washes", "a", "car",
        ]

    def test_version_pinned(self):
        assert TOKENIZER_VERSION == 1

    def test_empty(self):
        assert tokenize("  ...  ") == []


class TestBleu:
    def test_identity_is_one(self):
        s = "camera wearer removes dough from scale"
        assert bleu(s, [s]) == 1.0

    def test_hand_fixture(self):
        want = math.exp(1.0 - 10.0 / 9.0) * (1.0 * 7 / 8 * 5 / 7 * 1 / 2) ** 0.25
        assert abs(bleu(CAND, [REF1, REF2]) - want) <= 1e-9
        assert abs(want - 0.6690484408935986) <= 1e-12

    def test_zero_ngram_precision_zeroes_the_score(self):
        # No common 4-gram, no smoothing.
        assert bleu("take the bowl now", ["wash a car here"]) == 0.0

    def test_short_candidate_brevity(self):
        # Unigram BLEU isolates the brevity penalty: all two tokens match,
        # r = 4, c = 2 -> BP = exp(1 - 2).
        got = bleu("wash car", ["wash car with sponge"], n=1)
        assert abs(got - math.exp(1.0 - 4.0 / 2.0)) <= 1e-12

    def test_empty_candidate_scores_zero(self):
        assert bleu("", [REF1]) == 0.0
        assert bleu(CAND, []) == 0.0

    def test_reference_order_irrelevant(self):
        assert bleu(CAND, [REF1, REF2]) == bleu(CAND, [REF2, REF1])


class TestRouge:
    def test_identity_is_one(self):
        s = "camera wearer removes dough from scale"
        assert rouge_l(s, [s]) == 1.0
        assert rouge_n(s, [s], n=2) == 1.0

    def test_hand_fixture(self):
        assert abs(rouge_n(CAND, [REF1, REF2], n=1) - 18.0 / 19.0) <= 1e-9
        assert abs(rouge_n(CAND, [REF1, REF2], n=2) - 14.0 / 17.0) <= 1e-9
        assert abs(rouge_l(CAND, [REF1, REF2]) - 18.0 / 19.0) <= 1e-9

    def test_best_reference_wins(self):
        assert rouge_l(CAND, [REF2]) < rouge_l(CAND, [REF1])
        assert rouge_l(CAND, [REF1, REF2]) == rouge_l(CAND, [REF1])

    def test_empty_candidate_scores_zero(self):
        assert rouge_l("", [REF1]) == 0.0
        assert rouge_n("", [REF1]) == 0.0

    def test_reference_order_irrelevant(self):
        assert rouge_l(CAND, [REF1, REF2]) == rouge_l(CAND, [REF2, REF1])


class TestCider:
    def test_single_document_corpus_is_zero(self):
        # idf = log(1/1) = 0 wipes every vector.
        s = "camera wearer washes a car"
        assert cider([s], [[s]]) == 0.0

    def test_hand_fixture(self):
        got = cider(
            ["wash car", "take bowl", "press dough"],
            [["wash car"], ["take spoon"], ["press dough"]],
        )
        assert abs(got - 3.75) <= 1e-9

    def test_empty_candidate_scores_zero(self):
        # Doc 1 contributes 0; doc 2 is an exact 2-token match in a 2-doc
        # corpus, (1+1+0+0)/4 * 10 = 5, so the mean is 2.5.
        got = cider(["", "wash car"], [["take bowl"], ["wash car"]])
        assert abs(got - 2.5) <= 1e-9

    def test_misaligned_inputs_rejected(self):
        with pytest.raises(ValueError):
            cider(["wash car"], [["wash car"], ["take bowl"]])

    def test_reference_order_irrelevant(self):
        a = cider(["wash car"] * 2, [["wash car", "take bowl"], ["press dough"]])
        b = cider(["wash car"] * 2, [["take bowl", "wash car"], ["press dough"]])
        assert a == b


class TestRanges:
    def test_scores_stay_in_range(self):
        rng = random.Random(8)
        words = ["wash", "car", "take", "bowl", "dough", "a", "the", "with"]

        def sentence():
            return " ".join(rng.choice(words) for _ in range(rng.randint(1, 12)))

        for _ in range(50):
            c = sentence()
            refs = [sentence() for _ in range(rng.randint(1, 3))]
            assert 0.0 <= bleu(c, refs) <= 1.0
            assert 0.0 <= rouge_n(c, refs) <= 1.0
            assert 0.0 <= rouge_l(c, refs) <= 1.0
        cands = [sentence() for _ in range(6)]
        refs = [[sentence() for _ in range(2)] for _ in range(6)]
        assert 0.0 <= cider(cands, refs) <= 10.0
