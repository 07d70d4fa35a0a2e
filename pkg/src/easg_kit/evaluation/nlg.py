"""Summarization metrics: BLEU, ROUGE-N, ROUGE-L, CIDEr.

Tokenization is versioned so scores stay comparable across runs: lowercase,
every non-alphanumeric character becomes a space, then whitespace split.

Definitions follow the standard formulas: BLEU with clipped modified
precision and brevity penalty (no smoothing); ROUGE as plain F1, taking the
best reference; CIDEr as the cosine of length-normalized tf-idf n-gram
vectors (n = 1..4) averaged over references and n, scaled by 10 — document
frequencies are counted over each document's reference set, with df floored
at 1 so n-grams unseen in any reference contribute idf log(N).
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Sequence

TOKENIZER_VERSION = 1

_MAX_NGRAM = 4


def tokenize(text: str) -> list[str]:
    cleaned = "".join(ch if ch.isalnum() else " " for ch in text.lower())
    return cleaned.split()


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: str, references: Sequence[str], n: int = 4) -> float:
    """BLEU-n with uniform weights and brevity penalty; 0 when any order
    has no match (no smoothing)."""
    if n < 1:
        raise ValueError("n must be positive")
    cand = tokenize(candidate)
    refs = [tokenize(r) for r in references]
    refs = [r for r in refs if r]
    if not cand or not refs:
        return 0.0

    log_sum = 0.0
    for order in range(1, n + 1):
        cand_counts = _ngrams(cand, order)
        total = sum(cand_counts.values())
        if total == 0:
            return 0.0
        clipped = 0
        for gram, count in cand_counts.items():
            best = max(_ngrams(r, order)[gram] for r in refs)
            clipped += min(count, best)
        if clipped == 0:
            return 0.0
        log_sum += math.log(clipped / total)

    c = len(cand)
    r = min((abs(len(ref) - c), len(ref)) for ref in refs)[1]
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return bp * math.exp(log_sum / n)


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def rouge_n(candidate: str, references: Sequence[str], n: int = 2) -> float:
    """Best (max over references) n-gram overlap F1."""
    if n < 1:
        raise ValueError("n must be positive")
    cand_counts = _ngrams(tokenize(candidate), n)
    cand_total = sum(cand_counts.values())
    best = 0.0
    for reference in references:
        ref_counts = _ngrams(tokenize(reference), n)
        ref_total = sum(ref_counts.values())
        if cand_total == 0 or ref_total == 0:
            continue
        overlap = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        best = max(best, _f1(overlap / cand_total, overlap / ref_total))
    return best


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for token in a:
        row = [0]
        for j, other in enumerate(b, start=1):
            if token == other:
                row.append(prev[j - 1] + 1)
            else:
                row.append(max(prev[j], row[-1]))
        prev = row
    return prev[-1]


def rouge_l(candidate: str, references: Sequence[str]) -> float:
    """Best longest-common-subsequence F1."""
    cand = tokenize(candidate)
    best = 0.0
    for reference in references:
        ref = tokenize(reference)
        if not cand or not ref:
            continue
        lcs = _lcs_length(cand, ref)
        best = max(best, _f1(lcs / len(cand), lcs / len(ref)))
    return best


def _tfidf(tokens: Sequence[str], n: int, idf: dict, default_idf: float) -> dict:
    counts = _ngrams(tokens, n)
    total = sum(counts.values())
    if total == 0:
        return {}
    return {
        gram: (count / total) * idf.get(gram, default_idf)
        for gram, count in counts.items()
    }


def _cosine(a: dict, b: dict) -> float:
    if not a or not b:
        return 0.0
    dot = sum(weight * b[gram] for gram, weight in a.items() if gram in b)
    norm_a = math.sqrt(sum(w * w for w in a.values()))
    norm_b = math.sqrt(sum(w * w for w in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


def cider(candidates: Sequence[str], references: Sequence[Sequence[str]]) -> float:
    """Corpus CIDEr over aligned candidate/reference-set lists, in [0, 10]."""
    if len(candidates) != len(references):
        raise ValueError("candidates and references must align one to one")
    n_docs = len(candidates)
    if n_docs == 0:
        raise ValueError("need at least one document")

    ref_tokens = [[tokenize(r) for r in refs] for refs in references]
    cand_tokens = [tokenize(c) for c in candidates]

    idf_by_order: list[dict] = []
    for order in range(1, _MAX_NGRAM + 1):
        df: Counter = Counter()
        for refs in ref_tokens:
            seen = set()
            for tokens in refs:
                seen.update(_ngrams(tokens, order))
            for gram in seen:
                df[gram] += 1
        idf_by_order.append(
            {gram: math.log(n_docs / max(count, 1)) for gram, count in df.items()}
        )

    default_idf = math.log(n_docs)
    total = 0.0
    for cand, refs in zip(cand_tokens, ref_tokens):
        doc = 0.0
        for order in range(1, _MAX_NGRAM + 1):
            idf = idf_by_order[order - 1]
            cand_vec = _tfidf(cand, order, idf, default_idf)
            if refs:
                sim = sum(
                    _cosine(cand_vec, _tfidf(r, order, idf, default_idf)) for r in refs
                ) / len(refs)
            else:
                sim = 0.0
            doc += sim
        total += 10.0 * doc / _MAX_NGRAM
    return total / n_docs
